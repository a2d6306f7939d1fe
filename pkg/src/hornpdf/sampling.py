"""Haar sampling of unitary/orthogonal groups and the orbit-sum Monte-Carlo oracle.

Random numbers come from the counter-based Philox generator.  A stream is
keyed by ``(seed, stream_index)``; bulk sampling cuts the sample index range
into fixed blocks of :data:`BLOCK_SIZE` and gives block ``b`` the stream
``(seed, b)``.  The sample sequence for a given ``(seed, n_samples)`` is
therefore the same whatever the number of worker threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core_types import (
    Ensemble,
    EnsembleKind,
    HornError,
    SkewGroup,
    SkewSpectrum,
    Spectrum,
)

__all__ = [
    "BLOCK_SIZE",
    "RngStream",
    "haar_unitary",
    "haar_orthogonal",
    "hermitian_eigenvalues",
    "pfaffian",
    "skew_block_matrix",
    "skew_canonical_form",
    "sample_gamma",
    "sample_spectra",
    "SampleBatch",
    "default_workers",
]

BLOCK_SIZE = 8192
_MASK64 = (1 << 64) - 1
_SYM_TOL = 1e-12
_DEGENERATE_GAP = 1e-12


@dataclass(frozen=True)
class RngStream:
    """Key of an independent random stream."""

    seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_index"):
            v = getattr(self, name)
            if not 0 <= int(v) <= _MASK64:
                raise HornError(f"{name} must fit in an unsigned 64-bit integer, got {v}")

    def generator(self) -> np.random.Generator:
        key = (int(self.seed) & _MASK64) | ((int(self.stream_index) & _MASK64) << 64)
        return np.random.Generator(np.random.Philox(key=key))


RngLike = Union[RngStream, np.random.Generator]


def _as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def default_workers() -> int:
    """Worker count: ``HORN_THREADS`` if set, else the CPU count."""
    env = os.environ.get("HORN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise HornError(f"HORN_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


# --------------------------------------------------------------------------
# Haar measure on U(n), O(n), SO(n)
# --------------------------------------------------------------------------

def _haar_unitary_batch(n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    z = gen.standard_normal((size, n, n)) + 1j * gen.standard_normal((size, n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    # Phase fix: makes diag(R) real positive, which the Haar law requires.
    return q * (d / np.abs(d))[:, None, :]


def _haar_orthogonal_batch(n: int, size: int, gen: np.random.Generator, special: bool) -> np.ndarray:
    if not special:
        q, r = np.linalg.qr(gen.standard_normal((size, n, n)))
        return q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[:, None, :]
    # SO(n) by rejection on the determinant (acceptance 1/2).
    out = np.empty((size, n, n))
    filled = 0
    while filled < size:
        want = size - filled
        cand = _haar_orthogonal_batch(n, 2 * want + 8, gen, special=False)
        keep = cand[np.linalg.det(cand) > 0][:want]
        out[filled:filled + len(keep)] = keep
        filled += len(keep)
    return out


def haar_unitary(n: int, rng: RngLike) -> np.ndarray:
    """Draw ``U`` from the normalized Haar measure on U(n).

    Complex Ginibre matrix, QR, then each column of ``Q`` is multiplied by
    the phase of the matching diagonal entry of ``R``.
    """
    if n < 1:
        raise HornError(f"n must be >= 1, got {n}")
    return _haar_unitary_batch(n, 1, _as_generator(rng))[0]


def haar_orthogonal(n: int, special: bool, rng: RngLike) -> np.ndarray:
    """Draw from Haar measure on O(n), or on SO(n) when ``special``."""
    if n < 1:
        raise HornError(f"n must be >= 1, got {n}")
    return _haar_orthogonal_batch(n, 1, _as_generator(rng), special)[0]


# --------------------------------------------------------------------------
# Spectra of sampled matrices
# --------------------------------------------------------------------------

def _check_symmetry(a: np.ndarray, sign: int, what: str) -> None:
    target = sign * np.swapaxes(a.conj(), -1, -2)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - target), initial=0.0) > _SYM_TOL * scale:
        raise HornError(f"matrix is not {what}")


def hermitian_eigenvalues(a) -> Spectrum:
    """Eigenvalues of a Hermitian (or real symmetric) matrix, largest first.

    The result is not checked for strictness; sampled spectra may be
    degenerate to machine precision (see :meth:`Spectrum.is_degenerate`).
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise HornError(f"expected a square matrix, got shape {a.shape}")
    _check_symmetry(a, 1, "hermitian")
    return Spectrum.unchecked(np.linalg.eigvalsh(a)[::-1])


def pfaffian(a) -> np.ndarray | float:
    """Pfaffian of a skew-symmetric matrix (or a stack of them) by cofactor expansion.

    Exponential cost; intended for sizes up to 6 or so.
    """
    a = np.asarray(a, dtype=float)
    size = a.shape[-1]
    if a.shape[-2] != size:
        raise HornError(f"expected square matrices, got shape {a.shape}")
    out = _pfaffian_rec(a, tuple(range(size)))
    return float(out) if np.ndim(out) == 0 else out


def _pfaffian_rec(a: np.ndarray, idx: tuple[int, ...]):
    if not idx:
        return np.ones(a.shape[:-2])
    if len(idx) % 2:
        return np.zeros(a.shape[:-2])
    first, rest = idx[0], idx[1:]
    total = np.zeros(a.shape[:-2])
    for k, j in enumerate(rest):
        sign = -1.0 if k % 2 else 1.0
        total = total + sign * a[..., first, j] * _pfaffian_rec(a, rest[:k] + rest[k + 1:])
    return total


def skew_block_matrix(values, n: int) -> np.ndarray:
    """Canonical skew matrix ``diag([[0, a_i], [-a_i, 0]])`` padded to size ``n``."""
    values = np.asarray(values, dtype=float)
    if n not in (2 * len(values), 2 * len(values) + 1):
        raise HornError(f"{len(values)} blocks do not fit a {n}x{n} matrix")
    a = np.zeros((n, n))
    for i, v in enumerate(values):
        a[2 * i, 2 * i + 1] = v
        a[2 * i + 1, 2 * i] = -v
    return a


def _skew_canonical_batch(c: np.ndarray, special: bool) -> tuple[np.ndarray, np.ndarray]:
    """Block eigenvalues of a stack of real skew matrices, plus a degeneracy flag."""
    n = c.shape[-1]
    m = n // 2
    ev = np.linalg.eigvalsh(1j * c)  # ascending; pairs +-a_j, plus 0 when n is odd
    vals = ev[:, ::-1][:, :m].copy()
    scale = np.maximum(1.0, np.abs(ev).max(axis=1))
    degenerate = np.zeros(len(c), dtype=bool)
    if m > 1:
        degenerate |= (np.diff(-vals, axis=1) <= _DEGENERATE_GAP * scale[:, None]).any(axis=1)
    if special and n % 2 == 0:
        pf = np.asarray(_pfaffian_rec(c, tuple(range(n))))
        flat = np.abs(pf) <= _DEGENERATE_GAP * scale ** m
        degenerate |= flat
        vals[:, -1] = np.where(pf < 0, -vals[:, -1], vals[:, -1])
    else:
        degenerate |= vals[:, -1] <= _DEGENERATE_GAP * scale
    return vals, degenerate


def skew_canonical_form(a, group: str | SkewGroup = "O") -> SkewSpectrum:
    """Block eigenvalues of a real skew-symmetric matrix.

    ``group`` is ``"O"`` or ``"SO"`` (or a :class:`SkewGroup`).  For SO with
    even size the last entry carries the sign of the Pfaffian, so that
    ``Pf(A) = prod(values)``; otherwise every entry is positive.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
        raise HornError(f"expected a square matrix of size >= 2, got shape {a.shape}")
    _check_symmetry(a, -1, "skew-symmetric")
    special = group.special if isinstance(group, SkewGroup) else str(group).upper() == "SO"
    vals, degenerate = _skew_canonical_batch(a[None], special)
    if degenerate[0] and special and a.shape[0] % 2 == 0:
        raise HornError("Pfaffian is numerically zero: the SO sign of the last block is indeterminate")
    return SkewSpectrum.unchecked(vals[0], SkewGroup.for_size(a.shape[0], special))


# --------------------------------------------------------------------------
# Orbit sums
# --------------------------------------------------------------------------

def _labels(alpha, beta, ensemble: Ensemble) -> tuple[np.ndarray, np.ndarray]:
    a = ensemble.spectrum(alpha.values if hasattr(alpha, "values") else alpha)
    b = ensemble.spectrum(beta.values if hasattr(beta, "values") else beta)
    return a.array, b.array


def _sample_block(a: np.ndarray, b: np.ndarray, ensemble: Ensemble, size: int,
                  gen: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n = ensemble.n
    kind = ensemble.kind
    if kind is EnsembleKind.HERMITIAN_U:
        u = _haar_unitary_batch(n, size, gen)
        c = np.diag(a).astype(complex) + (u * b) @ np.swapaxes(u.conj(), -1, -2)
        g = np.linalg.eigvalsh(c)[:, ::-1]
    elif kind is EnsembleKind.SYMMETRIC_O:
        o = _haar_orthogonal_batch(n, size, gen, special=False)
        c = np.diag(a) + (o * b) @ np.swapaxes(o, -1, -2)
        g = np.linalg.eigvalsh(c)[:, ::-1]
    else:
        special = kind is EnsembleKind.SKEW_SO
        o = _haar_orthogonal_batch(n, size, gen, special=special)
        c = skew_block_matrix(a, n) + o @ skew_block_matrix(b, n) @ np.swapaxes(o, -1, -2)
        g, degenerate = _skew_canonical_batch(c, special)
        return g, degenerate
    scale = np.maximum(1.0, np.abs(g).max(axis=1))
    degenerate = (np.diff(-g, axis=1) <= _DEGENERATE_GAP * scale[:, None]).any(axis=1)
    return g, degenerate


def sample_gamma(alpha, beta, ensemble: Ensemble, rng: RngLike) -> Spectrum | SkewSpectrum:
    """One draw of the spectrum of ``diag(alpha) + g diag(beta) g^-1``.

    ``g`` is Haar-distributed in the ensemble's group.  Skew ensembles use
    block-diagonal canonical matrices in place of ``diag``.
    """
    a, b = _labels(alpha, beta, ensemble)
    g, _ = _sample_block(a, b, ensemble, 1, _as_generator(rng))
    if ensemble.is_skew:
        return SkewSpectrum.unchecked(g[0], ensemble.skew_group)
    return Spectrum.unchecked(g[0])


@dataclass(frozen=True)
class SampleBatch:
    """Sampled spectra (one row per sample) and a per-sample degeneracy flag."""

    values: np.ndarray
    degenerate: np.ndarray
    seed: int

    def __len__(self) -> int:
        return len(self.values)


def _block_job(a, b, ensemble, seed, block, size):
    return _sample_block(a, b, ensemble, size, RngStream(seed, block).generator())


def iter_blocks(n_samples: int):
    """Yield ``(block_index, size)`` covering ``n_samples`` samples."""
    for block, start in enumerate(range(0, n_samples, BLOCK_SIZE)):
        yield block, min(BLOCK_SIZE, n_samples - start)


def sample_spectra(alpha, beta, ensemble: Ensemble, n_samples: int, seed: int,
                   workers: int | None = None) -> SampleBatch:
    """Draw ``n_samples`` spectra; identical output for any ``workers``."""
    if n_samples < 1:
        raise HornError(f"n_samples must be >= 1, got {n_samples}")
    a, b = _labels(alpha, beta, ensemble)
    workers = default_workers() if workers is None else max(1, int(workers))
    jobs = list(iter_blocks(n_samples))
    if workers == 1 or len(jobs) == 1:
        parts = [_block_job(a, b, ensemble, seed, blk, size) for blk, size in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _block_job(a, b, ensemble, seed, *j), jobs))
    values = np.concatenate([p[0] for p in parts])
    degenerate = np.concatenate([p[1] for p in parts])
    return SampleBatch(values, degenerate, seed)
