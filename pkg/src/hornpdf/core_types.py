"""Spectra, ensembles, Vandermonde products and normalization constants.

Everything in here is a pure function or an immutable value object.  The
normalization constants are computed exactly with :class:`fractions.Fraction`
and only converted to ``float`` at the call site.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "HornError",
    "DegenerateSpectrumError",
    "UnsupportedCaseError",
    "QuadratureError",
    "ConditioningWarning",
    "Spectrum",
    "SkewGroup",
    "SkewSpectrum",
    "EnsembleKind",
    "Ensemble",
    "ConstantFamily",
    "vandermonde",
    "vandermonde_O",
    "prefactor_hermitian",
    "j_normalization",
    "kappa_hat",
    "appendix_a_constants",
]

DEFAULT_STRICT_TOL = 1e-12
NEAR_DEGENERATE_GAP = 1e-9


class HornError(ValueError):
    """Base class for invalid inputs to the library."""


class DegenerateSpectrumError(HornError):
    """Two eigenvalues coincide (within tolerance) where strictness is required."""


class UnsupportedCaseError(HornError):
    """No closed form is available for the requested (ensemble, n)."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach its tolerance.

    Carries the best estimate and the last inter-level disagreement.
    """

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class ConditioningWarning(UserWarning):
    """Spectrum is strict but so close to degenerate that Vandermonde ratios lose digits."""


def _scale(values: Sequence[float]) -> float:
    return max(1.0, max((abs(v) for v in values), default=0.0))


def _as_tuple(values: Iterable[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in np.ravel(np.asarray(values, dtype=float)))


def _warn_if_near_degenerate(gaps: Sequence[float], what: str) -> None:
    if gaps and min(gaps) < NEAR_DEGENERATE_GAP:
        warnings.warn(
            f"{what} has an eigenvalue gap {min(gaps):.3g} < {NEAR_DEGENERATE_GAP:g}; "
            "densities divide by the Vandermonde product and will be ill-conditioned",
            ConditioningWarning,
            stacklevel=4,
        )


@dataclass(frozen=True)
class Spectrum:
    """A strictly decreasing multiplet of real eigenvalues.

    Parameters
    ----------
    values : sequence of float
        Eigenvalues, largest first.
    tol : float
        Relative strictness tolerance.  Consecutive gaps must exceed
        ``tol * max(1, max|values|)``.
    """

    values: tuple[float, ...]
    tol: float = field(default=DEFAULT_STRICT_TOL, compare=False, repr=False)

    def __post_init__(self) -> None:
        vals = _as_tuple(self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 1:
            raise HornError("a spectrum needs at least one eigenvalue")
        if not all(math.isfinite(v) for v in vals):
            raise HornError(f"non-finite eigenvalue in {vals}")
        threshold = self.tol * _scale(vals)
        gaps = [vals[i] - vals[i + 1] for i in range(len(vals) - 1)]
        for i, gap in enumerate(gaps):
            if gap <= threshold:
                raise DegenerateSpectrumError(
                    f"eigenvalues must be strictly decreasing: values[{i}]={vals[i]!r}, "
                    f"values[{i + 1}]={vals[i + 1]!r}"
                )
        _warn_if_near_degenerate(gaps, "spectrum")

    @classmethod
    def unchecked(cls, values: Iterable[float]) -> "Spectrum":
        """Build without the strictness test (used for sampled spectra)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "values", _as_tuple(values))
        object.__setattr__(obj, "tol", DEFAULT_STRICT_TOL)
        return obj

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values)

    @property
    def trace(self) -> float:
        return math.fsum(self.values)

    def shifted(self, c: float) -> "Spectrum":
        return Spectrum([v + c for v in self.values], tol=self.tol)

    def is_degenerate(self, tol: float = DEFAULT_STRICT_TOL) -> bool:
        threshold = tol * _scale(self.values)
        return any(self.values[i] - self.values[i + 1] <= threshold for i in range(self.n - 1))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


class SkewGroup(str, enum.Enum):
    """Group acting on real skew-symmetric matrices, with the parity of the size."""

    O_EVEN = "O_even"
    SO_EVEN = "SO_even"
    O_ODD = "O_odd"
    SO_ODD = "SO_odd"

    @property
    def odd(self) -> bool:
        return self in (SkewGroup.O_ODD, SkewGroup.SO_ODD)

    @property
    def special(self) -> bool:
        return self in (SkewGroup.SO_EVEN, SkewGroup.SO_ODD)

    @classmethod
    def for_size(cls, n: int, special: bool) -> "SkewGroup":
        if n % 2:
            return cls.SO_ODD if special else cls.O_ODD
        return cls.SO_EVEN if special else cls.O_EVEN


@dataclass(frozen=True)
class SkewSpectrum:
    """Block eigenvalues of a real skew-symmetric matrix.

    A matrix in canonical form is ``diag([[0, a_i], [-a_i, 0]], ...)`` plus a
    trailing zero for odd size.  Only ``SO_EVEN`` allows a negative last entry.
    """

    values: tuple[float, ...]
    group: SkewGroup
    tol: float = field(default=DEFAULT_STRICT_TOL, compare=False, repr=False)

    def __post_init__(self) -> None:
        vals = _as_tuple(self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "group", SkewGroup(self.group))
        if len(vals) < 1:
            raise HornError("a skew spectrum needs at least one block")
        threshold = self.tol * _scale(vals)
        if self.group is SkewGroup.SO_EVEN:
            keys = list(vals[:-1]) + [abs(vals[-1])]
        else:
            keys = list(vals)
            if any(v <= threshold for v in vals):
                raise DegenerateSpectrumError(
                    f"block eigenvalues must be positive for {self.group.value}: {vals}"
                )
        gaps = [keys[i] - keys[i + 1] for i in range(len(keys) - 1)]
        if any(g <= threshold for g in gaps) or abs(keys[-1]) <= threshold:
            raise DegenerateSpectrumError(
                f"block eigenvalues must satisfy a_1 > ... > |a_m| > 0 for {self.group.value}: {vals}"
            )
        _warn_if_near_degenerate(gaps + [abs(keys[-1])], "skew spectrum")

    @classmethod
    def unchecked(cls, values: Iterable[float], group: SkewGroup) -> "SkewSpectrum":
        obj = object.__new__(cls)
        object.__setattr__(obj, "values", _as_tuple(values))
        object.__setattr__(obj, "group", SkewGroup(group))
        object.__setattr__(obj, "tol", DEFAULT_STRICT_TOL)
        return obj

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def n(self) -> int:
        return 2 * self.m + (1 if self.group.odd else 0)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


class EnsembleKind(str, enum.Enum):
    HERMITIAN_U = "hermitian"
    SYMMETRIC_O = "symmetric"
    SKEW_O = "skew-o"
    SKEW_SO = "skew-so"


# (kind, n) pairs with a closed-form density.
_ANALYTIC = {
    EnsembleKind.HERMITIAN_U: (2, 3, 4),
    EnsembleKind.SYMMETRIC_O: (2,),
    EnsembleKind.SKEW_O: (2, 3, 4),
    EnsembleKind.SKEW_SO: (2, 3, 4),
}


def analytic_table() -> str:
    """Human-readable list of the in-scope analytic cases."""
    return "; ".join(f"{k.value}: n in {{{', '.join(map(str, v))}}}" for k, v in _ANALYTIC.items())


@dataclass(frozen=True)
class Ensemble:
    """Matrix class plus acting group, and the matrix size."""

    kind: EnsembleKind
    n: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EnsembleKind(self.kind))
        if int(self.n) != self.n or self.n < 2:
            raise HornError(f"matrix size must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def parse(cls, name: str, n: int) -> "Ensemble":
        return cls(EnsembleKind(name.lower()), n)

    @property
    def is_skew(self) -> bool:
        return self.kind in (EnsembleKind.SKEW_O, EnsembleKind.SKEW_SO)

    @property
    def skew_group(self) -> SkewGroup:
        if not self.is_skew:
            raise HornError(f"{self.kind.value} is not a skew-symmetric ensemble")
        return SkewGroup.for_size(self.n, self.kind is EnsembleKind.SKEW_SO)

    @property
    def rank(self) -> int:
        """Length of the spectra describing an orbit (n, or m = n // 2 for skew)."""
        return self.n // 2 if self.is_skew else self.n

    @property
    def has_analytic_density(self) -> bool:
        return self.n in _ANALYTIC[self.kind]

    def spectrum(self, values: Iterable[float]):
        """Validate ``values`` as an orbit label for this ensemble."""
        if self.is_skew:
            spec = SkewSpectrum(values, self.skew_group)
        else:
            spec = Spectrum(values)
        if len(spec) != self.rank:
            raise HornError(
                f"{self.kind.value} n={self.n} needs {self.rank} eigenvalues, got {len(spec)}"
            )
        return spec


def vandermonde(x) -> np.ndarray | float:
    """Product of ``x_i - x_j`` over ``i < j`` along the last axis."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    out = np.ones(x.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            out = out * (x[..., i] - x[..., j])
    return float(out) if out.ndim == 0 else out


def vandermonde_O(x, parity: str) -> np.ndarray | float:
    """Orthogonal-group analogue of :func:`vandermonde`.

    ``prod_{i<j} (x_i^2 - x_j^2)``, times ``prod x_i`` when ``parity == "odd"``.
    """
    if parity not in ("even", "odd"):
        raise HornError(f"parity must be 'even' or 'odd', got {parity!r}")
    x = np.asarray(x, dtype=float)
    out = np.asarray(vandermonde(x * x))
    if parity == "odd":
        out = out * np.prod(x, axis=-1)
    return float(out) if out.ndim == 0 else out


def _superfactorial(n: int) -> int:
    return math.prod(math.factorial(p) for p in range(1, n + 1))


def prefactor_hermitian(n: int) -> Fraction:
    """Exact constant ``prod_{p=1}^{n-1} p! / n!`` in front of the Hermitian density."""
    if n < 2:
        raise HornError(f"n must be >= 2, got {n}")
    return Fraction(_superfactorial(n - 1), math.factorial(n))


def j_normalization(n: int) -> Fraction:
    """Exact integral of the kernel-weighted Vandermonde ratio over the ordered sector."""
    if not 2 <= n <= 5:
        raise HornError(f"j_normalization is tabulated for 2 <= n <= 5, got {n}")
    return Fraction(1, _superfactorial(n - 1))


class ConstantFamily(str, enum.Enum):
    HERMITIAN = "Hermitian"
    SKEW_EVEN = "SkewEven"
    SKEW_ODD = "SkewOdd"


def kappa_hat(family: ConstantFamily | str, size: int) -> Fraction:
    """Exact Harish-Chandra constant.  ``size`` is n (Hermitian) or m (skew)."""
    family = ConstantFamily(family)
    if size < 1:
        raise HornError(f"size must be >= 1, got {size}")
    if family is ConstantFamily.HERMITIAN:
        return Fraction(_superfactorial(size - 1))
    odd_facts = lambda k: math.prod(math.factorial(2 * p - 1) for p in range(1, k + 1))  # noqa: E731
    if family is ConstantFamily.SKEW_EVEN:
        return Fraction(math.factorial(size - 1) * odd_facts(size - 1), 2 ** ((size - 1) ** 2))
    return Fraction(odd_facts(size), 2 ** (size * size))


def appendix_a_constants(family: ConstantFamily | str, size: int) -> tuple[float, float]:
    """Return ``(kappa, kappa_hat)`` for the measure decomposition and the HC integral.

    ``kappa`` relates the Lebesgue measure on the matrix space to eigenvalues
    times Haar measure; ``kappa_hat`` is the prefactor of the Harish-Chandra
    determinant formula.
    """
    family = ConstantFamily(family)
    if size < 1:
        raise HornError(f"size must be >= 1, got {size}")
    kh = float(kappa_hat(family, size))
    if family is ConstantFamily.HERMITIAN:
        n = size
        kappa = (2 * math.pi) ** (n * (n - 1) / 2) / _superfactorial(n)
    elif family is ConstantFamily.SKEW_EVEN:
        m = size
        even_facts = math.prod(math.factorial(2 * p) for p in range(1, m))
        kappa = 2 ** (2 * m * m - 1.5 * m) * math.pi ** (m * (m - 1)) / (math.factorial(m) * even_facts)
    else:
        m = size
        even_facts = math.prod(math.factorial(2 * p) for p in range(1, m + 1))
        kappa = 2 ** (2 * m * m + 0.5 * m) * math.pi ** (m * m) / (math.factorial(m) * even_facts)
    return kappa, kh
