"""Self-check suite: normalization, spline/honeycomb agreement, HCIZ vs MC, support containment."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analytic, experiment, support
from .core_types import Ensemble, j_normalization
from .sampling import sample_spectra

__all__ = ["CheckResult", "SUITES", "run_suite", "random_spectrum"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def random_spectrum(rng: np.random.Generator, n: int, min_gap: float = 0.05) -> np.ndarray:
    """Strictly decreasing values with consecutive gaps at least ``min_gap``."""
    gaps = min_gap + rng.exponential(1.0, n - 1)
    v = np.concatenate([[0.0], -np.cumsum(gaps)])
    return v - v.mean() + rng.normal()


def _timed(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    t = time.perf_counter()
    ok, detail = fn()
    return CheckResult(name, bool(ok), detail, time.perf_counter() - t)


def _normalization(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for n, tol in ((2, 1e-8), (3, 1e-6), (4, 1e-4)):
        ens = Ensemble.parse("hermitian", n)

        def one(n=n, tol=tol, ens=ens):
            a, b = random_spectrum(rng, n), random_spectrum(rng, n)
            v = experiment.normalization_check(ens, a, b)
            target = float(j_normalization(n))
            return abs(v - target) <= tol, f"{v:.10g} (expected {j_normalization(n)})"

        out.append(_timed(f"normalization hermitian n={n}", one))

    def sym():
        a, b = random_spectrum(rng, 2), random_spectrum(rng, 2)
        v = experiment.normalization_check(Ensemble.parse("symmetric", 2), a, b)
        return abs(v - 1) <= 1e-8, f"{v:.12g}"

    out.append(_timed("normalization symmetric n=2", sym))
    for kind in ("skew-so", "skew-o"):
        def skew(kind=kind):
            v = experiment.normalization_check(Ensemble.parse(kind, 4), [2.0, 1.0], [1.0, 0.5])
            return abs(v - 1) <= 1e-10, f"{v:.12g}"

        out.append(_timed(f"normalization {kind} n=4", skew))
    return out


def _spline(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)

    def run():
        worst = 0.0
        for _ in range(5):
            a, b = random_spectrum(rng, 3), random_spectrum(rng, 3)
            g = _trace_plane_points(rng, a, b, 10_000)
            j = analytic.j3_values(a, b, g)
            xi = support.xi_length(a, b, -np.sort(-g, axis=1))
            worst = max(worst, float(np.abs(j - xi).max()))
        return worst < 1e-10, f"max |J3 - xi length| = {worst:.3g}"

    return [_timed("spline vs honeycomb n=3", run)]


def _trace_plane_points(rng, a, b, k: int) -> np.ndarray:
    """Random ordered points on the trace plane around the support polygon."""
    lo, hi = support.weyl_bounds(a, b)
    pad = 0.2 * (hi[0] - lo[2])
    g1 = rng.uniform(lo[0] - pad, hi[0] + pad, k)
    g2 = rng.uniform(lo[1] - pad, hi[1] + pad, k)
    g = np.column_stack([g1, g2, a.sum() + b.sum() - g1 - g2])
    return -np.sort(-g, axis=1)


def _hciz(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for n in (2, 3):
        def run(n=n):
            a, x = random_spectrum(rng, n, 0.2), random_spectrum(rng, n, 0.2)
            exact = analytic.hciz_unitary(a, x)
            mc, se = experiment.hciz_mc(a, x, 100_000, seed)
            dev = abs(exact - mc) / se
            return dev < 5, f"|exact - MC| = {dev:.3g} standard errors"

        out.append(_timed(f"HCIZ vs MC n={n}", run))
    return out


def _support(seed: int) -> list[CheckResult]:
    out = []
    rng = np.random.default_rng(seed)
    for n in (2, 3, 4):
        def run(n=n):
            a, b = random_spectrum(rng, n), random_spectrum(rng, n)
            batch = sample_spectra(a, b, Ensemble.parse("hermitian", n), 10_000, seed)
            if n == 2:
                margin = min(support.check_horn(a, b, g, tol=1e-8).margin for g in batch.values)
            else:
                margin = float(support.horn_margins(a, b, batch.values).min())
            return margin >= -1e-8, f"min margin {margin:.3g}"

        out.append(_timed(f"support containment n={n}", run))
    return out


SUITES: dict[str, Callable[[int], list[CheckResult]]] = {
    "normalization": _normalization,
    "spline": _spline,
    "hciz": _hciz,
    "support": _support,
}


def run_suite(name: str = "all", seed: int = 0) -> list[CheckResult]:
    names = list(SUITES) if name == "all" else [name]
    results = []
    for key in names:
        results.extend(SUITES[key](seed))
    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results) if results else 10
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{status}  {r.name:<{width}}  {r.detail}  ({r.seconds:.3g} s)")
    return "\n".join(lines)


def all_passed(results) -> bool:
    return bool(results) and all(r.passed for r in results)
