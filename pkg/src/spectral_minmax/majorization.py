"""Majorization of quantile functions, Lidskii's inequality and spectral domination."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .matrix_spectra import as_hermitian, jacobi_eigh, normalized_trace, spectral_quantile
from .measures import Quantile, partial_quantile_integral
from .reports import FAIL, HYPOTHESIS_NOT_MET, PASS, VerificationReport

MAJORIZATION_TOL = 1e-10
DOMINATION_TOL = 1e-9
PSD_TOL = 1e-10
# interior probes per breakpoint gap; partial integrals of curved pieces can
# peak strictly inside a gap
_REFINE = 16


class QuantileSum:
    """Pointwise sum of quantile functions; again non-decreasing and right-continuous."""

    def __init__(self, *terms):
        flat = []
        for t in terms:
            flat.extend(t.terms if isinstance(t, QuantileSum) else [t])
        self.terms = tuple(flat)

    def __call__(self, s):
        return sum(t(s) for t in self.terms)

    @property
    def s_breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([s_breakpoints(t) for t in self.terms]))

    def integral(self, s0: float, s1: float) -> float:
        return sum(t.integral(s0, s1) for t in self.terms)

    @property
    def is_step(self) -> bool:
        return all(is_step(t) for t in self.terms)


def add_quantiles(x, y) -> QuantileSum:
    return QuantileSum(x, y)


def s_breakpoints(q) -> np.ndarray:
    return q.s_breakpoints if isinstance(q, QuantileSum) else np.asarray(q.s)


def is_step(q) -> bool:
    if isinstance(q, QuantileSum):
        return q.is_step
    return bool(np.all(q.t0 == q.t1))


class MajorizationResult(NamedTuple):
    holds: bool
    margin: float       # min over s of int_0^s x - int_0^s y
    total_gap: float    # |int_0^1 x - int_0^1 y|
    worst_s: float

    def __bool__(self) -> bool:
        return self.holds


def _partial_integrals(q, grid: np.ndarray) -> np.ndarray:
    # cumulative over consecutive grid points keeps this linear in len(grid)
    steps = np.array([q.integral(a, b) for a, b in zip(grid[:-1], grid[1:])])
    return np.concatenate([[0.0], np.cumsum(steps)])


def majorizes(x, y, tol: float = MAJORIZATION_TOL) -> MajorizationResult:
    """Whether ``x`` is majorized by ``y`` (``x < y``) for ascending quantiles.

    Holds when ``int_0^s x >= int_0^s y - tol`` for all ``s`` and the total
    integrals agree within ``tol``: ``x`` is the more averaged of the two.
    Step quantiles are checked at the union of breakpoints, which is exact
    because the partial integrals are then piecewise linear; curved pieces
    are also probed inside every gap.
    """
    grid = np.union1d(s_breakpoints(x), s_breakpoints(y))
    grid = np.clip(grid, 0.0, 1.0)
    grid = np.union1d(grid, [0.0, 1.0])
    if not (is_step(x) and is_step(y)):
        fine = [np.linspace(a, b, _REFINE + 1)[:-1] for a, b in zip(grid[:-1], grid[1:])]
        grid = np.union1d(np.concatenate(fine), [1.0])
    diff = _partial_integrals(x, grid) - _partial_integrals(y, grid)
    total_gap = abs(float(diff[-1]))
    k = int(np.argmin(diff))
    margin = float(diff[k])
    return MajorizationResult(margin >= -tol and total_gap <= tol, margin, total_gap, float(grid[k]))


def lidskii_check(a, b) -> VerificationReport:
    """``X_{a+b}`` is majorized by ``X_a + X_b``, with equal totals ``tau(a) + tau(b)``."""
    a, b = as_hermitian(a), as_hermitian(b)
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    xab = spectral_quantile(a + b)
    xa, xb = spectral_quantile(a), spectral_quantile(b)
    res = majorizes(xab, add_quantiles(xa, xb))
    total = partial_quantile_integral(xab, 0.0, 1.0)
    trace_gap = abs(total - (normalized_trace(a) + normalized_trace(b)))
    ok = res.holds and trace_gap <= MAJORIZATION_TOL
    return VerificationReport(
        theorem="lidskii", n=a.dim, parameters={}, exact_value=total,
        witness="partial integrals of X_{a+b} against X_a + X_b at all breakpoints",
        best_sample=res.margin, trials=1, seed=None, margin=res.margin,
        status=PASS if ok else FAIL,
        tolerances={"majorization": MAJORIZATION_TOL},
        details={"total_integral_gap": res.total_gap, "trace_gap": trace_gap,
                 "worst_s": res.worst_s},
    )


def domination_check(a, b) -> VerificationReport:
    """If ``b - a`` is positive semidefinite, the sorted eigenvalues satisfy ``lambda_j(a) <= lambda_j(b)``."""
    a, b = as_hermitian(a), as_hermitian(b)
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    gap_min = float(jacobi_eigh((b - a).entries).values[0])
    params = {"min_eig_b_minus_a": gap_min}
    if gap_min < -PSD_TOL:
        return VerificationReport(
            theorem="domination", n=a.dim, parameters=params, exact_value=gap_min,
            witness="b - a is not positive semidefinite", best_sample=None, trials=0,
            seed=None, margin=0.0, status=HYPOTHESIS_NOT_MET,
            tolerances={"psd": PSD_TOL, "domination": DOMINATION_TOL})
    diffs = b.eigenvalues - a.eigenvalues
    margin = float(np.min(diffs))
    return VerificationReport(
        theorem="domination", n=a.dim, parameters=params, exact_value=gap_min,
        witness="sorted eigenvalues of a and b", best_sample=margin, trials=a.dim,
        seed=None, margin=margin, status=PASS if margin >= -DOMINATION_TOL else FAIL,
        tolerances={"psd": PSD_TOL, "domination": DOMINATION_TOL},
        details={"eigenvalue_gaps": diffs.tolist()},
    )
