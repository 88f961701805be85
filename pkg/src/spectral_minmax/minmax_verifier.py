"""Executable certificates for the trace minmax identities at matrix scale.

Every identity is checked two ways.  The exact value comes from the
spectrum and is attained by a spectral witness; the opposite side of each
sup/inf is certified constructively (meets, matched families), while random
projections only supply falsification pressure.
"""

from __future__ import annotations

import itertools
import math
from math import comb
from typing import Sequence

import numpy as np

from .matrix_spectra import (Hermitian, Projection, as_hermitian, kyfan_value,
                             require_distinct, spectral_projection_by_index,
                             spectral_quantile, trace_with)
from .measures import partial_quantile_integral
from .projection_lattice import (CertificateError, haar_bases, interpolate_projection,
                                 matched_families, meet, random_projection)
from .reports import FAIL, PASS, VerificationReport

SAMPLE_TOL = 1e-9
WITNESS_TOL = 1e-10
OPTIMALITY_TOL = 1e-8
EXHAUSTIVE_LIMIT = 100_000


class GranularityError(ValueError):
    """A trace that should be a multiple of ``1/n`` is not."""


def trace_to_rank(trace: float, n: int) -> int:
    k = trace * n
    if abs(k - round(k)) > 1e-9:
        raise GranularityError(f"trace {trace} is not a multiple of 1/{n}")
    return int(round(k))


def _rng(seed, *stream) -> np.random.Generator:
    return np.random.default_rng([int(seed or 0), *stream])


def _batched_traces(m: np.ndarray, bases: np.ndarray) -> np.ndarray:
    """``tau(a B B*)`` for a stack of frames ``(count, n, k)``."""
    if bases.shape[-1] == 0:
        return np.zeros(bases.shape[0])
    return np.real(np.sum(bases.conj() * (m @ bases), axis=(1, 2))) / m.shape[0]


def _local_frames(rng, ambient: np.ndarray, center: np.ndarray, count: int) -> np.ndarray:
    """Frames inside ``range(ambient)`` close to ``ambient @ center``, at log-spread distances."""
    rho, k = center.shape
    if count == 0 or k == 0:
        return np.zeros((0, ambient.shape[0], k), dtype=complex)
    eps = 10.0 ** rng.uniform(-6, 0, size=(count, 1, 1))
    g = rng.standard_normal((count, rho, k)) + 1j * rng.standard_normal((count, rho, k))
    q, _ = np.linalg.qr(center[None] + eps * g)
    return ambient @ q


def _sample_frames(rng, ambient: np.ndarray, center: np.ndarray, count: int) -> np.ndarray:
    """Half Haar-random, half near-witness rank-``k`` frames inside ``range(ambient)``."""
    k = center.shape[1]
    n_local = count // 2
    haar = ambient @ haar_bases(rng, count - n_local, ambient.shape[1], k)
    return np.concatenate([haar, _local_frames(rng, ambient, center, n_local)])


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


# -- Ky Fan -----------------------------------------------------------------

def verify_kyfan(a, j: int, trials: int = 1000, seed: int = 0, equality: bool = False,
                 perturb: float | None = None) -> VerificationReport:
    """``min{tau(ap) : rank(p) >= j} = (1/n)(lambda_1 + ... + lambda_j)``.

    With ``equality=True`` the constraint is ``rank(p) = j``.  The sampled set
    holds every coordinate projection of admissible rank in the eigenbasis
    (when their number is manageable) and ``trials`` random projections of
    each admissible rank.
    """
    a = require_distinct(a, perturb)
    n = a.dim
    if not 1 <= j <= n:
        raise ValueError(f"j={j} outside [1, {n}]")
    lam, vec = a.eig
    m = a.entries
    exact = float(math.fsum(lam[:j])) / n
    via_quantile = kyfan_value(a, j / n)

    witness = spectral_projection_by_index(a, 0, j)
    witness_value = trace_with(a, witness)
    witness_err = abs(witness_value - exact)

    admissible = [j] if equality else list(range(j, n + 1))

    # every admissible coordinate projection in the eigenbasis
    rayleigh = np.real(np.sum(vec.conj() * (m @ vec), axis=0)) / n
    n_subsets = sum(comb(n, k) for k in admissible)
    exhaustive_best = math.inf
    if n_subsets <= EXHAUSTIVE_LIMIT:
        for k in admissible:
            for subset in itertools.combinations(range(n), k):
                exhaustive_best = min(exhaustive_best, float(np.sum(rayleigh[list(subset)])))
    else:
        n_subsets = 0

    rng = _rng(seed, 0, j)
    sampled_best = math.inf
    for k in admissible:
        center = np.eye(n, k, dtype=complex)
        frames = _sample_frames(rng, vec, center, trials)
        if len(frames):
            sampled_best = min(sampled_best, float(np.min(_batched_traces(m, frames))))

    # the true minimum: past rank j, every negative eigenvalue still lowers
    # tau(ap), so the claimed value is only the minimum once lambda_{j+1} >= 0
    true_min = exact if equality else (exact + float(math.fsum(np.minimum(lam[j:], 0.0))) / n)
    best = min(exhaustive_best, sampled_best)
    margin = best - exact
    oracle_gap = exhaustive_best - true_min if n_subsets else None
    ok = (margin >= -SAMPLE_TOL and witness_err <= WITNESS_TOL
          and abs(via_quantile - exact) <= WITNESS_TOL
          and (oracle_gap is None or abs(oracle_gap) <= WITNESS_TOL))
    return VerificationReport(
        theorem="kyfan", n=n, parameters={"j": j, "equality": equality},
        exact_value=exact,
        witness=f"spectral projection onto eigenvectors 1..{j}",
        best_sample=best, trials=n_subsets + trials * len(admissible), seed=seed,
        margin=margin, status=_status(ok),
        tolerances={"sample": SAMPLE_TOL, "witness": WITNESS_TOL},
        details={"witness_value": witness_value, "quantile_integral": via_quantile,
                 "exhaustive_min": exhaustive_best if n_subsets else None,
                 "exhaustive_count": n_subsets, "random_min": sampled_best,
                 "true_min": true_min,
                 "next_eigenvalue": float(lam[j]) if j < n else None,
                 "admissible_ranks": admissible},
    )


# -- conditional min / max below a spectral projection ------------------------

def verify_conditional_min(a, t0: float, t1: float, trials: int = 1000, seed: int = 0,
                           perturb: float | None = None) -> VerificationReport:
    """``tau(a q0) = min{tau(aq) : q <= 1_[t0,inf)(a), tau(q) = delta}`` and its max dual.

    ``q0 = 1_[t0,t1)(a)``; the dual bounds ``q <= 1_(-inf,t1)(a)`` from above.
    """
    a = require_distinct(a, perturb)
    n = a.dim
    lam, vec = a.eig
    m = a.entries
    lo = int(np.searchsorted(lam, t0, side="left"))
    hi = int(np.searchsorted(lam, t1, side="left"))
    if hi <= lo:
        raise ValueError(f"[{t0}, {t1}) holds no eigenvalue; need F(t1) - F(t0) > 0")
    size = hi - lo
    exact = partial_quantile_integral(spectral_quantile(a), lo / n, hi / n)
    direct = float(math.fsum(lam[lo:hi])) / n

    q0 = spectral_projection_by_index(a, lo, hi)
    witness_value = trace_with(a, q0)
    rng = _rng(seed, 1)

    # min form inside r0 = 1_[t0, inf)(a); q0 is the first `size` columns of r0
    r0 = vec[:, lo:]
    frames = _sample_frames(rng, r0, np.eye(n - lo, size, dtype=complex), trials)
    best_min = float(np.min(_batched_traces(m, frames)))

    # max form inside p = 1_(-inf, t1)(a); q0 is the last `size` columns of p
    p = vec[:, :hi]
    center = np.zeros((hi, size), dtype=complex)
    center[lo:, :] = np.eye(size)
    frames = _sample_frames(rng, p, center, trials)
    best_max = float(np.max(_batched_traces(m, frames)))

    # the same minimum inside the corner r0 M r0 under tau_0 = Tr / rank(r0)
    corner = Hermitian(r0.conj().T @ m @ r0)
    compressed = kyfan_value(corner, size / (n - lo)) * (n - lo) / n

    margin = min(best_min - exact, exact - best_max)
    ok = (margin >= -SAMPLE_TOL and abs(witness_value - exact) <= WITNESS_TOL
          and abs(direct - exact) <= WITNESS_TOL and abs(compressed - exact) <= WITNESS_TOL)
    return VerificationReport(
        theorem="conditional", n=n,
        parameters={"t0": float(t0), "t1": float(t1), "index_range": [lo, hi]},
        exact_value=exact,
        witness=f"1_[t0,t1)(a): eigenvectors {lo + 1}..{hi}",
        best_sample=best_min, trials=2 * trials, seed=seed, margin=margin,
        status=_status(ok),
        tolerances={"sample": SAMPLE_TOL, "witness": WITNESS_TOL},
        details={"witness_value": witness_value, "direct_sum": direct,
                 "min_form_best": best_min, "max_form_best": best_max,
                 "compressed_value": compressed, "delta": size / n},
    )


# -- Courant-Fischer-Weyl ---------------------------------------------------

def verify_courant_fischer(a, i: int, j: int, outer_trials: int = 100, inner_trials: int = 100,
                           seed: int = 0, perturb: float | None = None) -> VerificationReport:
    """``(lambda_i + ... + lambda_{i+j-1})/n = sup_{rank r >= n-i+1} inf_{q <= r, rank q = j} tau(aq)``.

    The supremum is attained at ``r0 = 1_[lambda_i, inf)(a)``.  For every
    other sampled ``r`` the infimum is certified to lie below the exact
    value by ``q1 <= r & r1`` with ``r1`` the spectral projection onto the
    ``i + j - 1`` smallest eigenvalues.
    """
    a = require_distinct(a, perturb)
    n = a.dim
    if i < 1 or j < 1 or i + j - 1 > n:
        raise ValueError(f"need 1 <= i, 1 <= j, i + j - 1 <= n; got i={i}, j={j}, n={n}")
    lam, vec = a.eig
    m = a.entries
    exact = float(math.fsum(lam[i - 1:i + j - 1])) / n
    via_quantile = partial_quantile_integral(spectral_quantile(a), (i - 1) / n, (i + j - 1) / n)

    q0 = spectral_projection_by_index(a, i - 1, i + j - 1)
    witness_value = trace_with(a, q0)
    rng = _rng(seed, 2)
    r0 = vec[:, i - 1:]
    frames = _sample_frames(rng, r0, np.eye(n - i + 1, j, dtype=complex), inner_trials)
    inner_best = float(np.min(_batched_traces(m, frames))) if len(frames) else math.inf

    r1 = spectral_projection_by_index(a, 0, i + j - 1)
    worst_certificate = -math.inf
    certificate_failures = 0
    for t in range(outer_trials):
        trng = _rng(seed, 3, t)
        rank = int(trng.integers(n - i + 1, n + 1))
        r = random_projection(n, rank, trng)
        ell = meet(r, r1)
        if ell.rank < j:
            certificate_failures += 1
            continue
        q1 = interpolate_projection(Projection.zero(n), ell, j)
        value = trace_with(a, q1)
        if inner_trials:
            sampled = _batched_traces(m, r.basis @ haar_bases(trng, inner_trials, rank, j))
            value = min(value, float(np.min(sampled)))
        worst_certificate = max(worst_certificate, value)

    margin = min(inner_best - exact, exact - worst_certificate)
    ok = (certificate_failures == 0 and margin >= -SAMPLE_TOL
          and abs(witness_value - exact) <= OPTIMALITY_TOL
          and abs(via_quantile - exact) <= WITNESS_TOL)
    return VerificationReport(
        theorem="cf", n=n, parameters={"i": i, "j": j},
        exact_value=exact,
        witness=f"r0 = eigenvectors {i}..{n}, q0 = eigenvectors {i}..{i + j - 1}",
        best_sample=inner_best, trials=outer_trials * (1 + inner_trials) + inner_trials,
        seed=seed, margin=margin, status=_status(ok),
        tolerances={"sample": SAMPLE_TOL, "witness": OPTIMALITY_TOL},
        details={"witness_value": witness_value, "quantile_integral": via_quantile,
                 "outer_trials": outer_trials, "inner_trials": inner_trials,
                 "worst_outer_certificate": worst_certificate,
                 "certificate_failures": certificate_failures},
    )


# -- Wielandt ---------------------------------------------------------------

def _check_intervals(intervals, n):
    ivs = [(int(lo), int(hi)) for lo, hi in intervals]
    if not ivs:
        raise ValueError("need at least one index interval")
    for idx, (lo, hi) in enumerate(ivs):
        if not 0 <= lo < hi <= n:
            raise ValueError(f"interval {idx} = [{lo}, {hi}) is empty or outside [0, {n}]")
        if idx and ivs[idx - 1][1] > lo:
            raise ValueError(f"intervals {idx - 1} and {idx} are out of order or overlap")
    return ivs


def coordinate_wielandt_oracle(eigenvalues: Sequence[float], intervals) -> float:
    """Brute force of the Wielandt min-max restricted to coordinate projections.

    Minimizes, over nested coordinate chains ``P_1 <= ... <= P_k`` with
    ``|P_j| >= hi_j``, the maximum of ``sum lambda(S_j) / n`` over disjoint
    ``S_j`` inside ``P_j`` with ``|S_j| = hi_j - lo_j``.  Exponential in
    ``n``; meant for ``n <= 6``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    n = len(lam)
    ivs = _check_intervals(intervals, n)
    sizes = [hi - lo for lo, hi in ivs]

    def best_inner(chain):
        best = -math.inf

        def pick(idx, used, acc):
            nonlocal best
            if idx == len(chain):
                best = max(best, acc)
                return
            free = [x for x in chain[idx] if x not in used]
            for s in itertools.combinations(free, sizes[idx]):
                pick(idx + 1, used | set(s), acc + float(np.sum(lam[list(s)])))

        pick(0, frozenset(), 0.0)
        return best

    result = math.inf

    def chains(idx, prev):
        if idx == len(ivs):
            yield []
            return
        rest = [x for x in range(n) if x not in prev]
        for extra in range(max(0, ivs[idx][1] - len(prev)), len(rest) + 1):
            for add in itertools.combinations(rest, extra):
                cur = prev | set(add)
                for tail in chains(idx + 1, cur):
                    yield [cur] + tail

    for chain in chains(0, frozenset()):
        result = min(result, best_inner(chain))
    return result / n


def _sample_families(rng, m, chain: list[np.ndarray], sizes, count, centers=None):
    """Random mutually orthogonal families ``q_j <= p_j`` with ranks ``sizes``; returns total traces."""
    n = m.shape[0]
    chosen = np.zeros((count, n, 0), dtype=complex)
    total = np.zeros(count)
    for idx, (p, k) in enumerate(zip(chain, sizes)):
        g = rng.standard_normal((count, p.shape[1], k)) + 1j * rng.standard_normal((count, p.shape[1], k))
        if centers is not None:
            eps = 10.0 ** rng.uniform(-6, 0, size=(count, 1, 1))
            g = centers[idx][None] + eps * g
        g = p @ g
        if chosen.shape[-1]:
            g = g - chosen @ (np.swapaxes(chosen.conj(), 1, 2) @ g)
        q, _ = np.linalg.qr(g)
        total += _batched_traces(m, q)
        chosen = np.concatenate([chosen, q], axis=2)
    return total


def verify_wielandt(a, index_intervals, outer_trials: int = 100, inner_trials: int = 100,
                    seed: int = 0, perturb: float | None = None) -> VerificationReport:
    """Wielandt min-max for disjoint ascending eigenvalue index ranges ``[lo_j, hi_j)``.

    Exact value: ``sum_j (1/n) sum_{lo_j <= i < hi_j} lambda_i``.  The witness
    chain ``p_j = 1_(-inf, t1_j)(a)`` attains it with ``qt_j = 1_[t0_j, t1_j)(a)``
    and sampled orthogonal families under it never exceed it.  Each random
    chain ``p_1 <= ... <= p_k`` is certified by matched families against
    ``r_j = 1_[t0_j, inf)(a)``.
    """
    a = require_distinct(a, perturb)
    n = a.dim
    ivs = _check_intervals(index_intervals, n)
    sizes = [hi - lo for lo, hi in ivs]
    lam, vec = a.eig
    m = a.entries
    exact = math.fsum(float(math.fsum(lam[lo:hi])) for lo, hi in ivs) / n
    quantile = spectral_quantile(a)
    via_quantile = math.fsum(partial_quantile_integral(quantile, lo / n, hi / n) for lo, hi in ivs)

    witness_value = sum(trace_with(a, spectral_projection_by_index(a, lo, hi)) for lo, hi in ivs)

    rng = _rng(seed, 4)
    chain = [vec[:, :hi] for _, hi in ivs]
    centers = []
    for lo, hi in ivs:
        c = np.zeros((hi, hi - lo), dtype=complex)
        c[lo:, :] = np.eye(hi - lo)
        centers.append(c)
    half = inner_trials // 2
    inner = np.concatenate([
        _sample_families(rng, m, chain, sizes, inner_trials - half),
        _sample_families(rng, m, chain, sizes, half, centers),
    ])
    inner_best = float(np.max(inner)) if len(inner) else -math.inf

    r = [spectral_projection_by_index(a, lo, n) for lo, _ in ivs]
    worst = math.inf
    certificate_failures = []
    for t in range(outer_trials):
        trng = _rng(seed, 5, t)
        u = haar_bases(trng, 1, n, n)[0]
        ranks, prev = [], 0
        for _, hi in ivs:
            prev = int(trng.integers(max(hi, prev), n + 1))
            ranks.append(prev)
        p = [Projection(u[:, :k]) for k in ranks]
        try:
            qs, qts = matched_families(p, r, sizes)
        except CertificateError as exc:
            certificate_failures.append(f"trial {t}: {exc}")
            continue
        value = math.fsum(trace_with(a, q) for q in qts)
        worst = min(worst, value)

    margin = min(exact - inner_best, worst - exact)
    ok = (not certificate_failures and margin >= -SAMPLE_TOL
          and abs(witness_value - exact) <= WITNESS_TOL
          and abs(via_quantile - exact) <= WITNESS_TOL)
    return VerificationReport(
        theorem="wielandt", n=n, parameters={"intervals": [list(iv) for iv in ivs]},
        exact_value=exact,
        witness="p_j = eigenvectors 1..hi_j, qt_j = eigenvectors lo_j+1..hi_j",
        best_sample=inner_best, trials=outer_trials + inner_trials, seed=seed,
        margin=margin, status=_status(ok),
        tolerances={"sample": SAMPLE_TOL, "witness": WITNESS_TOL, "family_sum": OPTIMALITY_TOL},
        details={"witness_value": witness_value, "quantile_integral": via_quantile,
                 "worst_chain_certificate": worst,
                 "certificate_failures": certificate_failures[:5],
                 "n_certificate_failures": len(certificate_failures)},
    )
