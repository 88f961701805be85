"""The acceptance battery: every criterion as a deterministic function of one seed."""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .majorization import domination_check, lidskii_check
from .matrix_spectra import (Hermitian, Projection, bv_max_trace, compression_min_eigenvalue,
                             random_hermitian, spectral_distribution,
                             spectral_projection_by_index)
from .measures import (CompactMeasure, cdf_from_quantile, cdf_of, discretize,
                       partial_quantile_integral, quantile_of, random_mixed_measure,
                       semicircle, uniform)
from .minmax_verifier import (coordinate_wielandt_oracle, verify_conditional_min,
                              verify_courant_fischer, verify_kyfan, verify_wielandt)
from .projection_lattice import (CertificateError, complete_orthogonal_family, haar_bases,
                                 matched_families, meet, random_projection)
from .reports import _jsonable

THREADS_ENV = "SPECTRAL_MINMAX_THREADS"
SEMICIRCLE_HALF_INTEGRAL = -4.0 / (3.0 * math.pi)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: dict = field(default_factory=dict)
    elapsed: float = 0.0
    time_limit: float | None = None

    @property
    def within_time(self) -> bool:
        return self.time_limit is None or self.elapsed < self.time_limit

    def to_dict(self) -> dict:
        # elapsed time is kept out so reports are byte-identical across runs
        return _jsonable({"criterion": self.number, "title": self.title,
                          "passed": self.passed, "summary": self.summary})


def _rng(seed, *stream):
    return np.random.default_rng([int(seed), *stream])


def kyfan_ensemble(seed: int, count: int = 50) -> list[Hermitian]:
    return [random_hermitian(2 + i % 7, [int(seed), 100, i]) for i in range(count)]


# -- criteria ---------------------------------------------------------------

def criterion_kyfan(seed: int, total_samples: int = 10_000) -> dict:
    worst_margin, worst_witness, worst_oracle, failures, checks = math.inf, 0.0, 0.0, [], 0
    unexplained, equality_failures = 0, 0
    for idx, a in enumerate(kyfan_ensemble(seed)):
        n = a.dim
        for j in range(1, n + 1):
            per_rank = math.ceil(total_samples / (n - j + 1))
            rep = verify_kyfan(a, j, trials=per_rank, seed=seed + idx)
            checks += 1
            worst_margin = min(worst_margin, rep.margin)
            worst_witness = max(worst_witness, abs(rep.details["witness_value"] - rep.exact_value))
            worst_oracle = max(worst_oracle, abs(rep.details["exhaustive_min"] - rep.details["true_min"]))
            if not rep.passed:
                failures.append(f"matrix {idx}, j={j}")
                nxt = rep.details["next_eigenvalue"]
                unexplained += int(nxt is None or nxt >= 0)
            eq = verify_kyfan(a, j, trials=total_samples // 10, seed=seed + idx, equality=True)
            equality_failures += int(not eq.passed)
    ok = not failures and worst_margin >= -1e-9 and worst_witness <= 1e-10 and worst_oracle <= 1e-10
    return {"passed": ok, "checks": checks, "worst_margin": worst_margin,
            "worst_witness_error": worst_witness, "worst_exhaustive_gap": worst_oracle,
            "failure_count": len(failures), "failures": failures[:5],
            "failures_with_nonnegative_next_eigenvalue": unexplained,
            "rank_equal_j_failures": equality_failures}


def criterion_bv(seed: int, thresholds: int = 20, samples: int = 1000) -> dict:
    witness_worst, violations_missed, checks = math.inf, 0, 0
    value_err = 0.0
    for idx, a in enumerate(kyfan_ensemble(seed)):
        n = a.dim
        lam, vec = a.eig
        rng = _rng(seed, 200, idx)
        ts = list(lam) + list(rng.uniform(lam[0] - 0.5, lam[-1] + 0.5, size=thresholds - n))
        for t in ts[:thresholds]:
            checks += 1
            value, witness = bv_max_trace(a, t)
            count = int(np.sum(lam >= t))
            value_err = max(value_err, abs(value - count / n), abs(value - witness.trace))
            if witness.rank:
                witness_worst = min(witness_worst, float(compression_min_eigenvalue(a, witness.basis)) - t)
            for k in range(witness.rank + 1, n + 1):
                per_rank = math.ceil(samples / (n - witness.rank))
                frames = haar_bases(rng, per_rank, n, k)
                mins = compression_min_eigenvalue(a, frames)
                violations_missed += int(np.sum(mins >= t - 1e-9))
    ok = witness_worst >= -1e-9 and violations_missed == 0 and value_err <= 1e-12
    return {"passed": ok, "thresholds_checked": checks, "worst_witness_slack": witness_worst,
            "larger_projections_satisfying_constraint": violations_missed,
            "value_error": value_err}


def criterion_cf(seed: int, outer: int = 200, inner: int = 20) -> dict:
    worst, failures, checks = math.inf, [], 0
    for n in range(3, 9):
        a = random_hermitian(n, [int(seed), 300, n])
        for i in range(1, n + 1):
            for j in range(1, n - i + 2):
                rep = verify_courant_fischer(a, i, j, outer, inner, seed=seed + n)
                checks += 1
                worst = min(worst, rep.margin)
                if not rep.passed:
                    failures.append(f"n={n}, i={i}, j={j}")
    return {"passed": not failures and worst >= -1e-9, "pairs": checks,
            "outer_trials": outer, "worst_margin": worst, "failures": failures}


WIELANDT_CONFIGS = {
    4: [[(0, 1), (2, 3)], [(1, 2), (3, 4)]],
    6: [[(1, 2), (4, 5)], [(0, 2), (3, 5)]],
    8: [[(1, 3), (5, 6)], [(2, 4), (4, 7)], [(0, 2), (3, 5), (6, 8)]],
}


def criterion_wielandt(seed: int, outer: int = 100, inner: int = 200) -> dict:
    worst, oracle_gap, failures, runs = math.inf, 0.0, [], 0
    for n, configs in WIELANDT_CONFIGS.items():
        a = random_hermitian(n, [int(seed), 400, n])
        for ivs in configs:
            rep = verify_wielandt(a, ivs, outer, inner, seed=seed + n)
            runs += 1
            worst = min(worst, rep.margin)
            if n <= 6:
                gap = abs(coordinate_wielandt_oracle(np.linalg.eigvalsh(a.entries), ivs) - rep.exact_value)
                oracle_gap = max(oracle_gap, gap)
            if not rep.passed:
                failures.append(f"n={n}, intervals={ivs}")
    ok = not failures and worst >= -1e-9 and oracle_gap <= 1e-10
    return {"passed": ok, "configurations": runs, "chains_per_configuration": outer,
            "worst_margin": worst, "oracle_gap": oracle_gap, "failures": failures}


def _nested_instance(rng, n, k):
    """Descending spectral projections r_j of a random Hermitian and ranks meeting the hypotheses."""
    a = random_hermitian(n, rng)
    while True:
        ranks = [int(x) for x in rng.integers(1, 3, size=k)]
        if sum(ranks) <= n:
            break
    los = sorted(int(x) for x in rng.integers(0, n - sum(ranks) + 1, size=k))
    r = [spectral_projection_by_index(a, lo + sum(ranks[:j]), n) for j, lo in enumerate(los)]
    return r, ranks


def _orthogonal_below(rng, r, ranks):
    """Mutually orthogonal q'_j <= r_j, built from the last index down."""
    qs = [None] * len(ranks)
    used = np.zeros((r[0].dim, 0), dtype=complex)
    for j in reversed(range(len(ranks))):
        b = r[j].basis
        b = b - used @ (used.conj().T @ b)
        u, _, _ = np.linalg.svd(b, full_matrices=False)
        free = u[:, : r[j].rank - used.shape[1]]
        g = haar_bases(rng, 1, free.shape[1], ranks[j])[0]
        qs[j] = Projection(free @ g)
        used = np.hstack([used, qs[j].basis])
    return qs


def criterion_projection_algebra(seed: int, pairs: int = 1000, instances: int = 100) -> dict:
    rng = _rng(seed, 500)
    kaplansky_failures = 0
    for _ in range(pairs):
        n = int(rng.integers(2, 9))
        r = random_projection(n, int(rng.integers(0, n + 1)), rng)
        e = random_projection(n, int(rng.integers(0, n + 1)), rng)
        if meet(r, e.complement()).rank < r.rank - e.rank:
            kaplansky_failures += 1

    cof_ok = cof_raised = 0
    for _ in range(instances):
        n = int(rng.integers(4, 9))
        k = int(rng.integers(1, 4))
        r, ranks = _nested_instance(rng, n, k)
        qp = _orthogonal_below(rng, r[:-1], ranks[:-1]) if k > 1 else []
        try:
            complete_orthogonal_family(r, qp, ranks)
            cof_ok += 1
        except CertificateError:
            pass
        bad = list(ranks)
        bad[-1] += r[-1].rank - sum(ranks[-1:]) + 1
        try:
            complete_orthogonal_family(r, qp, bad)
        except CertificateError:
            cof_raised += 1

    mf_ok = mf_raised = 0
    for t in range(instances):
        n = int(rng.integers(4, 9))
        k = int(rng.integers(1, 4))
        a = random_hermitian(n, rng)
        # disjoint ascending eigenvalue index ranges
        while True:
            sizes = [int(x) for x in rng.integers(1, 3, size=k)]
            if sum(sizes) <= n:
                break
        cuts = sorted(int(x) for x in rng.integers(0, n - sum(sizes) + 1, size=k))
        ivs, offset = [], 0
        for c, s in zip(cuts, sizes):
            ivs.append((c + offset, c + offset + s))
            offset += s
        r = [spectral_projection_by_index(a, lo, n) for lo, _ in ivs]
        u = haar_bases(rng, 1, n, n)[0]
        ranks, prev = [], 0
        for _, hi in ivs:
            prev = int(rng.integers(max(hi, prev), n + 1))
            ranks.append(prev)
        p = [Projection(u[:, :kk]) for kk in ranks]
        try:
            matched_families(p, r, sizes)
            mf_ok += 1
        except CertificateError:
            pass
        # cap the chain at hi_k - 1: only rank(p_k) + rank(r_k) - n >= size_k breaks, by one
        cap = ivs[-1][1] - 1
        p_bad = [Projection(u[:, :min(kk, cap)]) for kk in ranks]
        try:
            matched_families(p_bad, r, sizes)
        except CertificateError:
            mf_raised += 1

    ok = (kaplansky_failures == 0 and cof_ok == instances and cof_raised == instances
          and mf_ok == instances and mf_raised == instances)
    return {"passed": ok, "kaplansky_pairs": pairs, "kaplansky_failures": kaplansky_failures,
            "complete_family_feasible_ok": cof_ok, "complete_family_infeasible_rejected": cof_raised,
            "matched_families_feasible_ok": mf_ok, "matched_families_infeasible_rejected": mf_raised,
            "instances": instances}


def criterion_lidskii(seed: int, pairs: int = 200, n: int = 8) -> dict:
    worst, trace_gap, failures = math.inf, 0.0, 0
    for t in range(pairs):
        a = random_hermitian(n, [int(seed), 600, t, 0])
        b = random_hermitian(n, [int(seed), 600, t, 1])
        rep = lidskii_check(a, b)
        worst = min(worst, rep.margin)
        trace_gap = max(trace_gap, rep.details["trace_gap"], rep.details["total_integral_gap"])
        failures += not rep.passed
    return {"passed": failures == 0 and trace_gap <= 1e-10, "pairs": pairs,
            "worst_margin": worst, "worst_total_gap": trace_gap, "failures": failures}


def criterion_domination(seed: int, pairs: int = 200, indefinite: int = 20) -> dict:
    worst, failures, gated = math.inf, 0, 0
    for t in range(pairs):
        rng = _rng(seed, 700, t)
        n = int(rng.integers(2, 9))
        a = random_hermitian(n, rng)
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        rep = domination_check(a, Hermitian(a.entries + np.outer(c, c.conj())))
        worst = min(worst, rep.margin)
        failures += rep.status != "pass"
    for t in range(indefinite):
        rng = _rng(seed, 701, t)
        n = int(rng.integers(2, 9))
        a = random_hermitian(n, rng)
        u = haar_bases(rng, 1, n, n)[0]
        signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        rep = domination_check(a, Hermitian(a.entries + (u * signs) @ u.conj().T))
        gated += rep.status == "hypothesis-not-met"
    return {"passed": failures == 0 and gated == indefinite and worst >= -1e-9,
            "psd_pairs": pairs, "worst_margin": worst, "failures": failures,
            "indefinite_pairs": indefinite, "gated": gated}


def _measure_invariants(mu: CompactMeasure, rng) -> dict:
    cdf = cdf_of(mu)
    q = quantile_of(cdf)
    alpha, beta = mu.support
    atoms = {c for c, _ in mu.atoms}
    grid = np.concatenate([rng.uniform(alpha - 1.0, beta + 1.0, size=1000), cdf.t])
    grid = np.array([t for t in grid if t not in atoms])
    round_trip = float(np.max(np.abs(cdf_from_quantile(q, grid) - cdf(grid))))
    total = abs(partial_quantile_integral(q, 0.0, 1.0) - mu.mean())
    s = np.sort(np.concatenate([rng.uniform(0, 1, size=1000), q.s[:-1]]))
    xs = q(s)
    t_sorted = np.sort(grid)
    monotone = bool(np.all(np.diff(xs) >= 0) and np.all(np.diff(cdf(t_sorted)) >= -1e-12))
    in_range = bool(np.min(q.t0) >= alpha and np.max(q.t1) <= beta)
    return {"round_trip": round_trip, "total": total, "monotone": monotone, "in_range": in_range}


def _kyfan_and_friends_matrices(seed: int) -> list[Hermitian]:
    mats = kyfan_ensemble(seed)
    mats += [random_hermitian(n, [int(seed), 300, n]) for n in range(3, 9)]
    mats += [random_hermitian(n, [int(seed), 400, n]) for n in WIELANDT_CONFIGS]
    for t in range(200):
        mats.append(random_hermitian(8, [int(seed), 600, t, 0]))
        mats.append(random_hermitian(8, [int(seed), 600, t, 1]))
    return mats


def semicircle_convergence(panels: int = 4096, ns=(64, 128, 256)) -> dict:
    sc = semicircle(panels=panels)

    def err(n):
        q = quantile_of(cdf_of(discretize(sc, n)))
        return abs(partial_quantile_integral(q, 0.0, 0.5) - SEMICIRCLE_HALF_INTEGRAL)

    errors = {n: err(n) for n in sorted(set(ns) | {2 * n for n in ns} | {4096})}
    halving = all(errors[2 * n] <= 0.5 * errors[n] for n in ns)
    return {"errors": {str(k): v for k, v in errors.items()}, "halving": halving,
            "error_at_4096": errors[4096]}


def criterion_measures(seed: int, random_measures: int = 50) -> dict:
    rng = _rng(seed, 800)
    measures = [("uniform", uniform()), ("semicircle", semicircle(panels=4096))]
    measures += [(f"spectrum[{i}]", spectral_distribution(a))
                 for i, a in enumerate(_kyfan_and_friends_matrices(seed))]
    measures += [(f"random[{i}]", random_mixed_measure([int(seed), 801, i]))
                 for i in range(random_measures)]
    worst = {"round_trip": 0.0, "total": 0.0}
    bad = []
    for name, mu in measures:
        res = _measure_invariants(mu, rng)
        worst["round_trip"] = max(worst["round_trip"], res["round_trip"])
        worst["total"] = max(worst["total"], res["total"])
        if not (res["monotone"] and res["in_range"] and res["round_trip"] <= 1e-10
                and res["total"] <= 1e-10):
            bad.append(name)
    conv = semicircle_convergence()
    ok = not bad and conv["halving"] and conv["error_at_4096"] <= 1e-4
    return {"passed": ok, "measures": len(measures), "worst_round_trip": worst["round_trip"],
            "worst_total_integral": worst["total"], "failures": bad[:5], "semicircle": conv}


def _seeded_reports(seed: int) -> str:
    a, b = random_hermitian(6, [seed, 900]), random_hermitian(6, [seed, 901])
    lam = a.eigenvalues
    reports = [
        verify_kyfan(a, 3, trials=200, seed=seed),
        verify_conditional_min(a, lam[1], lam[3], trials=200, seed=seed),
        verify_courant_fischer(a, 2, 3, outer_trials=20, inner_trials=20, seed=seed),
        verify_wielandt(a, [(0, 2), (3, 5)], outer_trials=20, inner_trials=50, seed=seed),
        lidskii_check(a, b),
        domination_check(a, Hermitian(a.entries + b.entries @ b.entries)),
    ]
    return "\n".join(r.to_json() for r in reports)


def criterion_determinism(seed: int) -> dict:
    first, second = _seeded_reports(seed), _seeded_reports(seed)
    return {"passed": first == second, "compared_bytes": len(first)}


CRITERIA: list[tuple[int, str, Callable[[int], dict], float | None]] = [
    (1, "Ky Fan minimum over projections", criterion_kyfan, 60.0),
    (2, "Bercovici-Voiculescu maximal trace", criterion_bv, 30.0),
    (3, "Courant-Fischer-Weyl sup-inf", criterion_cf, 120.0),
    (4, "Wielandt min-max", criterion_wielandt, 120.0),
    (5, "projection algebra constructions", criterion_projection_algebra, None),
    (6, "Lidskii majorization", criterion_lidskii, None),
    (7, "domination of sorted spectra", criterion_domination, None),
    (8, "quantile construction and change of variable", criterion_measures, None),
    (9, "determinism of reports", criterion_determinism, None),
]


def run_criterion(number: int, seed: int) -> CriterionResult:
    num, title, fn, limit = CRITERIA[number - 1]
    start = time.perf_counter()
    summary = fn(seed)
    elapsed = time.perf_counter() - start
    passed = bool(summary.pop("passed"))
    return CriterionResult(num, title, passed, summary, elapsed, limit)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_suite(seed: int, criteria=None, workers: int | None = None) -> list[CriterionResult]:
    numbers = list(criteria) if criteria else [c[0] for c in CRITERIA]
    workers = workers or worker_count()
    if workers == 1:
        return [run_criterion(k, seed) for k in numbers]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda k: run_criterion(k, seed), numbers))


def suite_json(seed: int, results: list[CriterionResult]) -> str:
    return json.dumps({"seed": seed, "criteria": [r.to_dict() for r in results],
                       "all_passed": all(r.passed for r in results)}, indent=2, sort_keys=True)


def format_table(results: list[CriterionResult]) -> str:
    lines = [f"{'#':>2}  {'criterion':<46} {'result':<6} {'time':>8}  limit"]
    for r in results:
        limit = f"{r.time_limit:.0f}s" if r.time_limit else "-"
        status = "PASS" if r.passed and r.within_time else "FAIL"
        lines.append(f"{r.number:>2}  {r.title:<46} {status:<6} {r.elapsed:7.2f}s  {limit}")
    return "\n".join(lines)
