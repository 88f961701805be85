"""Lattice operations on projections and constructive orthogonal-family algorithms.

All projections are handled through orthonormal bases of their ranges, so
joins, meets and differences reduce to singular value decompositions.
Traces live on the lattice ``{0, 1/n, ..., 1}``; every target is given as an
integer rank.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .matrix_spectra import Projection, orthonormal_range

ORDER_TOL = 1e-9


class OrderingError(ValueError):
    """A required order relation ``p <= q`` (or a rank bound) does not hold."""


class CertificateError(ValueError):
    """The rank hypotheses of a family construction are infeasible, or its output failed self-checks."""


def _rank_tol(n: int) -> float:
    return 1e-8 * n


def _same_dim(*ps: Projection) -> int:
    dims = {p.dim for p in ps}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def leq_defect(p: Projection, q: Projection) -> float:
    """``||(1 - q) p||``; zero exactly when ``p <= q``."""
    if p.rank == 0:
        return 0.0
    b = p.basis
    residual = b - q.basis @ (q.basis.conj().T @ b)
    return float(np.linalg.norm(residual, 2))


def is_leq(p: Projection, q: Projection, tol: float = ORDER_TOL) -> bool:
    return leq_defect(p, q) < tol


def orthogonality_defect(p: Projection, q: Projection) -> float:
    if p.rank == 0 or q.rank == 0:
        return 0.0
    return float(np.linalg.norm(p.basis.conj().T @ q.basis, 2))


def join(p: Projection, q: Projection) -> Projection:
    """Projection onto ``range(p) + range(q)``."""
    n = _same_dim(p, q)
    return Projection(orthonormal_range(np.hstack([p.basis, q.basis]), _rank_tol(n)))


def meet(p: Projection, q: Projection) -> Projection:
    """Projection onto ``range(p) & range(q)``."""
    n = _same_dim(p, q)
    if p.rank == 0 or q.rank == 0:
        return Projection.zero(n)
    b = p.basis
    # x = B u lies in range(q) iff (1 - q) B u = 0
    resid = b - q.basis @ (q.basis.conj().T @ b)
    _, sv, vh = np.linalg.svd(resid, full_matrices=True)
    sv = np.concatenate([sv, np.zeros(b.shape[1] - len(sv))])
    null = vh.conj().T[:, sv < _rank_tol(n)]
    return Projection(orthonormal_range(b @ null, _rank_tol(n)))


def orthogonal_sum(ps: Sequence[Projection]) -> Projection:
    """Sum of mutually orthogonal projections."""
    n = _same_dim(*ps)
    return Projection(orthonormal_range(np.hstack([p.basis for p in ps]), _rank_tol(n)))


def difference(f: Projection, e: Projection) -> Projection:
    """``f - e`` for ``e <= f``: the part of ``range(f)`` orthogonal to ``range(e)``."""
    if not is_leq(e, f):
        raise OrderingError(f"difference needs e <= f (defect {leq_defect(e, f):.3e})")
    return _extend(Projection.zero(f.dim), f, e, f.rank - e.rank)


def _extend(e: Projection, r: Projection, avoid: Projection, count: int) -> Projection:
    """Append to ``e`` the ``count`` leading directions of ``range(r)`` orthogonal to ``avoid``."""
    if count == 0:
        return Projection(e.basis)
    b = r.basis
    if avoid.rank:
        b = b - avoid.basis @ (avoid.basis.conj().T @ b)
    u, sv, _ = np.linalg.svd(b, full_matrices=False)
    if len(sv) < count or sv[count - 1] < 0.5:
        raise OrderingError(f"range too small: need {count} new directions, found "
                            f"{int(np.sum(sv >= 0.5))}")
    return Projection(orthonormal_range(np.hstack([e.basis, u[:, :count]]), _rank_tol(r.dim)))


# -- sampling ---------------------------------------------------------------

def haar_bases(rng: np.random.Generator, count: int, n: int, k: int) -> np.ndarray:
    """``count`` orthonormal ``n x k`` frames from QR of complex Gaussians, shape ``(count, n, k)``."""
    if k == 0:
        return np.zeros((count, n, 0), dtype=complex)
    g = rng.standard_normal((count, n, k)) + 1j * rng.standard_normal((count, n, k))
    q, r = np.linalg.qr(g)
    # fix the phase of the QR factor so the frame is Haar distributed
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def random_projection(n: int, k: int, seed) -> Projection:
    """Rank-``k`` projection from ``k`` orthonormalized Gaussian columns; reproducible per seed."""
    if not 0 <= k <= n:
        raise ValueError(f"rank {k} outside [0, {n}]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return Projection(haar_bases(rng, 1, n, k)[0])


def random_subprojection_bases(r: Projection, k: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` random rank-``k`` frames inside ``range(r)``."""
    if k > r.rank:
        raise ValueError(f"rank {k} exceeds rank of ambient projection {r.rank}")
    return r.basis @ haar_bases(rng, count, r.rank, k)


# -- constructive algorithms ------------------------------------------------

def interpolate_projection(e: Projection, r: Projection, target_rank: int) -> Projection:
    """A projection ``f`` with ``e <= f <= r`` and ``rank(f) = target_rank``.

    ``range(e)`` is extended by the leading singular directions of the part
    of ``range(r)`` orthogonal to ``range(e)``.
    """
    _same_dim(e, r)
    defect = leq_defect(e, r)
    if defect >= ORDER_TOL:
        raise OrderingError(f"interpolate_projection needs e <= r; ||(1-r)e|| = {defect:.3e}")
    if not e.rank <= target_rank <= r.rank:
        raise OrderingError(
            f"interpolate_projection needs rank(e)={e.rank} <= target={target_rank} <= rank(r)={r.rank}")
    if target_rank == r.rank:
        return Projection(r.basis)
    return _extend(e, r, e, target_rank - e.rank)


def _check_family(qs, bounds, ranks, label):
    for j, (q, b, k) in enumerate(zip(qs, bounds, ranks)):
        q.check(1e-9)
        if q.rank != k:
            raise CertificateError(f"{label}[{j}] has rank {q.rank}, expected {k}")
        if not is_leq(q, b):
            raise CertificateError(f"{label}[{j}] is not below its bound "
                                   f"(defect {leq_defect(q, b):.3e})")
    for i in range(len(qs)):
        for j in range(i + 1, len(qs)):
            d = orthogonality_defect(qs[i], qs[j])
            if d >= ORDER_TOL:
                raise CertificateError(f"{label}[{i}] and {label}[{j}] are not orthogonal ({d:.3e})")


def complete_orthogonal_family(r: Sequence[Projection], q_prime: Sequence[Projection],
                               target_ranks: Sequence[int]) -> list[Projection]:
    """Mutually orthogonal ``q_j <= r_j`` of the target ranks whose sum dominates ``sum q'_j``.

    ``r`` is descending, ``q_prime`` holds ``k - 1`` mutually orthogonal
    projections with ``q'_j <= r_j`` and ``rank(q'_j) = target_ranks[j]``, and
    ``rank(r_j) >= target_ranks[j] + ... + target_ranks[k-1]``.  The family is
    built by induction on ``k``: solve the problem for ``r_2..r_k``, join the
    result with ``q'_1``, pad inside ``r_1`` to the full rank and take the
    new piece as ``q_1``.
    """
    k = len(r)
    if k == 0:
        raise CertificateError("need at least one projection r_1")
    if len(target_ranks) != k:
        raise CertificateError(f"{len(target_ranks)} target ranks for {k} projections")
    if len(q_prime) != k - 1:
        raise CertificateError(f"need {k - 1} projections q', got {len(q_prime)}")
    _same_dim(*r, *q_prime)
    ranks = [int(t) for t in target_ranks]
    if any(t < 0 for t in ranks):
        raise CertificateError("target ranks must be non-negative")
    for j in range(k):
        need = sum(ranks[j:])
        if r[j].rank < need:
            raise CertificateError(
                f"rank(r_{j + 1}) = {r[j].rank} < {need} = sum of target ranks {j + 1}..{k}")
    for j in range(k - 1):
        if not is_leq(r[j + 1], r[j]):
            raise CertificateError(f"r_{j + 2} <= r_{j + 1} fails")
        if q_prime[j].rank != ranks[j]:
            raise CertificateError(f"rank(q'_{j + 1}) = {q_prime[j].rank} != target {ranks[j]}")
        if not is_leq(q_prime[j], r[j]):
            raise CertificateError(f"q'_{j + 1} <= r_{j + 1} fails")
        for i in range(j):
            if orthogonality_defect(q_prime[i], q_prime[j]) >= ORDER_TOL:
                raise CertificateError(f"q'_{i + 1} and q'_{j + 1} are not orthogonal")

    qs = _complete(list(r), list(q_prime), ranks)

    _check_family(qs, r, ranks, "q")
    if q_prime:
        total = orthogonal_sum(qs)
        dominated = orthogonal_sum(q_prime)
        if not is_leq(dominated, total):
            raise CertificateError("sum q_j does not dominate sum q'_j")
    return qs


def _complete(r, q_prime, ranks):
    if len(r) == 1:
        return [interpolate_projection(Projection.zero(r[0].dim), r[0], ranks[0])]
    tail = _complete(r[1:], q_prime[1:], ranks[1:])
    e2 = orthogonal_sum(tail)
    e = join(e2, q_prime[0])
    f = interpolate_projection(e, r[0], sum(ranks))
    return [difference(f, e2)] + tail


def matched_families(p: Sequence[Projection], r: Sequence[Projection],
                     target_ranks: Sequence[int]) -> tuple[list[Projection], list[Projection]]:
    """Orthogonal families ``q_j <= r_j`` and ``qt_j <= p_j`` with equal sums.

    ``p`` ascends, ``r`` descends.  Feasibility is the chain of meet bounds
    ``rank(p_m) + rank(r_j) - n >= target_ranks[j] + ... + target_ranks[m]``
    for all ``j <= m``; each follows from the rank inequality
    ``rank(r & (1 - e)) >= rank(r) - rank(e)`` applied to ``r_j & p_m``.
    Built by induction on ``k``: the families for ``k - 1`` are completed
    inside ``l_j = r_j & p_k`` and the new piece becomes ``qt_k``.
    """
    k = len(p)
    if k == 0 or len(r) != k or len(target_ranks) != k:
        raise CertificateError("p, r and target_ranks must have the same positive length")
    n = _same_dim(*p, *r)
    ranks = [int(t) for t in target_ranks]
    if any(t < 0 for t in ranks):
        raise CertificateError("target ranks must be non-negative")
    for j in range(k - 1):
        if not is_leq(p[j], p[j + 1]):
            raise CertificateError(f"p_{j + 1} <= p_{j + 2} fails")
        if not is_leq(r[j + 1], r[j]):
            raise CertificateError(f"r_{j + 2} <= r_{j + 1} fails")
    for m in range(k):
        for j in range(m + 1):
            bound = p[m].rank + r[j].rank - n
            need = sum(ranks[j:m + 1])
            if bound < need:
                raise CertificateError(
                    f"rank(p_{m + 1}) + rank(r_{j + 1}) - n = {bound} < {need} "
                    f"= sum of target ranks {j + 1}..{m + 1}")

    qs, qts = _matched(list(p), list(r), ranks)

    _check_family(qs, r, ranks, "q")
    _check_family(qts, p, ranks, "qt")
    gap = np.max(np.abs(orthogonal_sum(qs).matrix - orthogonal_sum(qts).matrix))
    if gap >= 1e-8:
        raise CertificateError(f"family sums differ by {gap:.3e}")
    return qs, qts


def _matched(p, r, ranks):
    if len(p) == 1:
        ell = meet(p[0], r[0])
        if ell.rank < ranks[0]:
            raise CertificateError(f"rank(p_1 & r_1) = {ell.rank} < {ranks[0]}")
        q = interpolate_projection(Projection.zero(p[0].dim), ell, ranks[0])
        return [q], [Projection(q.basis)]
    q_prev, qt_prev = _matched(p[:-1], r[:-1], ranks[:-1])
    ells = [meet(rj, p[-1]) for rj in r]
    for j, ell in enumerate(ells):
        need = sum(ranks[j:])
        if ell.rank < need:
            raise CertificateError(
                f"rank(r_{j + 1} & p_{len(p)}) = {ell.rank} < {need}")
    qs = _complete(ells, q_prev, ranks)
    e_prime = orthogonal_sum(q_prev)
    new = difference(orthogonal_sum(qs), e_prime)
    return qs, qt_prev + [new]
