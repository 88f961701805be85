import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_minmax.matrix_spectra import (Projection, random_hermitian,
                                            spectral_projection_by_index)
from spectral_minmax.projection_lattice import (CertificateError, OrderingError,
                                                complete_orthogonal_family, difference,
                                                haar_bases, interpolate_projection, is_leq, join,
                                                leq_defect, matched_families, meet,
                                                orthogonal_sum, orthogonality_defect,
                                                random_projection)
from spectral_minmax.suite import _nested_instance, _orthogonal_below


def coord(n, *idx):
    return Projection(np.eye(n)[:, list(idx)])


def assert_family(qs, bounds, ranks):
    for q, b, k in zip(qs, bounds, ranks):
        q.check(1e-9)
        assert q.rank == k
        assert leq_defect(q, b) < 1e-9
    for i in range(len(qs)):
        for j in range(i + 1, len(qs)):
            assert orthogonality_defect(qs[i], qs[j]) < 1e-9


# -- join and meet ----------------------------------------------------------

def test_join_examples():
    p, q = coord(4, 0), coord(4, 2)
    np.testing.assert_allclose(join(p, q).matrix, p.matrix + q.matrix, atol=1e-12)
    r = random_projection(4, 2, 0)
    np.testing.assert_allclose(join(r, r).matrix, r.matrix, atol=1e-12)
    a, b = random_projection(2, 1, 1), random_projection(2, 1, 2)
    np.testing.assert_allclose(join(a, b).matrix, np.eye(2), atol=1e-12)


def test_meet_examples():
    r = random_projection(5, 3, 3)
    np.testing.assert_allclose(meet(r, r).matrix, r.matrix, atol=1e-12)
    assert meet(coord(4, 0, 1), coord(4, 2)).rank == 0
    small = Projection(r.basis[:, :1])
    np.testing.assert_allclose(meet(small, r).matrix, small.matrix, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.data())
def test_meet_join_duality(n, data):
    seed = data.draw(st.integers(0, 2**32 - 1))
    k1, k2 = data.draw(st.integers(0, n)), data.draw(st.integers(0, n))
    p, q = random_projection(n, k1, [seed, 0]), random_projection(n, k2, [seed, 1])
    dual = join(p.complement(), q.complement()).complement()
    np.testing.assert_allclose(meet(p, q).matrix, dual.matrix, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.data())
def test_generic_ranks(n, data):
    seed = data.draw(st.integers(0, 2**32 - 1))
    k1, k2 = data.draw(st.integers(0, n)), data.draw(st.integers(0, n))
    p, q = random_projection(n, k1, [seed, 0]), random_projection(n, k2, [seed, 1])
    assert join(p, q).rank == min(n, k1 + k2)
    assert meet(p, q).rank == max(0, k1 + k2 - n)
    for x in (join(p, q), meet(p, q)):
        x.check()
    assert is_leq(meet(p, q), p) and is_leq(p, join(p, q))


def test_meet_nontrivial_intersection():
    # share a common 2-dimensional subspace inside 6 dimensions
    rng = np.random.default_rng(5)
    u = haar_bases(rng, 1, 6, 6)[0]
    p = Projection(u[:, [0, 1, 2]])
    q = Projection(u[:, [0, 1, 4, 5]])
    m = meet(p, q)
    assert m.rank == 2
    np.testing.assert_allclose(m.matrix, Projection(u[:, [0, 1]]).matrix, atol=1e-10)


def test_kaplansky_bound():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        kr, ke = int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1))
        r = random_projection(n, kr, rng)
        e = random_projection(n, ke, rng)
        assert meet(r, e.complement()).rank >= r.rank - e.rank


# -- random projections -----------------------------------------------------

def test_random_projection_examples():
    assert random_projection(4, 0, 1).rank == 0
    np.testing.assert_allclose(random_projection(4, 4, 1).matrix, np.eye(4), atol=1e-12)
    p = random_projection(4, 2, 123)
    assert abs(np.trace(p.matrix).real / 4 - 0.5) < 1e-12
    np.testing.assert_array_equal(p.basis, random_projection(4, 2, 123).basis)


def test_haar_frames_orthonormal():
    frames = haar_bases(np.random.default_rng(0), 50, 7, 3)
    gram = np.swapaxes(frames.conj(), 1, 2) @ frames
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(3), gram.shape), atol=1e-12)


# -- interpolation and differences ------------------------------------------

def test_interpolate_examples():
    r = random_projection(6, 4, 0)
    e = Projection(r.basis[:, :1])
    np.testing.assert_allclose(interpolate_projection(e, r, 1).matrix, e.matrix, atol=1e-12)
    np.testing.assert_allclose(interpolate_projection(e, r, 4).matrix, r.matrix, atol=1e-12)
    f = interpolate_projection(Projection.zero(4), Projection.identity(4), 2)
    assert f.rank == 2
    f.check()


@pytest.mark.parametrize("seed", range(20))
def test_interpolate_postconditions(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    kr = int(rng.integers(1, n + 1))
    ke = int(rng.integers(0, kr + 1))
    r = random_projection(n, kr, rng)
    e = Projection(r.basis @ haar_bases(rng, 1, kr, ke)[0])
    target = int(rng.integers(ke, kr + 1))
    f = interpolate_projection(e, r, target)
    f.check()
    assert f.rank == target and is_leq(e, f) and is_leq(f, r)


def test_interpolate_ordering_errors():
    with pytest.raises(OrderingError, match="e <= r"):
        interpolate_projection(coord(3, 0), coord(3, 1), 1)
    with pytest.raises(OrderingError, match="target"):
        interpolate_projection(coord(3, 0), coord(3, 0, 1), 3)


def test_difference_and_sum():
    f, e = coord(5, 0, 1, 3), coord(5, 1)
    np.testing.assert_allclose(difference(f, e).matrix, coord(5, 0, 3).matrix, atol=1e-12)
    np.testing.assert_allclose(orthogonal_sum([coord(5, 0), coord(5, 2)]).matrix,
                               coord(5, 0, 2).matrix, atol=1e-12)


# -- orthogonal families ----------------------------------------------------

def test_complete_family_single():
    (q,) = complete_orthogonal_family([Projection.identity(4)], [], [2])
    assert q.rank == 2


def test_complete_family_two_step():
    r = [Projection.identity(4), coord(4, 0, 1, 2)]
    qp = [coord(4, 3)]
    qs = complete_orthogonal_family(r, qp, [1, 1])
    assert_family(qs, r, [1, 1])
    assert is_leq(qp[0], orthogonal_sum(qs))


@pytest.mark.parametrize("seed", range(100))
def test_complete_family_random(seed):
    rng = np.random.default_rng([seed, 77])
    n, k = 8, 3
    r, ranks = _nested_instance(rng, n, k)
    qp = _orthogonal_below(rng, r[:-1], ranks[:-1])
    qs = complete_orthogonal_family(r, qp, ranks)
    assert_family(qs, r, ranks)
    assert is_leq(orthogonal_sum(qp), orthogonal_sum(qs))


def test_complete_family_infeasible_reports():
    r = [Projection.identity(4), coord(4, 0, 1)]
    with pytest.raises(CertificateError, match="rank"):
        complete_orthogonal_family(r, [coord(4, 3)], [1, 3])


def test_complete_family_requires_qprime_below_r1():
    r = [coord(4, 0, 1, 2), coord(4, 0, 1)]
    with pytest.raises(CertificateError):
        complete_orthogonal_family(r, [coord(4, 3)], [1, 1])


def test_matched_single():
    p, r = [coord(6, 0, 1, 2, 3)], [coord(6, 2, 3, 4, 5)]
    qs, qts = matched_families(p, r, [2])
    np.testing.assert_allclose(qs[0].matrix, coord(6, 2, 3).matrix, atol=1e-12)
    np.testing.assert_allclose(qts[0].matrix, qs[0].matrix, atol=1e-12)


def test_matched_identity_chains():
    ident = Projection.identity(5)
    qs, qts = matched_families([ident] * 3, [ident] * 3, [1, 2, 2])
    assert_family(qs, [ident] * 3, [1, 2, 2])
    assert_family(qts, [ident] * 3, [1, 2, 2])


@pytest.mark.parametrize("seed", range(100))
def test_matched_spectral_chains(seed):
    rng = np.random.default_rng([seed, 91])
    n = 8
    a = random_hermitian(n, rng)
    # intervals [1,3) and [5,6) in eigenvalue index
    p = [spectral_projection_by_index(a, 0, 3), spectral_projection_by_index(a, 0, 6)]
    r = [spectral_projection_by_index(a, 1, n), spectral_projection_by_index(a, 5, n)]
    # rotate the p chain away from the eigenbasis but keep rank bounds
    u = haar_bases(rng, 1, n, n)[0]
    p_rand = [Projection(u[:, :3 + int(rng.integers(0, 2))]), Projection(u[:, :7])]
    for chain in (p, p_rand):
        qs, qts = matched_families(chain, r, [2, 1])
        assert_family(qs, r, [2, 1])
        assert_family(qts, chain, [2, 1])
        np.testing.assert_allclose(orthogonal_sum(qs).matrix, orthogonal_sum(qts).matrix, atol=1e-8)


def test_matched_infeasible_reports():
    p = [coord(6, 0), coord(6, 0, 1, 2)]
    r = [coord(6, 0, 1, 2, 3, 4, 5), coord(6, 3, 4, 5)]
    with pytest.raises(CertificateError, match="rank"):
        matched_families(p, r, [1, 1])


def test_matched_rejects_unordered_chain():
    with pytest.raises(CertificateError, match="p_1 <= p_2"):
        matched_families([coord(4, 0), coord(4, 1)], [Projection.identity(4)] * 2, [1, 1])
