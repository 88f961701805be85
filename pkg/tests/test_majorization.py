import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_minmax.majorization import (add_quantiles, domination_check, lidskii_check,
                                          majorizes)
from spectral_minmax.matrix_spectra import Hermitian, random_hermitian
from spectral_minmax.measures import (CompactMeasure, Quantile, discretize, quantile_of_measure,
                                      semicircle, uniform)
from spectral_minmax.reports import HYPOTHESIS_NOT_MET, PASS


def steps(*values):
    return Quantile.from_values(sorted(values))


def test_constant_majorized_by_spread():
    # equal means; the flatter quantile is majorized by the spread one
    assert majorizes(steps(1, 1), steps(0, 2))
    assert not majorizes(steps(0, 2), steps(1, 1))


def test_unequal_totals_fail():
    res = majorizes(steps(0, 1), steps(0, 2))
    assert not res.holds
    assert res.total_gap == pytest.approx(0.5)


def test_reflexive():
    q = quantile_of_measure(semicircle(panels=256))
    assert majorizes(q, q)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_preorder_transitive(seed):
    # averaging by doubly stochastic steps yields a majorization chain
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(6)
    y = 0.5 * (z + z[rng.permutation(6)])
    x = 0.5 * (y + y[rng.permutation(6)])
    qx, qy, qz = steps(*x), steps(*y), steps(*z)
    assert majorizes(qx, qy) and majorizes(qy, qz)
    assert majorizes(qx, qz)


def test_curved_pieces_probed_inside_gaps():
    # sqrt quantile against a step of the same mean
    q = quantile_of_measure(CompactMeasure(segments=((0.0, 1.0, 0.0, 2.0),)))
    flat = steps(2 / 3)
    assert majorizes(flat, q)
    assert not majorizes(q, flat)


def test_point_mass_majorized_by_continuous():
    # semicircle and uniform on [-sqrt 3, sqrt 3] share mean 0 and variance 1;
    # each majorizes the point mass at the mean
    sc = quantile_of_measure(semicircle(panels=512))
    point = steps(0.0)
    assert majorizes(point, sc)
    assert majorizes(point, quantile_of_measure(uniform(-3 ** 0.5, 3 ** 0.5)))


# -- Lidskii ----------------------------------------------------------------

@pytest.mark.parametrize("seed", range(30))
def test_lidskii_random(seed):
    a, b = random_hermitian(8, [seed, 0]), random_hermitian(8, [seed, 1])
    rep = lidskii_check(a, b)
    assert rep.status == PASS
    assert rep.details["trace_gap"] <= 1e-10
    assert rep.details["total_integral_gap"] <= 1e-10


def test_lidskii_commuting_is_tight_at_total():
    a = Hermitian(np.diag([1.0, 2.0, 3.0]))
    rep = lidskii_check(a, a)
    assert rep.passed and rep.margin == pytest.approx(0.0, abs=1e-14)


def test_lidskii_dimension_mismatch():
    with pytest.raises(ValueError):
        lidskii_check(random_hermitian(3, 0), random_hermitian(4, 0))


# -- domination -------------------------------------------------------------

@pytest.mark.parametrize("seed", range(30))
def test_domination_rank_one(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(7, [seed, 3])
    c = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    rep = domination_check(a, Hermitian(a.entries + np.outer(c, c.conj())))
    assert rep.status == PASS and rep.margin >= -1e-9


def test_domination_indefinite_gate():
    a = random_hermitian(5, 0)
    b = Hermitian(a.entries + np.diag([1.0, -1.0, 0.0, 0.0, 0.0]))
    assert domination_check(a, b).status == HYPOTHESIS_NOT_MET


def test_domination_direction():
    # only b - a >= 0 is admissible; swapping the roles breaks the hypothesis
    a = Hermitian(np.diag([0.0, 1.0]))
    b = Hermitian(np.diag([1.0, 1.0]))
    assert domination_check(a, b).status == PASS
    assert domination_check(b, a).status == HYPOTHESIS_NOT_MET


def test_continuous_domination_by_discretization():
    # mu shifted right by 0.3 dominates mu; check the quantile ordering on a 1024 grid
    base = semicircle(panels=1024)
    shifted = CompactMeasure(segments=tuple((lo + 0.3, hi + 0.3, dl, dh)
                                            for lo, hi, dl, dh in base.segments))
    xa = quantile_of_measure(discretize(base, 1024))
    xb = quantile_of_measure(discretize(shifted, 1024))
    s = (np.arange(1024) + 0.5) / 1024
    assert np.all(xb(s) - xa(s) >= 0.3 - 1e-9)


def test_quantile_sum_integral():
    x, y = steps(0, 1, 2), steps(5, 6, 7)
    total = add_quantiles(x, y)
    assert total.integral(0, 1) == pytest.approx(7.0)
    assert total(0.5) == pytest.approx(7.0)
    assert total.is_step
