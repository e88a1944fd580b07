import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import cvar_integral, mad_box_lattice, var_scan
from robustbo import checks
from robustbo.errors import InvalidArgument, MeasureHasNoQ
from robustbo.grid import EnvDist
from robustbo.measures import (BestCase, CVaR, DistRobust, Expectation, MeanAbsDev,
                               MonotoneLipschitz, ProbThreshold, StdDev, ValueAtRisk,
                               Variance, WeightedSum, WorstCase, bounds_exact,
                               bounds_sampled, exp_mae, has_q, measure_eval, q_value,
                               weighted_quantile)


# -- point values ------------------------------------------------------------

def test_basic_values():
    d = EnvDist.uniform(3)
    g = [3.0, 1.0, 2.0]
    assert measure_eval(Expectation(), g, d) == pytest.approx(2.0)
    assert measure_eval(WorstCase(), g, d) == 1.0
    assert measure_eval(BestCase(), g, d) == 3.0
    assert measure_eval(ValueAtRisk(0.5), g, d) == 2.0
    assert measure_eval(CVaR(0.5), g, d) == pytest.approx(4 / 3)
    assert measure_eval(ProbThreshold(2.0), g, d) == pytest.approx(2 / 3)


def test_dispersion_values():
    d = EnvDist([0.5, 0.5])
    assert measure_eval(MeanAbsDev(), [0.0, 2.0], d) == pytest.approx(1.0)
    assert measure_eval(Variance(), [0.0, 2.0], d) == pytest.approx(1.0)
    assert measure_eval(StdDev(), [0.0, 2.0], d) == pytest.approx(1.0)
    assert measure_eval(exp_mae(4.0), [0.0, 2.0], d) == pytest.approx(1.0 - 4.0)


def test_var_cdf_boundary_is_inclusive():
    # cumulative mass hits alpha exactly at the first atom
    d = EnvDist([0.25, 0.25, 0.5])
    assert measure_eval(ValueAtRisk(0.25), [1.0, 2.0, 3.0], d) == 1.0
    assert weighted_quantile(np.array([1.0, 2.0, 3.0]), d, 0.5) == 2.0


def test_cvar_limits():
    rng = np.random.default_rng(0)
    g = rng.normal(size=9)
    d = EnvDist(rng.dirichlet(np.ones(9)))
    assert measure_eval(CVaR(1 - 1e-12), g, d) == pytest.approx(d.expect(g), abs=1e-9)
    assert measure_eval(CVaR(1e-9), g, d) == pytest.approx(g.min(), abs=1e-6)


def test_worst_case_ignores_probabilities():
    d = EnvDist([0.0, 0.5, 0.5])
    assert measure_eval(WorstCase(), [-5.0, 1.0, 2.0], d) == -5.0


def test_row_wise_evaluation():
    d = EnvDist.uniform(2)
    G = np.array([[0.0, 2.0], [1.0, 1.0]])
    np.testing.assert_allclose(measure_eval(MeanAbsDev(), G, d), [1.0, 0.0])


def test_invalid_inputs():
    d = EnvDist.uniform(2)
    with pytest.raises(InvalidArgument):
        measure_eval(Expectation(), [0.0, np.nan], d)
    with pytest.raises(InvalidArgument):
        measure_eval(Expectation(), [0.0, 1.0, 2.0], d)
    with pytest.raises(InvalidArgument):
        bounds_exact(Expectation(), [1.0, 0.0], [0.0, 1.0], d)
    with pytest.raises(InvalidArgument):
        ValueAtRisk(1.0)
    with pytest.raises(InvalidArgument):
        CVaR(0.0)
    with pytest.raises(InvalidArgument):
        EnvDist([0.5, 0.6])
    with pytest.raises(InvalidArgument):
        weighted_quantile(np.array([1.0]), EnvDist.uniform(1), 1.5)


# -- bounds against brute force ------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_var_cvar_bounds_match_references(seed):
    rng = np.random.default_rng(seed)
    for _ in range(40):
        n = int(rng.integers(1, 8))
        p = rng.dirichlet(np.ones(n))
        l, u = checks.random_box(rng, 1, n)
        a = float(rng.uniform(0.05, 0.95))
        d = EnvDist(p)
        bv = bounds_exact(ValueAtRisk(a), l[0], u[0], d)
        assert bv.lcb == var_scan(list(l[0]), list(p), a)
        assert bv.ucb == var_scan(list(u[0]), list(p), a)
        bc = bounds_exact(CVaR(a), l[0], u[0], d)
        assert bc.lcb == pytest.approx(cvar_integral(list(l[0]), list(p), a), abs=1e-9)
        assert bc.ucb == pytest.approx(cvar_integral(list(u[0]), list(p), a), abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_mad_bounds_match_box_lattice(seed):
    rng = np.random.default_rng(100 + seed)
    for _ in range(40):
        n = int(rng.integers(1, 8))
        p = rng.dirichlet(np.ones(n))
        l, u = checks.random_box(rng, 1, n)
        b = bounds_exact(MeanAbsDev(), l[0], u[0], EnvDist(p))
        lo, hi = mad_box_lattice(l[0], u[0], p)
        assert b.lcb == pytest.approx(lo, abs=1e-9)
        assert b.ucb == pytest.approx(hi, abs=1e-9)


def test_monotone_measures_use_endpoint_values():
    rng = np.random.default_rng(7)
    d = EnvDist(rng.dirichlet(np.ones(5)))
    l, u = checks.random_box(rng, 3, 5)
    for m in (Expectation(), WorstCase(), BestCase(), ValueAtRisk(0.3), CVaR(0.3),
              ProbThreshold(0.1)):
        lo, hi = bounds_exact(m, l, u, d)
        np.testing.assert_array_equal(lo, m.evaluate(l, d))
        np.testing.assert_array_equal(hi, m.evaluate(u, d))


def test_dist_robust_single_candidate_equals_inner():
    rng = np.random.default_rng(8)
    p = rng.dirichlet(np.ones(4))
    l, u = checks.random_box(rng, 2, 4)
    dr = DistRobust((p,), CVaR(0.4))
    other = EnvDist.uniform(4)  # ignored by DistRobust
    np.testing.assert_allclose(dr.bounds(l, u, other), CVaR(0.4).bounds(l, u, EnvDist(p)))


def test_degenerate_box_gives_point_value():
    rng = np.random.default_rng(9)
    d = EnvDist(rng.dirichlet(np.ones(6)))
    g = rng.normal(size=6)
    for m in (Expectation(), MeanAbsDev(), Variance(), StdDev(), CVaR(0.2), exp_mae(2.0)):
        b = bounds_exact(m, g, g, d)
        v = measure_eval(m, g, d)
        assert b.lcb == pytest.approx(v, abs=1e-12) and b.ucb == pytest.approx(v, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_containment_property(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    d = checks.random_dist(rng, n, zeros=True)
    m = checks.random_measure(rng, n)
    l, u = checks.random_box(rng, 1, n)
    lo, hi = m.bounds(l, u, d)
    assert lo[0] <= hi[0] + 1e-12
    vals = m.evaluate(checks.random_in_box(rng, l[0], u[0], 50), d)
    assert np.all(vals >= lo[0] - 1e-9) and np.all(vals <= hi[0] + 1e-9)


def test_bounds_sampled_is_range_of_paths():
    rng = np.random.default_rng(10)
    paths = rng.normal(size=(30, 4, 5))
    d = EnvDist.uniform(5)
    b = bounds_sampled(Expectation(), paths, 2, d)
    vals = paths[:, 2, :].mean(axis=1)
    assert b.lcb == pytest.approx(vals.min()) and b.ucb == pytest.approx(vals.max())


# -- width functions ------------------------------------------------------------

def test_q_values():
    assert q_value(Expectation(), 0.3) == pytest.approx(0.3)
    assert q_value(WorstCase(), 0.3) == pytest.approx(0.3)
    assert q_value(CVaR(0.1), 0.3) == pytest.approx(0.3)
    assert q_value(MeanAbsDev(), 0.3) == pytest.approx(0.6)
    assert q_value(exp_mae(4.0), 0.5) == pytest.approx(0.5 * (1 + 2 * 4))
    lip = MonotoneLipschitz(np.tanh, 2.0, True, Expectation())
    assert q_value(lip, 1.0) == pytest.approx(2.0)
    ws = WeightedSum(2.0, Expectation(), 3.0, BestCase())
    assert q_value(ws, 1.0) == pytest.approx(5.0)
    with pytest.raises(InvalidArgument):
        q_value(Expectation(), -1.0)


@pytest.mark.parametrize("m", [StdDev(), Variance(), ProbThreshold(0.0)])
def test_q_unavailable(m):
    assert not has_q(m)
    with pytest.raises(MeasureHasNoQ):
        q_value(m, 1.0)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), kind=st.sampled_from(checks.Q_MEASURES))
def test_width_bounded_by_q(seed, kind):
    rng = np.random.default_rng(seed)
    m = checks.random_base_measure(rng, kind)
    n = int(rng.integers(1, 7))
    d = checks.random_dist(rng, n)
    mu = rng.normal(size=n)
    half = np.abs(rng.normal(size=n)) * rng.uniform(0, 3)
    b = bounds_exact(m, mu - half, mu + half, d)
    assert b.ucb - b.lcb <= q_value(m, 2 * half.max()) + 1e-9


def test_lipschitz_bad_constant():
    with pytest.raises(InvalidArgument):
        MonotoneLipschitz(np.negative, -1.0, False, Expectation())
    with pytest.raises(InvalidArgument):
        WeightedSum(-1.0, Expectation(), 1.0, Expectation())
    with pytest.raises(InvalidArgument):
        DistRobust(())


def test_mad_bounds_are_valid_but_not_tight_in_general():
    # the centred box decouples the mean, so the bound can be loose
    d = EnvDist.uniform(2)
    b = bounds_exact(MeanAbsDev(), [0.0, 0.0], [1.0, 1.0], d)
    assert b.lcb == 0.0
    assert b.ucb == pytest.approx(1.0)
    assert math.isclose(measure_eval(MeanAbsDev(), [0.0, 1.0], d), 0.5)
