import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustbo import diagnostics as dg
from robustbo.errors import InvalidArgument, MeasureHasNoQ
from robustbo.measures import (CVaR, Expectation, MeanAbsDev, ProbThreshold, QTerm, StdDev,
                               exp_mae, q_form)


def test_regret_series():
    F = np.array([5.0, 3.0, 4.0])
    r, R = dg.regret_series([1, 2, 0, 1], F, 0)
    np.testing.assert_allclose(r, [2, 1, 0, 2])
    np.testing.assert_allclose(R, [2, 3, 3, 5])
    r, R = dg.regret_series([1] * 6, F, 0)
    np.testing.assert_allclose(R, 2.0 * np.arange(1, 7))


def test_constants():
    assert dg.c1(1e-6) == pytest.approx(2 / math.log(1 + 1e6), rel=1e-14)
    # 2 (2 log 1000 + 2) / log(1 + 1e6)
    assert dg.c0(1000, 1e-6) == pytest.approx(2.2895294888805804, rel=1e-13)
    assert dg.simple_constant(Expectation()) == 4.0
    assert dg.simple_constant(MeanAbsDev()) == 8.0
    assert dg.simple_constant("cvar") == 4.0
    with pytest.raises(MeasureHasNoQ):
        dg.simple_constant(StdDev())


def test_c2_values():
    assert dg.c2(1000, 1.0) == 2 * math.log(1000) + 2
    # E[beta^(1/3)] and E[beta^2] by adaptive quadrature at high precision
    assert dg.c2(2500, 0.5) == pytest.approx(2.6001866959995, rel=1e-11)
    assert dg.c2(2500, 2.0) == pytest.approx(315.455152006835, rel=1e-11)
    assert dg.c2(2500, 2.0) == pytest.approx(
        (2 * math.log(2500)) ** 2 + 2 * 2 * math.log(2500) * 2 + 8, rel=1e-12)
    assert dg.c2(2500, 0.5, "mc") == pytest.approx(dg.c2(2500, 0.5), rel=1e-3)


def test_bound_simple_identity_case():
    # grid size e and noise chosen so C0 * gamma_1 = 1 gives the bare constant
    noise = 1.0 / math.expm1(8.0)  # C1 = 2 / 8, C0 = 4 * C1 = 1
    assert dg.c0(math.e, noise) == pytest.approx(1.0)
    assert dg.bound_simple("expectation", math.e, noise, [1.0])[0] == pytest.approx(4.0)
    assert dg.bound_simple("mad", math.e, noise, [1.0])[0] == pytest.approx(8.0)


def test_simple_regret_is_cumulative_over_t():
    gamma = np.linspace(1, 30, 100)
    B = dg.bound_simple("expectation", 2500, 1e-6, gamma)
    b = dg.bound_simple_regret("expectation", 2500, 1e-6, gamma)
    np.testing.assert_allclose(b, B / np.arange(1, 101))
    hand = 4 * math.sqrt(dg.c0(2500, 1e-6) * gamma[99] / 100)
    assert dg.bound_simple_regret("expectation", 2500, 1e-6, gamma, t=100) == pytest.approx(hand)


def test_uncontrollable_scaling():
    gamma = np.arange(1.0, 11.0)
    base = dg.bound_simple("var", 100, 1e-3, gamma)
    np.testing.assert_allclose(dg.bound_uncontrollable("var", 100, 1e-3, gamma, 1.0), base)
    np.testing.assert_allclose(dg.bound_uncontrollable("var", 100, 1e-3, gamma, 0.25), 2 * base)
    with pytest.raises(InvalidArgument):
        dg.bound_uncontrollable("var", 100, 1e-3, gamma, 0.0)


def test_markov():
    assert dg.markov_bound(3.0, 0.5) == 6.0
    assert dg.markov_bound(1.0, 0.05) == pytest.approx(20.0)
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(InvalidArgument):
            dg.markov_bound(1.0, bad)


@pytest.mark.parametrize("t", [1, 7, 150])
def test_general_bound_reduces_to_simple(t):
    gamma = 12.5
    simple = dg.bound_simple("expectation", 2500, 1e-6, np.full(t, gamma))[-1]
    assert dg.bound_general(q_form(Expectation()), 2500, 1e-6, gamma, t) == pytest.approx(simple)
    assert dg.bound_general(q_form(MeanAbsDev()), 2500, 1e-6, gamma, t) == pytest.approx(2 * simple)
    unc = dg.bound_general(q_form(CVaR(0.2)), 2500, 1e-6, gamma, t, p_min=0.02)
    assert unc == pytest.approx(simple / math.sqrt(0.02))


def test_general_bound_for_weighted_sum():
    # EXP-MAE with weight 4 has q(a) = 9a
    simple = dg.bound_simple("expectation", 2500, 1e-6, [3.0])[-1]
    assert dg.bound_general(q_form(exp_mae(4.0)), 2500, 1e-6, 3.0, 1) == pytest.approx(9 * simple)


def test_general_bound_with_concave_term():
    # q(a) = sqrt(a): zeta=1, h=sqrt, lambda=1, nu=1
    term = QTerm(1.0, ((1.0, 1.0),), math.sqrt)
    t, gamma = 10, 4.0
    inner = 2 * (t * dg.c2(100, 1.0)) ** 0.5 * (dg.c1(1e-2) * gamma) ** 0.5
    assert dg.bound_general((term,), 100, 1e-2, gamma, t) == pytest.approx(2 * t * math.sqrt(inner / t))
    with pytest.raises(InvalidArgument):
        dg.bound_general((QTerm(1.0, ((1.0, 0.0),)),), 100, 1e-2, gamma, t)


def test_measures_without_q():
    with pytest.raises(MeasureHasNoQ):
        q_form(ProbThreshold(0.5))


@settings(max_examples=50, deadline=None)
@given(incs=st.lists(st.floats(0, 5), min_size=1, max_size=30),
       p_min=st.floats(0.01, 1.0))
def test_bounds_nonnegative_and_nondecreasing(incs, p_min):
    gamma = np.cumsum(incs)
    for B in (dg.bound_simple("mad", 500, 1e-4, gamma),
              dg.bound_uncontrollable("cvar", 500, 1e-4, gamma, p_min),
              dg.bound_general_series(q_form(exp_mae(2.0)), 500, 1e-4, gamma)):
        assert np.all(B >= 0)
        assert np.all(np.diff(B) >= -1e-9 * (1 + B[1:]))


def test_certified_gamma():
    np.testing.assert_allclose(dg.certified_gamma([1.0, 2.0]),
                               np.array([1.0, 2.0]) / (1 - math.exp(-1)))
