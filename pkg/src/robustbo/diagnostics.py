"""Regret bookkeeping and theoretical regret bounds."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import InvalidArgument, MeasureHasNoQ
from .gp import CERTIFY_FACTOR
from .measures import (BestCase, CVaR, Expectation, MeanAbsDev, ValueAtRisk,
                       WorstCase)

_SIMPLE = {"expectation": 4.0, "worst": 4.0, "best": 4.0, "var": 4.0, "cvar": 4.0,
           "mad": 8.0}
_SIMPLE_TYPES = {Expectation: "expectation", WorstCase: "worst", BestCase: "best",
                 ValueAtRisk: "var", CVaR: "cvar", MeanAbsDev: "mad"}


def regret_series(x_hats, F, x_star):
    """Instantaneous and cumulative regret of a sequence of estimated designs."""
    F = np.asarray(F, dtype=float)
    r = F[x_star] - F[np.asarray(x_hats, dtype=int)]
    return r, np.cumsum(r)


def measure_class(spec):
    """Name used by the closed-form bounds, or raise MeasureHasNoQ."""
    try:
        return _SIMPLE_TYPES[type(spec)]
    except KeyError:
        raise MeasureHasNoQ(f"{type(spec).__name__} has no closed-form constant") from None


def simple_constant(cls):
    if not isinstance(cls, str):
        cls = measure_class(cls)
    try:
        return _SIMPLE[cls]
    except KeyError:
        raise MeasureHasNoQ(f"no closed-form constant for {cls!r}") from None


def c1(noise_var):
    return 2.0 / math.log1p(1.0 / noise_var)


def c0(grid_size, noise_var):
    return (2.0 * math.log(grid_size) + 2.0) * c1(noise_var)


def certified_gamma(gamma_hat):
    """Upper bound on the maximum information gain from a greedy estimate."""
    return np.asarray(gamma_hat, dtype=float) * CERTIFY_FACTOR


def _t_axis(gamma):
    return np.arange(1, len(gamma) + 1, dtype=float)


def bound_simple(cls, grid_size, noise_var, gamma):
    """``C sqrt(t C0 gamma_t)`` for t = 1..len(gamma)."""
    C = simple_constant(cls)
    gamma = np.asarray(gamma, dtype=float)
    return C * np.sqrt(_t_axis(gamma) * c0(grid_size, noise_var) * gamma)


def bound_simple_regret(cls, grid_size, noise_var, gamma, t=None):
    """``C sqrt(C0 gamma_t / t)``; a vector, or a scalar when ``t`` is given."""
    gamma = np.asarray(gamma, dtype=float)
    out = simple_constant(cls) * np.sqrt(c0(grid_size, noise_var) * gamma / _t_axis(gamma))
    return out if t is None else float(out[t - 1])


def bound_uncontrollable(cls, grid_size, noise_var, gamma, p_min):
    """Simulator bound with ``C1`` replaced by ``C1 / p_min``."""
    if not p_min > 0:
        raise InvalidArgument("p_min must be > 0")
    return bound_simple(cls, grid_size, noise_var, gamma) / math.sqrt(p_min)


def markov_bound(expected_bound, delta):
    """Bound holding with probability >= 1 - delta."""
    if not 0 < delta < 1:
        raise InvalidArgument(f"delta must lie in (0, 1), got {delta!r}")
    return np.asarray(expected_bound) / delta


def _beta_moment_quad(grid_size, power):
    c = 2.0 * math.log(grid_size)
    val, _ = integrate.quad(lambda x: (c + x) ** power * 0.5 * math.exp(-0.5 * x), 0, np.inf,
                            epsabs=0, epsrel=1e-12, limit=200)
    return val


@lru_cache(maxsize=256)
def _beta_moment_mc(grid_size, power, n=100_000, seed=20240601):
    rng = np.random.default_rng(seed)
    beta = 2.0 * math.log(grid_size) - 2.0 * np.log1p(-rng.random(n))
    return float(np.mean(beta**power))


def c2(grid_size, nu, method="quad"):
    """``E[beta^(nu / (2 - min(nu, 1)))]`` for the randomized beta."""
    power = nu / (2.0 - min(nu, 1.0))
    if power == 1.0:
        return 2.0 * math.log(grid_size) + 2.0
    if method == "mc":
        return _beta_moment_mc(grid_size, power)
    return _beta_moment_quad(grid_size, power)


def bound_general(q_terms, grid_size, noise_var, gamma_t, t, p_min=None, method="quad"):
    """Expected cumulative regret bound for q in the sum-of-concave-terms class.

    ``q_terms`` is a sequence of :class:`~robustbo.measures.QTerm`. With
    ``p_min`` the uncontrollable-setting constant ``C1 / p_min`` is used.
    """
    C1 = c1(noise_var) / (p_min if p_min is not None else 1.0)
    total = 0.0
    for term in q_terms:
        inner = 0.0
        for lam, nu in term.parts:
            if not nu > 0:
                raise InvalidArgument("exponents must be > 0")
            nup = min(nu, 1.0)
            inner += (2.0**nu * lam * (t * c2(grid_size, nu, method)) ** (1 - nup / 2)
                      * (C1 * gamma_t) ** (nup / 2))
        total += term.zeta * term.h(inner / t)
    return 2.0 * t * total


def bound_general_series(q_terms, grid_size, noise_var, gamma, p_min=None):
    return np.array([bound_general(q_terms, grid_size, noise_var, g, t, p_min)
                     for t, g in enumerate(np.asarray(gamma, float), start=1)])
