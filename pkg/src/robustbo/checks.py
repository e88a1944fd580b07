"""Randomized invariant suites shared by ``robustbo selftest`` and the tests.

Each ``check_*`` returns ``(ok, detail)``.
"""

from __future__ import annotations

import math

import numpy as np

from .gp import SquaredExponential, posterior_init
from .grid import EnvDist, ProblemGrid
from .measures import (CVaR, BestCase, DistRobust, Expectation, MeanAbsDev,
                       MonotoneLipschitz, ProbThreshold, StdDev, ValueAtRisk,
                       Variance, WeightedSum, WorstCase, q_value)
from .policy import credible_field, estimate_solution, sample_beta, select_x_proposed

Q_MEASURES = ("expectation", "worst", "best", "var", "cvar", "mad")


def random_dist(rng, n, zeros=False):
    p = rng.dirichlet(np.full(n, rng.uniform(0.3, 3.0)))
    if zeros and n > 2 and rng.random() < 0.3:
        p[rng.integers(n)] = 0.0
    return EnvDist(p / p.sum())


def random_base_measure(rng, kind=None):
    kind = kind or rng.choice(Q_MEASURES + ("std", "variance", "ptr"))
    alpha = float(rng.uniform(0.05, 0.95))
    return {
        "expectation": Expectation(), "worst": WorstCase(), "best": BestCase(),
        "var": ValueAtRisk(alpha), "cvar": CVaR(alpha), "mad": MeanAbsDev(),
        "std": StdDev(), "variance": Variance(), "ptr": ProbThreshold(float(rng.normal())),
    }[kind]


def random_measure(rng, n_w, depth=0):
    """Any catalogue measure, composites included."""
    roll = rng.random() if depth < 2 else 0.0
    if roll < 0.6:
        return random_base_measure(rng)
    if roll < 0.73:
        cands = tuple(random_dist(rng, n_w) for _ in range(rng.integers(1, 4)))
        return DistRobust(cands, random_base_measure(rng))
    if roll < 0.86:
        fn, inc = (np.negative, False) if rng.random() < 0.5 else (np.tanh, True)
        return MonotoneLipschitz(fn, 1.0, inc, random_measure(rng, n_w, depth + 1))
    return WeightedSum(float(rng.uniform(0, 3)), random_measure(rng, n_w, depth + 1),
                       float(rng.uniform(0, 3)), random_measure(rng, n_w, depth + 1))


def random_box(rng, n_rows, n_w):
    l = rng.normal(size=(n_rows, n_w)) * rng.uniform(0.1, 3.0)
    width = np.abs(rng.normal(size=(n_rows, n_w))) * rng.uniform(0.0, 2.0)
    width[rng.random((n_rows, n_w)) < 0.1] = 0.0
    return l, l + width


def random_in_box(rng, l, u, n):
    """Points of the box, a share of them on vertices where extremes live."""
    t = rng.random((n,) + l.shape)
    vert = rng.random(n) < 0.3
    t[vert] = np.round(t[vert])
    return l + t * (u - l)


def check_containment(n_cases=1000, n_funcs=200, seed=0, tol=1e-9):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        n_w = int(rng.integers(1, 9))
        dist = random_dist(rng, n_w, zeros=True)
        spec = random_measure(rng, n_w)
        l, u = random_box(rng, 1, n_w)
        lcb, ucb = spec.bounds(l, u, dist)
        G = random_in_box(rng, l[0], u[0], n_funcs)
        rho = spec.evaluate(G, dist)
        worst = max(worst, float(np.max(lcb[0] - rho)), float(np.max(rho - ucb[0])))
    return worst <= tol, f"max violation {worst:.3g} over {n_cases}x{n_funcs}"


def _q_measure(rng, kind):
    return random_base_measure(rng, kind)


def check_width(n_fields=500, seed=1, tol=1e-9):
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for k in range(n_fields):
        kind = Q_MEASURES[k % len(Q_MEASURES)]
        spec = _q_measure(rng, kind)
        n_x, n_w = int(rng.integers(1, 8)), int(rng.integers(1, 9))
        dist = random_dist(rng, n_w)
        mu = rng.normal(size=(n_x, n_w))
        sd = np.abs(rng.normal(size=(n_x, n_w))) * rng.uniform(0, 2)
        beta = float(rng.uniform(0, 30))
        half = math.sqrt(beta) * sd
        lcb, ucb = spec.bounds(mu - half, mu + half, dist)
        for x in range(n_x):
            q = q_value(spec, 2 * math.sqrt(beta) * sd[x].max())
            worst = max(worst, ucb[x] - lcb[x] - q)
    return worst <= tol, f"max excess width {worst:.3g} over {n_fields} fields"


def random_posterior(rng, n_x, n_w=1):
    X = np.sort(rng.uniform(-3, 3, size=(n_x, 1)), axis=0)
    W = rng.uniform(-1, 1, size=(n_w, 1))
    grid = ProblemGrid(X, W, random_dist(rng, n_w))
    kern = SquaredExponential(float(rng.uniform(0.3, 2.0)), float(rng.uniform(0.5, 2.0)))
    state = posterior_init(kern, float(10 ** rng.uniform(-6, -1)), grid)
    for _ in range(int(rng.integers(0, 12))):
        state.update(int(rng.integers(grid.size)), float(rng.normal()))
    return state, grid


def check_single_env(n_states=500, seed=2, tol=1e-10):
    """Single-environment expectation: ucb at the chosen x equals max ucb."""
    rng = np.random.default_rng(seed)
    spec = Expectation()
    worst = 0.0
    for _ in range(n_states):
        state, grid = random_posterior(rng, int(rng.integers(2, 30)), 1)
        beta = sample_beta(grid.size, rng)
        fld = credible_field(state, beta, spec, grid.dist)
        x_hat = estimate_solution(state, spec, grid.dist)
        x_t = select_x_proposed(fld, x_hat)
        worst = max(worst, abs(fld.ucb.max() - fld.ucb[x_t]))
    return worst <= tol, f"max |ucb gap| {worst:.3g} over {n_states} states"


def check_beta_sampler(n=1_000_000, grid_size=1000, seed=3):
    from scipy.stats import kstest

    rng = np.random.default_rng(seed)
    b = sample_beta(grid_size, rng, size=n)
    mean = float(b.beta.mean())
    ks = kstest(b.xi, "expon", args=(0, 2)).statistic
    target = 2 * math.log(grid_size) + 2
    ok = abs(mean - target) <= 0.05 and ks < 0.005
    return ok, f"mean {mean:.5f} (target {target:.5f}), KS {ks:.2e}"


def check_incremental(n_runs=5, n_obs=30, seed=4, tol=1e-8):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_runs):
        state, grid = random_posterior(rng, 40, 3)
        for _ in range(n_obs):
            state.update(int(rng.integers(grid.size)), float(rng.normal()))
        m, v = state.mean.copy(), state.var.copy()
        state.refactor()
        worst = max(worst, np.abs(m - state.mean).max(), np.abs(v - state.var).max())
    return worst <= tol, f"max field difference {worst:.3g}"


SUITES = {
    "containment": check_containment,
    "width": check_width,
    "single_env": check_single_env,
    "beta": check_beta_sampler,
    "incremental": check_incremental,
}


def run_all(quick=False):
    results = {}
    for name, fn in SUITES.items():
        if quick and name == "containment":
            results[name] = fn(n_cases=200, n_funcs=50)
        elif quick and name == "beta":
            results[name] = fn(n=200_000)
        else:
            results[name] = fn()
    return results
