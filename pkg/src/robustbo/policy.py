"""Acquisition rules: randomized-beta UCB for robustness measures and baselines.

All argmax ties resolve to the lowest enumeration index.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import InvalidArgument
from .gp import realized_info_gain, sample_paths
from .measures import Expectation

FIXED_BETA = 9.0
STRATEGIES = (
    "random", "us", "bq", "bptucb", "bptucb-fixed",
    "bbbmobo", "bbbmobo-fixed", "proposed", "proposed-fixed",
)
SETTINGS = ("simulator", "uncontrollable")


# ----------------------------------------------------------------------------
# beta and credible fields


@dataclass(frozen=True)
class BetaSample:
    xi: float
    beta: float


def sample_beta(grid_size, rng, size=None):
    """``beta = 2 log|X x Omega| + xi`` with ``xi ~ chi^2_2`` by inverse CDF.

    With ``size`` given, ``xi`` and ``beta`` are arrays.
    """
    if grid_size < 1:
        raise InvalidArgument("grid_size must be >= 1")
    u = rng.random(size)
    xi = -2.0 * np.log1p(-u)
    beta = 2.0 * math.log(grid_size) + xi
    if size is None:
        return BetaSample(float(xi), float(beta))
    return BetaSample(xi, beta)


def bbbmobo_beta(grid_size, t):
    return 2.0 * math.log(grid_size * math.pi**2 * t**2 / (6 * 0.05))


@dataclass
class CredibleField:
    beta: float
    l: np.ndarray
    u: np.ndarray
    lcb: np.ndarray
    ucb: np.ndarray

    @property
    def width(self):
        return self.ucb - self.lcb


def credible_field(state, beta, spec, dist):
    """Pointwise interval ``mu +- sqrt(beta) sd`` and per-design measure bounds."""
    b = beta.beta if isinstance(beta, BetaSample) else float(beta)
    n_x, n_w = state.shape
    mu = state.mean.reshape(n_x, n_w)
    half = math.sqrt(b) * state.sd.reshape(n_x, n_w)
    l, u = mu - half, mu + half
    lcb, ucb = spec.bounds(l, u, dist)
    return CredibleField(b, l, u, np.asarray(lcb, float), np.asarray(ucb, float))


# ----------------------------------------------------------------------------
# proposed selection rules


def estimate_solution(state, spec, dist):
    """argmax_x rho(mu(x, .))."""
    n_x, n_w = state.shape
    return int(np.argmax(spec.evaluate(state.mean.reshape(n_x, n_w), dist)))


def optimistic_x(field):
    """argmax_x (ucb(x) - max lcb)_+, falling back to argmax ucb when all clamp."""
    gap = np.maximum(field.ucb - field.lcb.max(), 0.0)
    if not np.any(gap > 0):
        return int(np.argmax(field.ucb))
    return int(np.argmax(gap))


def select_x_proposed(field, x_hat):
    """Wider-interval candidate among the optimistic and estimated designs."""
    x_tilde = optimistic_x(field)
    if x_tilde == x_hat:
        return x_tilde
    w_t, w_h = field.width[x_tilde], field.width[x_hat]
    if w_t == w_h:
        return min(x_tilde, x_hat)
    return x_tilde if w_t > w_h else x_hat


def select_w_simulator(state, x):
    n_x, n_w = state.shape
    return int(np.argmax(state.var[x * n_w:(x + 1) * n_w]))


def _check_pmf(dist):
    p = getattr(dist, "pmf", dist)
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise InvalidArgument("pmf must be non-negative and sum to 1")
    return p


def select_w_uncontrollable(dist, rng):
    p = _check_pmf(dist)
    return int(rng.choice(p.size, p=p))


def estimate_hat_t(state, spec, dist, history, M=256, rng=None, exact=None):
    """Position in ``history`` maximizing the posterior expectation of F.

    ``exact`` (default: True for the expectation measure) uses the posterior
    mean, which is exact when rho is linear. Otherwise ``M`` joint posterior
    paths over the designs in ``history`` are averaged. Ties resolve to the
    most recent position: tied entries usually name the same design.
    """
    history = list(history)
    if not history:
        raise InvalidArgument("history must be non-empty")
    if exact is None:
        exact = isinstance(spec, Expectation)
    rows = np.unique(history)
    n_x, n_w = state.shape
    if exact:
        vals = spec.evaluate(state.mean.reshape(n_x, n_w)[rows], dist)
    else:
        if M < 1:
            raise InvalidArgument("M must be >= 1")
        paths = sample_paths(state, None, M, rng, rows=rows)
        vals = spec.evaluate(paths.reshape(-1, n_w), dist).reshape(M, rows.size).mean(axis=0)
    score = dict(zip(rows.tolist(), vals.tolist()))
    seq = np.array([score[h] for h in history])
    return int(len(seq) - 1 - np.argmax(seq[::-1]))


# ----------------------------------------------------------------------------
# baselines


def select_random(grid, dist, rng):
    x = int(rng.integers(grid.n_x))
    return x, select_w_uncontrollable(dist, rng)


def select_us(state, grid=None):
    n_x, n_w = state.shape
    return divmod(int(np.argmax(state.var)), n_w)


def bq_posterior(state, dist):
    """Mean and variance of ``sum_w p(w) f(x, w)`` for each design."""
    n_x, n_w = state.shape
    p = dist.pmf
    mu = state.mean.reshape(n_x, n_w) @ p
    prior = state._cache.get("bq_prior")
    if prior is None:
        prior = np.empty(n_x)
        for x in range(n_x):
            c = state.coords[x * n_w:(x + 1) * n_w]
            prior[x] = p @ state.kernel(c, c) @ p
        state._cache["bq_prior"] = prior
    if state.n_obs:
        proj = state.V.reshape(state.n_obs, n_x, n_w) @ p
        var = prior - (proj**2).sum(axis=0)
    else:
        var = prior.copy()
    return mu, np.clip(var, 0.0, None)


def expected_improvement(mu, sd, best):
    mu, sd = np.asarray(mu, float), np.asarray(sd, float)
    out = np.maximum(mu - best, 0.0)
    pos = sd > 0
    z = (mu[pos] - best) / sd[pos]
    out[pos] = sd[pos] * (z * norm.cdf(z) + norm.pdf(z))
    return out


def select_bq(state, dist):
    mu, var = bq_posterior(state, dist)
    ei = expected_improvement(mu, np.sqrt(var), mu.max())
    return int(np.argmax(ei))


def bpt_eta(c, grid_size):
    return 0.5 * min(1e-8 * c / 2, 1e-16 * 0.05 * c / (8 * grid_size))


def _bpt_probs(state, theta, c):
    n_x, n_w = state.shape
    mu = state.mean.reshape(n_x, n_w)
    sd = np.maximum(state.sd.reshape(n_x, n_w), 1e-300)
    eta = bpt_eta(c, n_x * n_w)
    h = np.where(np.abs(mu - theta) < eta, theta + 2 * eta, theta)
    return norm.cdf((mu - h) / sd)


def bptucb_scores(state, dist, theta, t, c=1.0, variant="theory"):
    P = _bpt_probs(state, theta, c)
    p_hat = P @ dist.pmf
    gamma2 = (P * (1 - P)) @ dist.pmf
    if variant == "theory":
        beta = state.n_points * math.pi**2 * t**2 / (3 * 0.05)
        return p_hat + beta**0.1 * gamma2**0.1
    return p_hat + 3.0 * np.sqrt(gamma2)


def select_bptucb(state, dist, theta, t, c=1.0, variant="theory"):
    if t < 1:
        raise InvalidArgument("t must be >= 1")
    x = int(np.argmax(bptucb_scores(state, dist, theta, t, c, variant)))
    P = _bpt_probs(state, theta, c)[x]
    return x, int(np.argmax(P * (1 - P)))


def select_bbbmobo(field):
    return optimistic_x(field)


# ----------------------------------------------------------------------------
# one loop iteration


@dataclass
class TraceRecord:
    t: int
    beta: float
    x: int
    w: int
    y: float
    x_hat: int
    F_hat: float
    regret: float
    info_gain: float
    hat_t: int = -1
    wall_time: float = 0.0


@dataclass
class RunTrace:
    records: list = field(default_factory=list)

    def append(self, rec):
        if self.records and rec.t <= self.records[-1].t:
            raise InvalidArgument("trace iterations must strictly increase")
        if not math.isnan(rec.regret) and rec.regret < -1e-12:
            raise InvalidArgument(f"negative regret {rec.regret} at t={rec.t}")
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])


class Streams:
    """Independent generators for each consumer of randomness in a run."""

    NAMES = ("beta", "noise", "env", "strategy", "hat")

    def __init__(self, seed):
        if isinstance(seed, np.random.SeedSequence):
            # spawn() advances the parent, so work on a copy to keep runs repeatable
            ss = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key,
                                        pool_size=seed.pool_size)
        else:
            ss = np.random.SeedSequence(seed)
        for name, child in zip(self.NAMES, ss.spawn(len(self.NAMES))):
            setattr(self, name, np.random.default_rng(child))


@dataclass
class Acquisition:
    """Which rule picks (x_t, w_t) and in which setting."""

    strategy: str = "proposed"
    setting: str = "simulator"
    theta: float = 0.0  # threshold used by BPT-UCB scoring
    bpt_c: float = 1.0
    hat_t: str = "off"  # off | exact | mc
    hat_t_samples: int = 256

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InvalidArgument(f"unknown strategy {self.strategy!r}")
        if self.setting not in SETTINGS:
            raise InvalidArgument(f"unknown setting {self.setting!r}")
        if self.hat_t not in ("off", "exact", "mc"):
            raise InvalidArgument(f"unknown hat-t mode {self.hat_t!r}")


def _choose(state, grid, spec, acq, streams, t, x_hat):
    """Returns (beta or nan, x, w-or-None)."""
    s = acq.strategy
    dist = grid.dist
    if s == "random":
        x, w = select_random(grid, dist, streams.strategy)
        return math.nan, x, w
    if s == "us":
        x, w = select_us(state)
        return math.nan, x, w
    if s == "bq":
        return math.nan, select_bq(state, dist), None
    if s.startswith("bptucb"):
        variant = "fixed" if s.endswith("fixed") else "theory"
        x, w = select_bptucb(state, dist, acq.theta, t, acq.bpt_c, variant)
        return math.nan, x, w
    if s == "proposed":
        beta = sample_beta(grid.size, streams.beta).beta
    elif s == "bbbmobo":
        beta = bbbmobo_beta(grid.size, t)
    else:
        beta = FIXED_BETA
    fld = credible_field(state, beta, spec, dist)
    if s.startswith("bbbmobo"):
        return beta, select_bbbmobo(fld), None
    return beta, select_x_proposed(fld, x_hat), None


def run_iteration(state, grid, spec, oracle, streams, t, acq=None, truth=None,
                  history=None):
    """One pass of the optimization loop; mutates ``state``.

    Order: beta, credible field, estimated solution, x_t, w_t, noisy
    observation, GP update. ``truth`` is ``(F vector, F(x*))`` when known.
    Returns the trace record.
    """
    acq = acq or Acquisition()
    start = time.perf_counter()
    x_hat = estimate_solution(state, spec, grid.dist)
    beta, x, w = _choose(state, grid, spec, acq, streams, t, x_hat)
    if acq.setting == "uncontrollable":
        w = select_w_uncontrollable(grid.dist, streams.env)
    elif w is None:
        w = select_w_simulator(state, x)

    hat_t = -1
    if history is not None:
        history.append(x_hat)
        if acq.hat_t != "off":
            pos = estimate_hat_t(state, spec, grid.dist, history, acq.hat_t_samples,
                                 streams.hat, exact=(acq.hat_t == "exact"))
            hat_t = pos + 1

    y = oracle.evaluate(x, w, streams.noise)
    state.update(x * grid.n_w + w, y)

    if truth is not None:
        F, F_star = truth
        F_hat = float(F[x_hat])
        regret = F_star - F_hat
    else:
        F_hat = regret = math.nan
    return TraceRecord(t, beta, x, w, y, x_hat, F_hat, regret, realized_info_gain(state),
                       hat_t, time.perf_counter() - start)
