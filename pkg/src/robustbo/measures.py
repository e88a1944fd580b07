"""Robustness measures over a finite environment set.

Every measure evaluates row-wise: ``evaluate(G, dist)`` takes an array whose
last axis runs over Omega and returns one value per row. ``bounds(L, U, dist)``
returns guaranteed (lcb, ucb) for any G with ``L <= G <= U`` pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidArgument, MeasureHasNoQ
from .grid import EnvDist

_CDF_TOL = 1e-12


def _rows(a):
    a = np.asarray(a, dtype=float)
    return a[None, :] if a.ndim == 1 else a


def _sorted_rows(G, p):
    order = np.argsort(G, axis=1, kind="stable")
    return np.take_along_axis(G, order, axis=1), p[order]


def quantile_rows(G, p, alpha):
    """Lower alpha-quantile of each row of G under pmf p."""
    Gs, ps = _sorted_rows(_rows(G), np.asarray(p, dtype=float))
    reached = np.cumsum(ps, axis=1) >= alpha - _CDF_TOL
    reached[:, -1] = True
    return Gs[np.arange(Gs.shape[0]), np.argmax(reached, axis=1)]


def cvar_rows(G, p, alpha):
    """``(1/alpha) * int_0^alpha quantile(a) da`` integrated exactly."""
    Gs, ps = _sorted_rows(_rows(G), np.asarray(p, dtype=float))
    before = np.cumsum(ps, axis=1) - ps
    take = np.clip(alpha - before, 0.0, ps)
    return (take * Gs).sum(axis=1) / alpha


def weighted_quantile(values, dist, alpha):
    """Smallest support value whose cumulative mass reaches ``alpha``."""
    if not 0 < alpha < 1:
        raise InvalidArgument(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(quantile_rows(values, dist.pmf, alpha)[0])


def _str(a, b):
    return np.maximum(np.minimum(-a, b), 0.0)


def _centered_box(L, U, p):
    lc = L - (U @ p)[:, None]
    uc = U - (L @ p)[:, None]
    return lc, uc


# ----------------------------------------------------------------------------
# width functions q(a) in the sum-of-concave-terms form


def _identity(a):
    return a


@dataclass(frozen=True)
class QTerm:
    """One term ``zeta * h(sum_j lambda_j a**nu_j)``."""

    zeta: float
    parts: tuple = ((1.0, 1.0),)
    h: Callable = _identity

    def __call__(self, a):
        return self.zeta * self.h(sum(lam * a**nu for lam, nu in self.parts))

    def scaled(self, c):
        return QTerm(self.zeta * c, self.parts, self.h)


def _linear_q(c):
    return (QTerm(float(c)),)


# ----------------------------------------------------------------------------
# measures


class Measure:
    def evaluate(self, G, dist):
        raise NotImplementedError

    def bounds(self, L, U, dist):
        raise NotImplementedError

    def q_form(self):
        raise MeasureHasNoQ(f"{type(self).__name__} has no explicit q(a)")

    #: whether bounds equal (rho(L), rho(U)) exactly
    monotone = False


@dataclass(frozen=True)
class Expectation(Measure):
    monotone = True

    def evaluate(self, G, dist):
        return _rows(G) @ dist.pmf

    def bounds(self, L, U, dist):
        return L @ dist.pmf, U @ dist.pmf

    def q_form(self):
        return _linear_q(1)


@dataclass(frozen=True)
class WorstCase(Measure):
    monotone = True

    def evaluate(self, G, dist):
        return _rows(G).min(axis=1)

    def bounds(self, L, U, dist):
        return self.evaluate(L, dist), self.evaluate(U, dist)

    def q_form(self):
        return _linear_q(1)


@dataclass(frozen=True)
class BestCase(Measure):
    monotone = True

    def evaluate(self, G, dist):
        return _rows(G).max(axis=1)

    def bounds(self, L, U, dist):
        return self.evaluate(L, dist), self.evaluate(U, dist)

    def q_form(self):
        return _linear_q(1)


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise InvalidArgument(f"alpha must lie in (0, 1), got {alpha!r}")


@dataclass(frozen=True)
class ValueAtRisk(Measure):
    alpha: float
    monotone = True

    def __post_init__(self):
        _check_alpha(self.alpha)

    def evaluate(self, G, dist):
        return quantile_rows(G, dist.pmf, self.alpha)

    def bounds(self, L, U, dist):
        return self.evaluate(L, dist), self.evaluate(U, dist)

    def q_form(self):
        return _linear_q(1)


@dataclass(frozen=True)
class CVaR(Measure):
    """Lower-tail average ``(1/alpha) int_0^alpha VaR_a da``."""

    alpha: float
    monotone = True

    def __post_init__(self):
        _check_alpha(self.alpha)

    def evaluate(self, G, dist):
        return cvar_rows(G, dist.pmf, self.alpha)

    def bounds(self, L, U, dist):
        return self.evaluate(L, dist), self.evaluate(U, dist)

    def q_form(self):
        return _linear_q(1)


@dataclass(frozen=True)
class MeanAbsDev(Measure):
    def evaluate(self, G, dist):
        G = _rows(G)
        return np.abs(G - (G @ dist.pmf)[:, None]) @ dist.pmf

    def bounds(self, L, U, dist):
        lc, uc = _centered_box(L, U, dist.pmf)
        lo = np.minimum(np.abs(lc), np.abs(uc)) - _str(lc, uc)
        hi = np.maximum(np.abs(lc), np.abs(uc))
        return lo @ dist.pmf, hi @ dist.pmf

    def q_form(self):
        return _linear_q(2)


@dataclass(frozen=True)
class Variance(Measure):
    def evaluate(self, G, dist):
        G = _rows(G)
        return (G - (G @ dist.pmf)[:, None]) ** 2 @ dist.pmf

    def bounds(self, L, U, dist):
        lc, uc = _centered_box(L, U, dist.pmf)
        lo = np.minimum(lc**2, uc**2) - _str(lc, uc) ** 2
        hi = np.maximum(lc**2, uc**2)
        return lo @ dist.pmf, hi @ dist.pmf


@dataclass(frozen=True)
class StdDev(Measure):
    def evaluate(self, G, dist):
        return np.sqrt(Variance().evaluate(G, dist))

    def bounds(self, L, U, dist):
        lo, hi = Variance().bounds(L, U, dist)
        return np.sqrt(np.clip(lo, 0.0, None)), np.sqrt(hi)


@dataclass(frozen=True)
class ProbThreshold(Measure):
    """``P(g >= theta)``."""

    theta: float
    monotone = True

    def evaluate(self, G, dist):
        return (_rows(G) >= self.theta) @ dist.pmf

    def bounds(self, L, U, dist):
        return self.evaluate(L, dist), self.evaluate(U, dist)


@dataclass(frozen=True)
class DistRobust(Measure):
    """Infimum of ``inner`` over a set of candidate distributions.

    The outer ``dist`` argument is ignored; each candidate is used instead.
    """

    candidates: tuple
    inner: Measure = field(default_factory=Expectation)

    def __post_init__(self):
        cands = tuple(c if isinstance(c, EnvDist) else EnvDist(c) for c in self.candidates)
        if not cands:
            raise InvalidArgument("DistRobust needs at least one candidate")
        object.__setattr__(self, "candidates", cands)

    def __hash__(self):
        return id(self)

    def evaluate(self, G, dist):
        return np.min([self.inner.evaluate(G, c) for c in self.candidates], axis=0)

    def bounds(self, L, U, dist):
        pairs = [self.inner.bounds(L, U, c) for c in self.candidates]
        return np.min([p[0] for p in pairs], axis=0), np.min([p[1] for p in pairs], axis=0)

    def q_form(self):
        return self.inner.q_form()


@dataclass(frozen=True)
class MonotoneLipschitz(Measure):
    """``fn(inner)`` for a monotone map with Lipschitz constant ``K``.

    ``fn`` must accept arrays. The declared direction is informational; the
    bounds take the min/max of the mapped inner bounds, so a wrong direction
    cannot break containment. ``K`` is trusted for q(a).
    """

    fn: Callable
    K: float
    increasing: bool
    inner: Measure

    def __post_init__(self):
        if not (np.isfinite(self.K) and self.K >= 0):
            raise InvalidArgument(f"Lipschitz constant must be >= 0, got {self.K!r}")

    def evaluate(self, G, dist):
        return np.asarray(self.fn(self.inner.evaluate(G, dist)), dtype=float)

    def bounds(self, L, U, dist):
        lo, hi = self.inner.bounds(L, U, dist)
        a = np.asarray(self.fn(lo), dtype=float)
        b = np.asarray(self.fn(hi), dtype=float)
        return np.minimum(a, b), np.maximum(a, b)

    def q_form(self):
        return tuple(t.scaled(self.K) for t in self.inner.q_form())


@dataclass(frozen=True)
class WeightedSum(Measure):
    w1: float
    m1: Measure
    w2: float
    m2: Measure

    def __post_init__(self):
        if self.w1 < 0 or self.w2 < 0:
            raise InvalidArgument("weighted-sum weights must be non-negative")

    def evaluate(self, G, dist):
        return self.w1 * self.m1.evaluate(G, dist) + self.w2 * self.m2.evaluate(G, dist)

    def bounds(self, L, U, dist):
        l1, u1 = self.m1.bounds(L, U, dist)
        l2, u2 = self.m2.bounds(L, U, dist)
        return self.w1 * l1 + self.w2 * l2, self.w1 * u1 + self.w2 * u2

    def q_form(self):
        return tuple(t.scaled(self.w1) for t in self.m1.q_form()) + tuple(
            t.scaled(self.w2) for t in self.m2.q_form()
        )


def exp_mae(alpha):
    """``E[f] - alpha * E|f - E[f]|`` assembled from table-backed pieces."""
    return WeightedSum(1.0, Expectation(), float(alpha),
                       MonotoneLipschitz(np.negative, 1.0, False, MeanAbsDev()))


# ----------------------------------------------------------------------------
# public operations


def _check_row(g, n):
    g = np.asarray(g, dtype=float)
    if np.any(np.isnan(g)):
        raise InvalidArgument("values contain NaN")
    if g.shape[-1] != n:
        raise InvalidArgument(f"expected {n} environment values, got {g.shape[-1]}")
    return g


def measure_eval(spec, g_row, dist):
    """rho(g) for one row (returns float) or for each row of a matrix."""
    g = _check_row(g_row, len(dist))
    out = spec.evaluate(g, dist)
    return float(out[0]) if g.ndim == 1 else out


@dataclass(frozen=True)
class BoundPair:
    lcb: float
    ucb: float


def bounds_exact(spec, l_row, u_row, dist):
    """Closed-form (lcb, ucb) enclosing rho over the box ``[l, u]``.

    With 1-D inputs returns a :class:`BoundPair`; with matrices returns a pair
    of arrays, one entry per row.
    """
    l = _check_row(l_row, len(dist))
    u = _check_row(u_row, len(dist))
    if l.shape != u.shape:
        raise InvalidArgument("l and u must have the same shape")
    if np.any(l > u):
        raise InvalidArgument("l exceeds u at some environment point")
    lo, hi = spec.bounds(_rows(l), _rows(u), dist)
    if l.ndim == 1:
        return BoundPair(float(lo[0]), float(hi[0]))
    return lo, hi


def bounds_sampled(spec, paths, x, dist):
    """min/max of rho over posterior sample paths at design ``x``.

    This is a Monte-Carlo approximation, not a guaranteed interval.
    """
    paths = np.asarray(paths, dtype=float)
    vals = spec.evaluate(paths[:, x, :], dist)
    return BoundPair(float(vals.min()), float(vals.max()))


def q_form(spec):
    """Tuple of :class:`QTerm` making up q(a); raises MeasureHasNoQ."""
    return spec.q_form()


def has_q(spec):
    try:
        spec.q_form()
    except MeasureHasNoQ:
        return False
    return True


def q_value(spec, a):
    """Width function q(a) for ``spec``; raises MeasureHasNoQ if unavailable."""
    if a < 0:
        raise InvalidArgument("q(a) is defined for a >= 0")
    return float(sum(term(a) for term in spec.q_form()))
