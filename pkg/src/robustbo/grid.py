"""Finite problem grids and environment distributions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

_NORM_TOL = 1e-12


class EnvDist:
    """Probability mass function over the environment set.

    Parameters
    ----------
    pmf : array_like
        Non-negative weights summing to one (within 1e-12).
    """

    def __init__(self, pmf):
        p = np.asarray(pmf, dtype=float).ravel()
        if p.size == 0:
            raise InvalidArgument("pmf must have at least one atom")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidArgument("pmf entries must be finite and non-negative")
        if abs(p.sum() - 1.0) > _NORM_TOL:
            raise InvalidArgument(f"pmf sums to {p.sum()!r}, expected 1")
        p.setflags(write=False)
        self.pmf = p

    @classmethod
    def uniform(cls, n):
        return cls(np.full(n, 1.0 / n))

    def __len__(self):
        return self.pmf.size

    def __repr__(self):
        return f"EnvDist(n={self.pmf.size}, p_min={self.p_min:.4g})"

    @property
    def p_min(self):
        """Smallest strictly positive mass."""
        return float(self.pmf[self.pmf > 0].min())

    @property
    def all_positive(self):
        return bool(np.all(self.pmf > 0))

    def expect(self, values):
        """Weighted average along the last axis."""
        return np.asarray(values, dtype=float) @ self.pmf


@dataclass
class ProblemGrid:
    """Design set X, environment set Omega and a pmf over Omega.

    Joint points are enumerated row-major: flat index ``x * n_w + w``.
    """

    X: np.ndarray
    W: np.ndarray
    dist: EnvDist = None
    _joint: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.W = np.atleast_2d(np.asarray(self.W, dtype=float))
        if self.X.shape[0] < 1 or self.W.shape[0] < 1:
            raise InvalidArgument("X and Omega must be non-empty")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.W))):
            raise InvalidArgument("grid coordinates must be finite")
        if self.dist is None:
            self.dist = EnvDist.uniform(self.n_w)
        if len(self.dist) != self.n_w:
            raise InvalidArgument(f"pmf has {len(self.dist)} atoms but |Omega| = {self.n_w}")

    @property
    def n_x(self):
        return self.X.shape[0]

    @property
    def n_w(self):
        return self.W.shape[0]

    @property
    def size(self):
        return self.n_x * self.n_w

    @property
    def joint_coords(self):
        """(|X||Omega|, dx + dw) array of concatenated coordinates."""
        if self._joint is None:
            xs = np.repeat(self.X, self.n_w, axis=0)
            ws = np.tile(self.W, (self.n_x, 1))
            self._joint = np.hstack([xs, ws])
        return self._joint

    def flat(self, x, w):
        if not (0 <= x < self.n_x and 0 <= w < self.n_w):
            raise InvalidArgument(f"point ({x}, {w}) is outside the grid")
        return int(x) * self.n_w + int(w)

    def unflat(self, idx):
        return divmod(int(idx), self.n_w)

    def coords(self, x, w):
        return np.concatenate([self.X[x], self.W[w]])

    def with_dist(self, dist):
        return ProblemGrid(self.X, self.W, dist)
