"""Exact GP regression on a fixed finite grid.

The posterior keeps ``V = L^{-1} K(obs, grid)`` and ``z = L^{-1} y`` so that
adding an observation is a bordered Cholesky update costing O(t N), and the
mean/variance fields are maintained in O(N) per update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.spatial.distance import cdist

from .errors import InvalidArgument, NumericalFailure

JITTER_LADDER = tuple(10.0 ** -k for k in range(12, 5, -1))  # 1e-12 ... 1e-6


# ----------------------------------------------------------------------------
# kernels


def _check_positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise InvalidArgument(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class SquaredExponential:
    """``v * exp(-|a - b|^2 / (2 l^2))``."""

    lengthscale: float = 1.0
    variance: float = 1.0

    def __post_init__(self):
        _check_positive("lengthscale", self.lengthscale)
        _check_positive("variance", self.variance)

    def __call__(self, A, B):
        d2 = cdist(A, B, "sqeuclidean")
        return self.variance * np.exp(-0.5 * d2 / self.lengthscale**2)

    def diag(self, A):
        return np.full(A.shape[0], float(self.variance))

    @property
    def max_diag(self):
        return float(self.variance)


@dataclass(frozen=True)
class Matern32:
    """``v * (1 + sqrt(3) r / l) * exp(-sqrt(3) r / l)``."""

    lengthscale: float = 1.0
    variance: float = 1.0

    def __post_init__(self):
        _check_positive("lengthscale", self.lengthscale)
        _check_positive("variance", self.variance)

    def __call__(self, A, B):
        s = math.sqrt(3.0) * cdist(A, B, "euclidean") / self.lengthscale
        return self.variance * (1.0 + s) * np.exp(-s)

    def diag(self, A):
        return np.full(A.shape[0], float(self.variance))

    @property
    def max_diag(self):
        return float(self.variance)


def _freeze_projection(proj):
    arr = np.asarray(proj)
    if arr.ndim == 1:
        if not np.issubdtype(arr.dtype, np.integer):
            raise InvalidArgument("index projections must be integers")
        return tuple(int(i) for i in arr)
    if arr.ndim == 2:
        return tuple(tuple(float(v) for v in row) for row in arr)
    raise InvalidArgument("projection must be an index list or a 2-D linear map")


def _apply_projection(proj, A):
    if isinstance(proj[0], tuple):
        M = np.asarray(proj, dtype=float)
        if M.shape[1] != A.shape[1]:
            raise InvalidArgument(
                f"linear projection expects {M.shape[1]} coordinates, got {A.shape[1]}"
            )
        return A @ M.T
    if max(proj) >= A.shape[1] or min(proj) < -A.shape[1]:
        raise InvalidArgument(f"projection {proj} indexes past {A.shape[1]} coordinates")
    return A[:, proj]


@dataclass(frozen=True)
class Sum:
    """Sum of kernels, each acting on a projection of the joint point.

    A projection is either an ordered index list (sub-vector selection) or a
    2-D matrix applied as a linear map, e.g. ``[[1, 0, 1, 0], [0, 1, 0, 1]]``
    to feed ``x + w`` into the base kernel.
    """

    terms: tuple

    def __post_init__(self):
        if len(self.terms) == 0:
            raise InvalidArgument("Sum kernel needs at least one term")
        frozen = tuple((k, _freeze_projection(p)) for k, p in self.terms)
        object.__setattr__(self, "terms", frozen)

    def __call__(self, A, B):
        out = 0.0
        for k, p in self.terms:
            out = out + k(_apply_projection(p, A), _apply_projection(p, B))
        return out

    def diag(self, A):
        out = np.zeros(A.shape[0])
        for k, p in self.terms:
            out += k.diag(_apply_projection(p, A))
        return out

    @property
    def max_diag(self):
        return float(sum(k.max_diag for k, _ in self.terms))


def kernel_eval(spec, a, b):
    """Kernel value between two joint points."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidArgument(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(spec(a[None, :], b[None, :])[0, 0])


# ----------------------------------------------------------------------------
# posterior


def _jittered_cholesky(A, scale=1.0):
    """Lower Cholesky factor, escalating diagonal jitter on failure."""
    try:
        return cholesky(A, lower=True, check_finite=False), 0.0
    except np.linalg.LinAlgError:
        pass
    n = A.shape[0]
    for jit in JITTER_LADDER:
        try:
            return cholesky(A + jit * scale * np.eye(n), lower=True, check_finite=False), jit * scale
        except np.linalg.LinAlgError:
            continue
    raise NumericalFailure(
        f"Cholesky failed for a {n}x{n} matrix even with jitter {JITTER_LADDER[-1] * scale:g}"
    )


class GPosterior:
    """Zero-mean GP posterior over every point of a finite grid.

    Points are addressed by flat joint index (see ``ProblemGrid.flat``).
    The state is single-owner and mutated in place by :meth:`update`.
    """

    def __init__(self, kernel, noise_var, coords, shape=None):
        if not (np.isfinite(noise_var) and noise_var > 0):
            raise InvalidArgument(f"noise_var must be > 0, got {noise_var!r}")
        self.kernel = kernel
        self.noise_var = float(noise_var)
        self.coords = np.asarray(coords, dtype=float)
        n = self.coords.shape[0]
        self.shape = shape if shape is not None else (n, 1)
        self.prior_var = kernel.diag(self.coords)
        self.obs_idx = []
        self.y = []
        self.gain_terms = []
        self.jitter = 0.0
        self.chol = np.zeros((0, 0))
        self._V = np.zeros((0, n))
        self._z = np.zeros(0)
        self._mean = np.zeros(n)
        self._var = self.prior_var.copy()
        self._cache = {}

    @property
    def n_obs(self):
        return len(self.obs_idx)

    @property
    def n_points(self):
        return self.coords.shape[0]

    @property
    def mean(self):
        return self._mean

    @property
    def var(self):
        return np.clip(self._var, 0.0, None)

    @property
    def sd(self):
        return np.sqrt(self.var)

    @property
    def alpha(self):
        """(K_t + noise I)^{-1} y_t."""
        if self.n_obs == 0:
            return np.zeros(0)
        return solve_triangular(self.chol, self._z, lower=True, trans="T")

    @property
    def V(self):
        return self._V

    def update(self, idx, y):
        """Condition on ``y`` observed at flat index ``idx``."""
        y = float(y)
        if not np.isfinite(y):
            raise InvalidArgument(f"observation must be finite, got {y!r}")
        idx = int(idx)
        if not 0 <= idx < self.n_points:
            raise InvalidArgument(f"index {idx} is outside the grid")
        var_before = max(self._var[idx], 0.0)
        self.gain_terms.append(0.5 * math.log1p(var_before / self.noise_var))
        self.obs_idx.append(idx)
        self.y.append(y)
        self._cache.clear()

        t = self.n_obs - 1
        l = self._V[:, idx].copy()
        d2 = self.prior_var[idx] + self.noise_var + self.jitter - l @ l
        if not (np.isfinite(d2) and d2 > 0.5 * self.noise_var):
            self.refactor()
            return self
        d = math.sqrt(d2)
        k_new = self.kernel(self.coords[idx][None, :], self.coords)[0]
        v_new = (k_new - l @ self._V) / d
        z_new = (y - l @ self._z) / d

        L = np.zeros((t + 1, t + 1))
        L[:t, :t] = self.chol
        L[t, :t] = l
        L[t, t] = d
        self.chol = L
        self._V = np.vstack([self._V, v_new])
        self._z = np.append(self._z, z_new)
        self._mean = self._mean + z_new * v_new
        self._var = self._var - v_new**2
        return self

    def refactor(self):
        """Recompute the factorization from scratch (with jitter if needed)."""
        self._cache.clear()
        if self.n_obs == 0:
            return self
        P = self.coords[self.obs_idx]
        K = self.kernel(P, P) + self.noise_var * np.eye(self.n_obs)
        self.chol, self.jitter = _jittered_cholesky(K, self.kernel.max_diag)
        Kx = self.kernel(P, self.coords)
        self._V = solve_triangular(self.chol, Kx, lower=True, check_finite=False)
        self._z = solve_triangular(self.chol, np.asarray(self.y), lower=True, check_finite=False)
        self._mean = self._V.T @ self._z
        self._var = self.prior_var - np.einsum("ij,ij->j", self._V, self._V)
        return self

    def mean_var_at(self, idx):
        """Posterior mean and variance at one point by the direct formulas."""
        k_star = self.kernel(self.coords[[idx]], self.coords)[0]
        if self.n_obs == 0:
            return 0.0, float(k_star[idx])
        P = self.coords[self.obs_idx]
        K = self.kernel(P, P) + (self.noise_var + self.jitter) * np.eye(self.n_obs)
        kt = self.kernel(P, self.coords[[idx]])[:, 0]
        sol = np.linalg.solve(K, np.column_stack([np.asarray(self.y), kt]))
        return float(kt @ sol[:, 0]), max(float(k_star[idx] - kt @ sol[:, 1]), 0.0)

    def covariance(self, idx):
        """Posterior covariance matrix among the given flat indices."""
        idx = np.asarray(idx, dtype=int)
        C = self.kernel(self.coords[idx], self.coords[idx])
        if self.n_obs:
            Vp = self._V[:, idx]
            C = C - Vp.T @ Vp
        return 0.5 * (C + C.T)


def posterior_init(kernel, noise_var, grid):
    """Prior state on ``grid``: zero mean, variance ``k(theta, theta)``."""
    return GPosterior(kernel, noise_var, grid.joint_coords, shape=(grid.n_x, grid.n_w))


def posterior_update(state, point, y):
    """Add an observation at ``point = (x, w)``; returns the same state."""
    x, w = point
    n_x, n_w = state.shape
    if not (0 <= x < n_x and 0 <= w < n_w):
        raise InvalidArgument(f"point {point} is outside the grid")
    return state.update(x * n_w + w, y)


def posterior_field(state, grid=None):
    """Mean and standard deviation as |X| x |Omega| matrices."""
    shape = state.shape if grid is None else (grid.n_x, grid.n_w)
    return state.mean.reshape(shape), state.sd.reshape(shape)


def _sample_from_cov(mean, C, S, rng, scale):
    diag = np.clip(np.diag(C), 0.0, None)
    if diag.max(initial=0.0) <= 1e-14 * scale:
        return np.repeat(mean[None, :], S, axis=0)
    L, _ = _jittered_cholesky(C, scale)
    Z = rng.standard_normal((C.shape[0], S))
    return (mean[:, None] + L @ Z).T


def sample_paths(state, grid, S, rng, rows=None):
    """Joint posterior draws over the grid, shape (S, |rows|, |Omega|).

    ``rows`` restricts the draw to a subset of design indices (all by default).
    """
    if S < 1:
        raise InvalidArgument("S must be >= 1")
    n_x, n_w = (grid.n_x, grid.n_w) if grid is not None else state.shape
    rows = np.arange(n_x) if rows is None else np.asarray(rows, dtype=int)
    idx = (rows[:, None] * n_w + np.arange(n_w)[None, :]).ravel()
    C = state.covariance(idx)
    draws = _sample_from_cov(state.mean[idx], C, S, rng, state.kernel.max_diag)
    return draws.reshape(S, rows.size, n_w)


@lru_cache(maxsize=4)
def _prior_factor(kernel, coords_bytes, n, d):
    coords = np.frombuffer(coords_bytes, dtype=float).reshape(n, d)
    L, _ = _jittered_cholesky(kernel(coords, coords), kernel.max_diag)
    return L


def prior_sample(kernel, coords, rng, S=1):
    """Draws from the zero-mean GP prior at ``coords``; shape (S, N).

    The Cholesky factor is cached, so repeated draws on the same lattice are
    cheap.
    """
    coords = np.ascontiguousarray(coords, dtype=float)
    L = _prior_factor(kernel, coords.tobytes(), *coords.shape)
    return (L @ rng.standard_normal((coords.shape[0], S))).T


def realized_info_gain(state):
    """``0.5 log det(I + K_t / noise)`` at the observed points."""
    if state.n_obs == 0:
        return 0.0
    eff_noise = state.noise_var + state.jitter
    return float(np.sum(np.log(np.diag(state.chol))) - 0.5 * state.n_obs * math.log(eff_noise))


def greedy_max_info_gain(kernel, noise_var, grid, T):
    """Greedy lower estimate of the maximum information gain for t = 1..T.

    Each step adds the point of largest posterior variance; repeats are
    allowed. By submodularity of log-det the true value is at most the
    returned value divided by ``1 - 1/e``.
    """
    state = posterior_init(kernel, noise_var, grid)
    gains = np.empty(T)
    total = 0.0
    for t in range(T):
        idx = int(np.argmax(state.var))
        total += 0.5 * math.log1p(state.var[idx] / noise_var)
        gains[t] = total
        state.update(idx, 0.0)
    return gains


CERTIFY_FACTOR = 1.0 / (1.0 - math.exp(-1.0))
