"""Benchmark problems: synthetic GP/Himmelblau functions and carrier lifetime."""

from __future__ import annotations

import csv
import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, InvalidArgument, ParseError
from .gp import SquaredExponential, prior_sample
from .grid import EnvDist, ProblemGrid

OBS_NOISE = 1e-6

# (M, D, s) lattices used by the synthetic problems
SYN2D = (5.0, 2, 50)
SYN4D = (2.5, 4, 15)
SYN6D = (2.0, 6, 7)


@dataclass(frozen=True)
class TabulatedOracle:
    """True function values on the grid plus an observation-noise level."""

    values: np.ndarray
    noise_var: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or not np.all(np.isfinite(v)):
            raise InvalidArgument("oracle table must be a finite 2-D array")
        if self.noise_var < 0:
            raise InvalidArgument("noise_var must be >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def evaluate(self, x, w, rng=None):
        """Table entry, plus Gaussian noise when an ``rng`` is supplied."""
        y = float(self.values[x, w])
        if rng is not None:
            y += math.sqrt(self.noise_var) * float(rng.standard_normal())
        return y


def _lattice(axis, d):
    return np.array(list(itertools.product(axis, repeat=d)), dtype=float)


def gen_grid(M, D, s, dist=None):
    """Uniform s-point lattice on [-M, M]^D, split evenly into X and Omega."""
    if not (M > 0 and D >= 2 and D % 2 == 0 and s >= 2):
        raise InvalidArgument(f"invalid lattice (M={M}, D={D}, s={s})")
    axis = np.linspace(-M, M, s)
    half = _lattice(axis, D // 2)
    return ProblemGrid(half, half.copy(), dist)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def synthetic_2d(grid, seed, kernel=SquaredExponential(1.0, 1.0)):
    """One GP prior draw tabulated over every joint grid point."""
    path = prior_sample(kernel, grid.joint_coords, _rng(seed))[0]
    return TabulatedOracle(path.reshape(grid.n_x, grid.n_w), OBS_NOISE)


def himmelblau(a, b):
    """Shifted and scaled Himmelblau function (to be maximized)."""
    return (-((a**2 + b - 11) ** 2 + (a + b**2 - 7) ** 2) + 104.8905) / math.sqrt(3281.531)


def himmelblau_oracle(grid):
    X, W = grid.X, grid.W
    a = X[:, None, 0] + W[None, :, 0]
    b = X[:, None, 1] + 0.5 * W[None, :, 1]
    return TabulatedOracle(himmelblau(a, b), OBS_NOISE)


SYN6D_COMPONENT_KERNEL = SquaredExponential(math.sqrt(1.75 / 2), 1.0)


def synthetic_6d(grid, seed, kernel=SYN6D_COMPONENT_KERNEL):
    """Sum of four independent 3-D GP draws wired as
    f1(x1,x2,x3) + f2(x2,x3,w1) + f3(x3,w1,w2) + f4(w1,w2,w3).
    """
    s = round(grid.n_x ** (1 / 3))
    if s**3 != grid.n_x or grid.X.shape[1] != 3 or grid.W.shape[1] != 3:
        raise InvalidArgument("synthetic_6d needs a 3+3 dimensional cubic lattice")
    rng = _rng(seed)
    sub = grid.X  # the same axis lattice serves every component
    f = prior_sample(kernel, sub, rng, S=4)
    ix = np.arange(grid.n_x)
    i1, i2, i3 = ix // (s * s), (ix // s) % s, ix % s
    j1, j2 = i1, i2  # Omega uses the same enumeration
    I = lambda a, b, c: (a * s + b) * s + c  # noqa: E731
    values = (
        f[0][ix][:, None]
        + f[1][I(i2[:, None], i3[:, None], j1[None, :])]
        + f[2][I(i3[:, None], j1[None, :], j2[None, :])]
        + f[3][ix][None, :]
    )
    return TabulatedOracle(values, OBS_NOISE)


def _normalized(weights):
    w = np.asarray(weights, dtype=np.longdouble)
    return np.asarray(w / w.sum(), dtype=float)


def _phi(a):
    return np.exp(-0.5 * np.asarray(a, dtype=np.longdouble) ** 2) / np.sqrt(2 * np.pi)


def benchmark_pmf(setting):
    """Environment pmf of a benchmark: '2d', '4d', '6d' or 'carrier'."""
    setting = setting.lower()
    if setting == "2d":
        return EnvDist.uniform(50)
    if setting == "carrier":
        return EnvDist.uniform(99)
    if setting == "4d":
        A = np.array([-2.5 + 2.5 * (i - 1) / 7 for i in range(1, 16)])
        phi = _normalized(0.25 * _phi(A - 1) + 0.75 * _phi(A + 5))
        return EnvDist(_normalized(np.outer(phi, phi).ravel()))
    if setting == "6d":
        B = np.array([-2 + 2 * (i - 1) / 3 for i in range(1, 8)])
        p1, p2, p3 = (_normalized(_phi(B + c)) for c in (-1, 0, 1))
        return EnvDist(_normalized(np.einsum("i,j,k->ijk", p1, p2, p3).ravel()))
    raise InvalidArgument(f"unknown benchmark setting {setting!r}")


paper_pmf = benchmark_pmf  # name kept for existing callers


# ----------------------------------------------------------------------------
# carrier lifetime

CARRIER_X = np.array([(22 * a - 4, 18 * b - 2) for a in range(1, 9) for b in range(1, 9)], float)
CARRIER_W = np.array([(2 * a - 12, 2 * b - 10) for a in range(1, 12) for b in range(1, 10)], float)
CARRIER_LATTICE = [(2 * a + 6, 2 * b + 6) for a in range(1, 89) for b in range(1, 73)]


def _read_lifetime_csv(path):
    table = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x1", "x2", "lt"]:
            raise ParseError(f"expected header 'x1,x2,lt', got {header!r}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
            try:
                x1, x2, lt = (float(c) for c in row)
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if not all(map(math.isfinite, (x1, x2, lt))):
                raise ParseError("non-finite value", line=lineno)
            key = (x1, x2)
            if key in table:
                warnings.warn(f"duplicate coordinate {key} at line {lineno}; keeping the last value")
            table[key] = lt
    return table


def load_carrier_lifetime(path):
    """Build the 64 x 99 table ``LT(x + w)`` from an ``x1,x2,lt`` CSV.

    Returns ``(oracle, grid)``. Observations are noiseless.
    """
    table = _read_lifetime_csv(path)
    values = np.empty((len(CARRIER_X), len(CARRIER_W)))
    for i, x in enumerate(CARRIER_X):
        for j, w in enumerate(CARRIER_W):
            key = (float(x[0] + w[0]), float(x[1] + w[1]))
            if key not in table:
                raise DataError(f"lifetime file has no entry for coordinate ({key[0]:g}, {key[1]:g})")
            values[i, j] = table[key]
    grid = ProblemGrid(CARRIER_X, CARRIER_W, benchmark_pmf("carrier"))
    return TabulatedOracle(values, 0.0), grid


def generate_carrier_standin(path, seed=0):
    """Write a smooth synthetic lifetime surface on the carrier lattice.

    The original measurements are not redistributable; this stand-in keeps the
    file contract and a comparable value range for tests and demos.
    """
    rng = np.random.default_rng(seed)
    pts = np.array(CARRIER_LATTICE, float)
    centers = rng.uniform([8, 8], [182, 150], size=(6, 2))
    widths = rng.uniform(15, 45, size=6)
    heights = rng.uniform(0.5, 2.0, size=6)
    d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(-1)
    lt = 2.0 + (heights * np.exp(-0.5 * d2 / widths**2)).sum(-1)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x1", "x2", "lt"])
        for (a, b), v in zip(pts, lt):
            wr.writerow([int(a), int(b), repr(float(v))])
    return path


# ----------------------------------------------------------------------------


def true_optimum(oracle, spec, dist):
    """Exhaustive ``(x*, F(x*), F)`` with lowest-index tie-break."""
    F = np.asarray(spec.evaluate(oracle.values, dist), dtype=float)
    x_star = int(np.argmax(F))
    return x_star, float(F[x_star]), F


__all__ = [
    "TabulatedOracle", "gen_grid", "synthetic_2d", "himmelblau", "himmelblau_oracle",
    "synthetic_6d", "benchmark_pmf", "load_carrier_lifetime", "generate_carrier_standin",
    "true_optimum",
]
