import math
import warnings

import numpy as np
import pytest
from scipy.stats import norm

from robustbo import bench
from robustbo.errors import DataError, InvalidArgument, ParseError
from robustbo.grid import EnvDist
from robustbo.measures import Expectation


def test_lattice_sizes():
    g = bench.gen_grid(*bench.SYN2D)
    assert (g.n_x, g.n_w, g.size) == (50, 50, 2500)
    g = bench.gen_grid(*bench.SYN4D)
    assert (g.n_x, g.n_w) == (225, 225)
    g = bench.gen_grid(*bench.SYN6D)
    assert (g.n_x, g.n_w) == (343, 343)
    assert g.X.min() == -2.0 and g.X.max() == 2.0
    with pytest.raises(InvalidArgument):
        bench.gen_grid(1.0, 3, 5)


def test_joint_index_is_row_major():
    g = bench.gen_grid(1.0, 2, 3)
    assert g.flat(1, 2) == 5
    assert g.unflat(5) == (1, 2)
    np.testing.assert_array_equal(g.joint_coords[5], [0.0, 1.0])


def test_himmelblau_values():
    # (3, 2) is a global minimum of the unshifted function
    assert bench.himmelblau(3.0, 2.0) == pytest.approx(1.8310402875411118, rel=1e-14)
    assert bench.himmelblau(0.0, 0.0) == pytest.approx(-1.13659595103139, rel=1e-12)


def test_himmelblau_oracle_wiring():
    g = bench.gen_grid(*bench.SYN4D)
    orc = bench.himmelblau_oracle(g)
    x, w = 17, 200
    a = g.X[x, 0] + g.W[w, 0]
    b = g.X[x, 1] + 0.5 * g.W[w, 1]
    assert orc.values[x, w] == pytest.approx(bench.himmelblau(a, b))


def test_pmfs_match_direct_formulas():
    assert np.allclose(bench.benchmark_pmf("2d").pmf, 1 / 50)
    assert np.allclose(bench.benchmark_pmf("carrier").pmf, 1 / 99)
    A = np.array([-2.5 + 2.5 * (i - 1) / 7 for i in range(1, 16)])
    m = 0.25 * norm.pdf(A - 1) + 0.75 * norm.pdf(A + 5)
    m /= m.sum()
    np.testing.assert_allclose(bench.benchmark_pmf("4d").pmf, np.outer(m, m).ravel(), rtol=1e-12)
    B = np.array([-2 + 2 * (i - 1) / 3 for i in range(1, 8)])
    ps = [norm.pdf(B + c) / norm.pdf(B + c).sum() for c in (-1, 0, 1)]
    full = np.einsum("i,j,k->ijk", *ps).ravel()
    np.testing.assert_allclose(bench.benchmark_pmf("6d").pmf, full, rtol=1e-12)
    with pytest.raises(InvalidArgument):
        bench.benchmark_pmf("3d")


def test_synthetic_2d_reproducible_and_distinct():
    g = bench.gen_grid(*bench.SYN2D)
    a = bench.synthetic_2d(g, 1).values
    b = bench.synthetic_2d(g, 1).values
    c = bench.synthetic_2d(g, 2).values
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_synthetic_2d_marginal_variance():
    g = bench.gen_grid(5.0, 2, 12)
    draws = np.stack([bench.synthetic_2d(g, s).values for s in range(100)])
    v = draws.var(axis=0)
    assert abs(v.mean() - 1.0) < 0.2


def test_synthetic_6d_wiring():
    g = bench.gen_grid(*bench.SYN6D)
    v = bench.synthetic_6d(g, 3).values
    s = 7
    idx = lambda a, b, c: (a * s + b) * s + c  # noqa: E731
    x = idx(1, 2, 3)
    # varying w3 alone only touches the f4 component
    d_w3 = v[:, idx(4, 5, 0)] - v[:, idx(4, 5, 6)]
    assert np.allclose(d_w3, d_w3[0])
    # varying x1 alone only touches f1
    d_x1 = v[idx(0, 2, 3), :] - v[idx(6, 2, 3), :]
    assert np.allclose(d_x1, d_x1[0])
    # varying w1 changes f2, f3 and f4, so the difference depends on x
    d_w1 = v[:, idx(0, 5, 5)] - v[:, idx(6, 5, 5)]
    assert not np.allclose(d_w1, d_w1[x])
    np.testing.assert_array_equal(v, bench.synthetic_6d(g, 3).values)


def test_oracle_noise_only_with_rng():
    orc = bench.TabulatedOracle(np.zeros((2, 2)), 1e-2)
    assert orc.evaluate(0, 1) == 0.0
    ys = [orc.evaluate(0, 1, np.random.default_rng(s)) for s in range(2000)]
    assert abs(np.std(ys) - 0.1) < 0.01
    with pytest.raises(InvalidArgument):
        bench.TabulatedOracle(np.array([[np.inf]]))


def test_carrier_standin_round_trip(tmp_path):
    p = tmp_path / "lt.csv"
    bench.generate_carrier_standin(p)
    oracle, grid = bench.load_carrier_lifetime(p)
    assert oracle.values.shape == (64, 99)
    assert oracle.noise_var == 0.0
    assert np.all(np.isfinite(oracle.values))
    lines = p.read_text().splitlines()
    assert lines[0] == "x1,x2,lt" and len(lines) == 6337
    # f(x, w) = LT(x + w)
    x, w = 5, 40
    key = (grid.X[x] + grid.W[w]).astype(int)
    row = [ln for ln in lines[1:] if ln.startswith(f"{key[0]},{key[1]},")][0]
    assert oracle.values[x, w] == float(row.split(",")[2])


def test_carrier_lattice_sum_covers_subset():
    sums = {tuple(x + w) for x in bench.CARRIER_X for w in bench.CARRIER_W}
    assert sums == {tuple(map(float, c)) for c in bench.CARRIER_LATTICE}
    assert len(bench.CARRIER_LATTICE) == 6336


def test_carrier_missing_point(tmp_path):
    p = tmp_path / "lt.csv"
    bench.generate_carrier_standin(p)
    lines = p.read_text().splitlines()
    p.write_text("\n".join(ln for ln in lines if not ln.startswith("8,8,")) + "\n")
    with pytest.raises(DataError, match=r"\(8, 8\)"):
        bench.load_carrier_lifetime(p)


def test_carrier_parse_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ParseError) as ei:
        bench.load_carrier_lifetime(p)
    assert ei.value.line == 1
    p.write_text("x1,x2,lt\n8,8,1.0\n8,10,abc\n")
    with pytest.raises(ParseError) as ei:
        bench.load_carrier_lifetime(p)
    assert ei.value.line == 3


def test_carrier_duplicate_keeps_last(tmp_path):
    p = tmp_path / "lt.csv"
    bench.generate_carrier_standin(p)
    with open(p, "a") as fh:
        fh.write("8,8,123.0\n")
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        oracle, grid = bench.load_carrier_lifetime(p)
    assert any("duplicate" in str(r.message) for r in rec)
    x = int(np.where((grid.X == [18, 16]).all(1))[0][0])
    w = int(np.where((grid.W == [-10, -8]).all(1))[0][0])
    assert oracle.values[x, w] == 123.0


def test_true_optimum_lowest_index_on_ties():
    orc = bench.TabulatedOracle(np.array([[0.0, 1.0], [1.0, 0.0], [0.0, 0.0]]))
    x_star, F_star, F = bench.true_optimum(orc, Expectation(), EnvDist.uniform(2))
    assert x_star == 0 and F_star == pytest.approx(0.5) and math.isclose(F[1], 0.5)
