"""Config-driven campaigns: repetitions x strategies x iterations, CSV output.

Configuration files are TOML restricted to scalar and list values; nesting is
written with dotted keys (``problem.name = "syn2d"``). The accepted keys are
listed in :data:`CONFIG_KEYS` and documented in ``docs/config.md``.
"""

from __future__ import annotations

import concurrent.futures
import csv
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import bench
from .diagnostics import bound_general_series, certified_gamma
from .errors import ConfigError, DataError, InvalidArgument, NumericalFailure
from .gp import Matern32, SquaredExponential, Sum, greedy_max_info_gain, posterior_init
from .grid import EnvDist, ProblemGrid
from .measures import Expectation, ProbThreshold, exp_mae, has_q, q_form
from .policy import STRATEGIES, SETTINGS, Acquisition, RunTrace, Streams, run_iteration

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

PROBLEMS = ("syn2d", "syn4d", "syn6d", "carrier", "custom")
MEASURES = ("exp", "ptr", "exp-mae")
HAT_T_MODES = ("off", "exact", "mc")
GP_NOISE = 1e-6

# (h, alpha) and BPT-UCB constant c per problem
PRESETS = {
    "syn2d": (0.5, 1.0, 1.0),
    "syn4d": (0.18, 4.0, 1.0),
    "syn6d": (2.0, 8.0, 1.0),
    "carrier": (2.9, 4.0, 2.0),
    "custom": (0.0, 1.0, 1.0),
}

CONFIG_KEYS = {
    "problem.name": str, "problem.path": str, "problem.noise_var": float,
    "kernel.name": str, "kernel.lengthscale": float, "kernel.variance": float,
    "measure.name": str, "measure.h": float, "measure.alpha": float,
    "setting": str, "strategies": list, "iterations": int, "repetitions": int,
    "seed": int, "output": str, "bound_check": bool, "hat_t.mode": str,
    "hat_t.samples": int, "workers": int, "bptucb.c": float,
}
REQUIRED = ("problem.name", "measure.name", "strategies", "iterations", "repetitions")

REGRET_HEADER = ("t", "mean_regret", "se2")
TRACE_HEADER = ("t", "beta", "x_index", "w_index", "y", "xhat_index", "regret", "info_gain")
BOUNDS_HEADER = ("t", "gamma_hat", "gamma_certified", "bound_ER", "bound_er", "markov_R_0.05")


@dataclass(frozen=True)
class CampaignConfig:
    problem: str
    measure: str
    strategies: tuple
    iterations: int
    repetitions: int
    seed: int = 0
    setting: str = "simulator"
    problem_path: str | None = None
    h: float | None = None
    alpha: float | None = None
    output: str = "results"
    bound_check: bool = False
    hat_t: str = "off"
    hat_t_samples: int = 256
    workers: int = 1
    bpt_c: float | None = None
    kernel: str = "se"
    lengthscale: float = 1.0
    variance: float = 1.0
    noise_var: float = bench.OBS_NOISE

    @property
    def threshold(self):
        return PRESETS[self.problem][0] if self.h is None else self.h

    @property
    def mae_weight(self):
        return PRESETS[self.problem][1] if self.alpha is None else self.alpha

    @property
    def bpt_constant(self):
        return PRESETS[self.problem][2] if self.bpt_c is None else self.bpt_c

    def measure_spec(self):
        if self.measure == "exp":
            return Expectation()
        if self.measure == "ptr":
            return ProbThreshold(self.threshold)
        return exp_mae(self.mae_weight)


# ----------------------------------------------------------------------------
# parsing


def _flatten(table, prefix=""):
    out = {}
    for key, val in table.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flatten(val, name + "."))
        else:
            out[name] = val
    return out


def _typed(name, val, kind, problems):
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    ok = isinstance(val, kind) and (kind is bool or not isinstance(val, bool))
    if not ok:
        problems.append(f"{name}: expected {kind.__name__}, got {type(val).__name__}")
        return None
    return val


def config_from_mapping(raw, base_dir="."):
    """Validate a flat-or-nested mapping; collect every violation."""
    flat = _flatten(raw)
    problems = []
    vals = {}
    for name, val in flat.items():
        if name not in CONFIG_KEYS:
            problems.append(f"unknown key {name!r}")
            continue
        v = _typed(name, val, CONFIG_KEYS[name], problems)
        if v is not None:
            vals[name] = v
    for name in REQUIRED:
        if name not in flat:
            problems.append(f"missing required key {name!r}")

    def choice(name, allowed, default=None):
        v = vals.get(name, default)
        if v is None:
            return None
        v = v.lower()
        if v not in allowed:
            problems.append(f"{name}: unknown value {v!r} (allowed: {', '.join(allowed)})")
        return v

    problem = choice("problem.name", PROBLEMS)
    measure = choice("measure.name", MEASURES)
    setting = choice("setting", SETTINGS, "simulator")
    hat_t = choice("hat_t.mode", HAT_T_MODES, "off")
    kernel = choice("kernel.name", ("se", "matern32"), "se")

    strategies = []
    for s in vals.get("strategies", []):
        if not isinstance(s, str):
            problems.append(f"strategies: entries must be strings, got {s!r}")
        elif s.lower() not in STRATEGIES:
            problems.append(f"unknown strategy {s!r}")
        elif s.lower() in strategies:
            problems.append(f"duplicate strategy {s!r}")
        else:
            strategies.append(s.lower())
    if "strategies" in vals and not vals["strategies"]:
        problems.append("strategies: at least one strategy is required")

    def positive(name, default=None, strict=True):
        v = vals.get(name, default)
        if v is not None and not (v > 0 if strict else v >= 0):
            problems.append(f"{name}: must be {'> 0' if strict else '>= 0'}, got {v!r}")
        return v

    iterations = positive("iterations")
    repetitions = positive("repetitions")
    workers = positive("workers", 1)
    samples = positive("hat_t.samples", 256)
    bpt_c = positive("bptucb.c")
    lengthscale = positive("kernel.lengthscale", 1.0)
    variance = positive("kernel.variance", 1.0)
    noise_var = positive("problem.noise_var", bench.OBS_NOISE, strict=False)
    alpha = positive("measure.alpha", strict=False)
    if "seed" in flat:
        seed = vals.get("seed", 0)
        if seed is not None and seed < 0:
            problems.append(f"seed: must be >= 0, got {seed!r}")
    else:
        seed = 0
        warnings.warn("config has no 'seed'; using 0")

    path = vals.get("problem.path")
    if problem in ("carrier", "custom") and path is None:
        problems.append(f"problem.path is required for problem {problem!r}")
    if path is not None and not os.path.isabs(path):
        path = os.path.normpath(os.path.join(base_dir, path))
    custom_only = [k for k in flat if k.startswith("kernel.") or k == "problem.noise_var"]
    if problem not in (None, "custom") and custom_only:
        problems.append(f"{', '.join(custom_only)} only apply to problem 'custom'")

    if problems:
        raise ConfigError(problems)
    output = vals.get("output", "results")
    if not os.path.isabs(output):
        output = os.path.normpath(os.path.join(base_dir, output))
    return CampaignConfig(
        problem=problem, measure=measure, strategies=tuple(strategies),
        iterations=iterations, repetitions=repetitions, seed=seed, setting=setting,
        problem_path=path, h=vals.get("measure.h"), alpha=alpha, output=output,
        bound_check=vals.get("bound_check", False), hat_t=hat_t, hat_t_samples=samples,
        workers=workers, bpt_c=bpt_c, kernel=kernel, lengthscale=lengthscale,
        variance=variance, noise_var=noise_var,
    )


def parse_config(path):
    """Read and validate a campaign file; raises ConfigError listing all problems."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return config_from_mapping(raw, os.path.dirname(os.path.abspath(path)))


# ----------------------------------------------------------------------------
# problems


@dataclass
class Problem:
    grid: ProblemGrid
    oracle: bench.TabulatedOracle
    kernel: object
    gp_noise: float = GP_NOISE


SYN6D_KERNEL = Sum((
    (SquaredExponential(math.sqrt(0.875), 1.25), (0, 1, 2)),
    (SquaredExponential(math.sqrt(0.875), 0.75), (1, 2, 3)),
    (SquaredExponential(1.0, 1.0), (2, 3, 4)),
    (SquaredExponential(math.sqrt(0.75), 1.0), (3, 4, 5)),
))
CARRIER_KERNEL = Sum(((Matern32(25.0, 4.0), [[1, 0, 1, 0], [0, 1, 0, 1]]),))


def load_custom_problem(path):
    """``.npz`` with arrays ``X``, ``W``, ``values`` and optionally ``pmf``."""
    try:
        data = np.load(path)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read problem file {path}: {exc}") from None
    missing = [k for k in ("X", "W", "values") if k not in data]
    if missing:
        raise DataError(f"problem file {path} lacks arrays {missing}")
    X, W, values = (np.asarray(data[k], float) for k in ("X", "W", "values"))
    X = X.reshape(len(X), -1)
    W = W.reshape(len(W), -1)
    if values.shape != (len(X), len(W)):
        raise DataError(f"values has shape {values.shape}, expected {(len(X), len(W))}")
    try:
        dist = EnvDist(data["pmf"]) if "pmf" in data else EnvDist.uniform(len(W))
    except InvalidArgument as exc:
        raise DataError(str(exc)) from None
    return X, W, values, dist


def build_problem(cfg, truth_rng):
    """Grid, oracle and surrogate kernel; random truths draw from ``truth_rng``."""
    if cfg.problem == "syn2d":
        grid = bench.gen_grid(*bench.SYN2D, dist=bench.benchmark_pmf("2d"))
        kern = SquaredExponential(1.0, 1.0)
        return Problem(grid, bench.synthetic_2d(grid, truth_rng, kern), kern)
    if cfg.problem == "syn4d":
        grid = bench.gen_grid(*bench.SYN4D, dist=bench.benchmark_pmf("4d"))
        return Problem(grid, bench.himmelblau_oracle(grid), SquaredExponential(math.sqrt(5.0)))
    if cfg.problem == "syn6d":
        grid = bench.gen_grid(*bench.SYN6D, dist=bench.benchmark_pmf("6d"))
        return Problem(grid, bench.synthetic_6d(grid, truth_rng), SYN6D_KERNEL)
    if cfg.problem == "carrier":
        oracle, grid = bench.load_carrier_lifetime(cfg.problem_path)
        return Problem(grid, oracle, CARRIER_KERNEL)
    X, W, values, dist = load_custom_problem(cfg.problem_path)
    kcls = SquaredExponential if cfg.kernel == "se" else Matern32
    return Problem(ProblemGrid(X, W, dist), bench.TabulatedOracle(values, cfg.noise_var),
                   kcls(cfg.lengthscale, cfg.variance), max(cfg.noise_var, GP_NOISE))


# ----------------------------------------------------------------------------
# running


@dataclass
class CampaignResult:
    config: CampaignConfig
    traces: dict  # strategy -> list of RunTrace, by repetition
    mean: dict = field(default_factory=dict)
    se2: dict = field(default_factory=dict)
    bounds: dict | None = None

    def cumulative_mean(self, strategy):
        regs = np.array([tr.column("regret") for tr in self.traces[strategy]])
        return np.cumsum(regs, axis=1).mean(axis=0)


def _rep_seeds(seed, rep):
    return np.random.SeedSequence(seed, spawn_key=(rep,)).spawn(3)


def _initial_point(grid, setting, rng):
    if setting == "simulator":
        return grid.unflat(int(rng.integers(grid.size)))
    return int(rng.integers(grid.n_x)), int(rng.choice(grid.n_w, p=grid.dist.pmf))


def _with_context(exc, strategy, rep, t):
    msg = f"[strategy={strategy}, repetition={rep}, iteration={t}] {exc}"
    for kind in (NumericalFailure, DataError, InvalidArgument):
        if isinstance(exc, kind):
            return kind(msg)
    return RuntimeError(msg)


def run_repetition(cfg, rep, problem=None):
    """Every strategy on repetition ``rep``; all strategies share truth and seeds."""
    truth_ss, init_ss, run_ss = _rep_seeds(cfg.seed, rep)
    if problem is None:
        problem = build_problem(cfg, np.random.default_rng(truth_ss))
    grid, oracle = problem.grid, problem.oracle
    spec = cfg.measure_spec()
    x_star, F_star, F = bench.true_optimum(oracle, spec, grid.dist)
    out = {}
    for strategy in cfg.strategies:
        acq = Acquisition(strategy, cfg.setting, cfg.threshold, cfg.bpt_constant,
                          cfg.hat_t, cfg.hat_t_samples)
        t = 0
        try:
            state = posterior_init(problem.kernel, problem.gp_noise, grid)
            init_rng = np.random.default_rng(init_ss)
            x0, w0 = _initial_point(grid, cfg.setting, init_rng)
            state.update(grid.flat(x0, w0), oracle.evaluate(x0, w0, init_rng))
            streams = Streams(run_ss)
            history = [] if cfg.hat_t != "off" else None
            trace = RunTrace()
            for t in range(1, cfg.iterations + 1):
                trace.append(run_iteration(state, grid, spec, oracle, streams, t, acq,
                                           truth=(F, F_star), history=history))
        except Exception as exc:
            raise _with_context(exc, strategy, rep, t) from exc
        out[strategy] = trace
    return out


def _run_rep_job(args):
    cfg, rep = args
    return run_repetition(cfg, rep)


def aggregate(traces):
    """Per-iteration mean regret and twice its standard error."""
    regs = np.array([tr.column("regret") for tr in traces])
    mean = regs.mean(axis=0)
    if regs.shape[0] > 1:
        se2 = 2.0 * regs.std(axis=0, ddof=1) / math.sqrt(regs.shape[0])
    else:
        se2 = np.full(regs.shape[1], math.nan)
    return mean, se2


def compute_bounds(cfg, problem=None):
    """Bound table for t = 1..T, or ``None`` when the measure has no q(a)."""
    if problem is None:
        problem = build_problem(cfg, np.random.default_rng(_rep_seeds(cfg.seed, 0)[0]))
    spec = cfg.measure_spec()
    T = cfg.iterations
    gamma_hat = greedy_max_info_gain(problem.kernel, problem.gp_noise, problem.grid, T)
    gamma_cert = certified_gamma(gamma_hat)
    table = {"t": np.arange(1, T + 1), "gamma_hat": gamma_hat, "gamma_certified": gamma_cert}
    if not has_q(spec):
        table["guarantee"] = False
        return table
    p_min = problem.grid.dist.p_min if cfg.setting == "uncontrollable" else None
    ER = bound_general_series(q_form(spec), problem.grid.size, problem.gp_noise,
                              gamma_cert, p_min)
    table.update(guarantee=True, bound_ER=ER, bound_er=ER / table["t"], markov=ER / 0.05)
    return table


def run_campaign(cfg):
    """All strategies x repetitions; deterministic for a fixed config and seed."""
    jobs = [(cfg, rep) for rep in range(cfg.repetitions)]
    if cfg.workers > 1 and cfg.repetitions > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            per_rep = list(pool.map(_run_rep_job, jobs))  # map keeps repetition order
    else:
        per_rep = [_run_rep_job(job) for job in jobs]
    traces = {s: [r[s] for r in per_rep] for s in cfg.strategies}
    result = CampaignResult(cfg, traces)
    for s, trs in traces.items():
        result.mean[s], result.se2[s] = aggregate(trs)
    if cfg.bound_check:
        result.bounds = compute_bounds(cfg)
    return result


# ----------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow(row if isinstance(row[-1], str) else [_fmt(v) for v in row])


def write_bounds_csv(table, directory):
    path = os.path.join(directory, "bounds.csv")
    if table["guarantee"]:
        rows = zip(table["t"], table["gamma_hat"], table["gamma_certified"],
                   table["bound_ER"], table["bound_er"], table["markov"])
    else:
        rows = ([_fmt(t), _fmt(g), _fmt(c), "no_guarantee", "no_guarantee", "no_guarantee"]
                for t, g, c in zip(table["t"], table["gamma_hat"], table["gamma_certified"]))
    _write(path, BOUNDS_HEADER, rows)
    return path


def emit_csv(result, directory=None):
    """Write regret summaries, per-run traces and (optionally) bounds; returns paths."""
    directory = directory or result.config.output
    os.makedirs(directory, exist_ok=True)
    paths = []
    for s in result.config.strategies:
        p = os.path.join(directory, f"regret_{s}.csv")
        t = np.arange(1, len(result.mean[s]) + 1)
        _write(p, REGRET_HEADER, zip(t, result.mean[s], result.se2[s]))
        paths.append(p)
        for rep, trace in enumerate(result.traces[s]):
            p = os.path.join(directory, f"trace_{s}_{rep}.csv")
            _write(p, TRACE_HEADER, ((r.t, r.beta, r.x, r.w, r.y, r.x_hat, r.regret,
                                      r.info_gain) for r in trace))
            paths.append(p)
    if result.bounds is not None:
        paths.append(write_bounds_csv(result.bounds, directory))
    return paths
