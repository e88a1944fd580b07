"""Bayesian optimization of robustness measures on finite grids.

Submodules
----------
gp           GP posterior with incremental Cholesky updates, kernels, information gain
measures     robustness measures, their credible bounds and width functions
policy       randomized-beta UCB acquisition, baselines, one loop iteration
bench        benchmark problems and the carrier-lifetime loader
diagnostics  regret series and theoretical regret bounds
campaign     config-driven campaigns and CSV output
"""

from .errors import (ConfigError, DataError, InvalidArgument, MeasureHasNoQ,
                     NumericalFailure, ParseError)
from .grid import EnvDist, ProblemGrid
from .gp import (GPosterior, Matern32, SquaredExponential, Sum, greedy_max_info_gain,
                 posterior_field, posterior_init, posterior_update, sample_paths)
from .measures import (BestCase, CVaR, DistRobust, Expectation, MeanAbsDev,
                       MonotoneLipschitz, ProbThreshold, StdDev, ValueAtRisk, Variance,
                       WeightedSum, WorstCase, bounds_exact, bounds_sampled, exp_mae,
                       measure_eval, q_form, q_value)
from .policy import (Acquisition, Streams, credible_field, estimate_solution, run_iteration,
                     sample_beta, select_x_proposed)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DataError", "InvalidArgument", "MeasureHasNoQ", "NumericalFailure",
    "ParseError", "EnvDist", "ProblemGrid", "GPosterior", "Matern32", "SquaredExponential",
    "Sum", "greedy_max_info_gain", "posterior_field", "posterior_init", "posterior_update",
    "sample_paths", "BestCase", "CVaR", "DistRobust", "Expectation", "MeanAbsDev",
    "MonotoneLipschitz", "ProbThreshold", "StdDev", "ValueAtRisk", "Variance", "WeightedSum",
    "WorstCase", "bounds_exact", "bounds_sampled", "exp_mae", "measure_eval", "q_form",
    "q_value", "Acquisition", "Streams", "credible_field", "estimate_solution",
    "run_iteration", "sample_beta", "select_x_proposed",
]
