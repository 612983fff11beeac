"""SGD with stochastic Polyak step-sizes: step rules, problems with exact oracles, and bound checks."""

from .analysis import BoundReport, BoundSpec, check_bound, evaluate_bound
from .core import (BatchSchedule, Convexity, FiniteSumProblem, FunctionProblem, ProblemConstants, RunConfig,
                   Trajectory, TrajectoryRecord, validate_problem)
from .engine import NumericalAbort, Sampler, run_ensemble, run_sgd, run_subgradient
from .problems import solve_exact
from .stepsize import OracleInconsistencyError, StepSizeRule, sps, sps_max

__all__ = [
    "BatchSchedule", "BoundReport", "BoundSpec", "Convexity", "FiniteSumProblem", "FunctionProblem",
    "NumericalAbort", "OracleInconsistencyError", "ProblemConstants", "RunConfig", "Sampler", "StepSizeRule",
    "Trajectory", "TrajectoryRecord", "check_bound", "evaluate_bound", "run_ensemble", "run_sgd",
    "run_subgradient", "solve_exact", "sps", "sps_max", "validate_problem",
]
