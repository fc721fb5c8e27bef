"""Learning-automata convergence benchmark toolkit."""

from .automata import Automaton, AutomatonConfig, StepEvent, first_strategy_update, second_strategy_update
from .env import Environment, benchmark_environment, load_environment_file, parse_probabilities
from .estimator import Estimator
from .experiment import (BEST_PARAMS, DCA_MATCHED_PARAMS, BatchSummary, RunResult, Trace,
                         run_batch, run_until_convergence, selection_histogram, trace_run)
from .rng import RandomStream, derive_seed, derive_seeds
from .tuning import TuningResult, TuningSpec, grid_search, passes_ne_constraint

__all__ = [
    "Automaton", "AutomatonConfig", "StepEvent", "first_strategy_update",
    "second_strategy_update", "Environment", "benchmark_environment",
    "load_environment_file", "parse_probabilities", "Estimator",
    "BEST_PARAMS", "DCA_MATCHED_PARAMS", "BatchSummary", "RunResult", "Trace",
    "run_batch", "run_until_convergence", "selection_histogram", "trace_run",
    "RandomStream", "derive_seed", "derive_seeds",
    "TuningResult", "TuningSpec", "grid_search", "passes_ne_constraint",
]
