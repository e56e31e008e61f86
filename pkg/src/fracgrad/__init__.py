"""Fractional-order gradient descent with a short memory step.

The update for each parameter tensor truncates a fractional-power series at
M terms; plain gradient descent is the exact alpha = 1, M = 1 special case.
The package covers standalone convex optimization, training a small CNN with
fractional per-parameter updates over integer-order backprop, and a CLI for
runs and accuracy sweeps.
"""

from .config import PRESETS, FgdConfig
from .data import Dataset, IngestionError, SplitData, UnsupportedImageFormat, load_image_folder, synth_dataset
from .deriv_oracle import AnalyticFunction, HistoryWindow, analytic_stack, history_stack
from .estimator import FgdClassifier
from .frac_math import DerivativeStack, fractional_gradient, gamma, series_tail_bound
from .functions import make_test_functions
from .optimizer import (
    DivergenceError,
    NumericError,
    ParamState,
    StepReport,
    Trajectory,
    init_state,
    run_to_convergence,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "FgdConfig",
    "Dataset",
    "SplitData",
    "IngestionError",
    "UnsupportedImageFormat",
    "load_image_folder",
    "synth_dataset",
    "AnalyticFunction",
    "HistoryWindow",
    "analytic_stack",
    "history_stack",
    "FgdClassifier",
    "DerivativeStack",
    "fractional_gradient",
    "gamma",
    "series_tail_bound",
    "make_test_functions",
    "DivergenceError",
    "NumericError",
    "ParamState",
    "StepReport",
    "Trajectory",
    "init_state",
    "run_to_convergence",
    "step",
    "__version__",
]
