"""Multi-trial experiments and reporting."""

from .config import ARMS, ConfigError, ExperimentConfig
from .experiment import (
    AGG_HEADER,
    CSV_HEADER,
    PartialFailureError,
    RunResult,
    TrialResult,
    aggregate_curves,
    aggregate_from_dir,
    read_trial_csv,
    run_experiment,
    run_trial,
    step_grid,
)
from .report import plot_curves, report_qvalues

__all__ = [
    "AGG_HEADER", "ARMS", "CSV_HEADER", "ConfigError", "ExperimentConfig", "PartialFailureError",
    "RunResult", "TrialResult", "aggregate_curves", "aggregate_from_dir", "plot_curves",
    "read_trial_csv", "report_qvalues", "run_experiment", "run_trial", "step_grid",
]
