"""Benchmark harness: configs, runs, checkpoint tables and figures."""

from .config import ConfigError, ExperimentConfig, OptimizerSpec, from_dict, load_config
from .report import (
    CdfCurve,
    SummaryRow,
    cdf_csv,
    cumulative_distribution,
    emit_plots,
    format_summary,
    summary_csv,
    summary_table,
)
from .runner import CHECKPOINT_HEADER, Checkpoint, checkpoints_csv, read_checkpoints, run_experiment, run_single

__all__ = [
    "CHECKPOINT_HEADER", "CdfCurve", "Checkpoint", "ConfigError", "ExperimentConfig",
    "OptimizerSpec", "SummaryRow", "cdf_csv", "checkpoints_csv", "cumulative_distribution",
    "emit_plots", "format_summary", "from_dict", "load_config", "read_checkpoints",
    "run_experiment", "run_single", "summary_csv", "summary_table",
]
