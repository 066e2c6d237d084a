"""Experiment configuration, sweeps and the command-line interface."""

from .config import PRESET_CONFIGS, ExperimentConfig, load_config, preset_config
from .sweep import (
    CSV_HEADER,
    ConvergenceRecord,
    emit_csv,
    evaluate_gamma,
    fit_power_law,
    format_summary,
    power_law_fit,
    read_csv,
    run_sweep,
    write_records,
)

__all__ = [
    "CSV_HEADER",
    "ConvergenceRecord",
    "ExperimentConfig",
    "PRESET_CONFIGS",
    "emit_csv",
    "evaluate_gamma",
    "fit_power_law",
    "format_summary",
    "load_config",
    "power_law_fit",
    "preset_config",
    "read_csv",
    "run_sweep",
    "write_records",
]
