"""Config-driven Monte Carlo sweeps, CSV/SVG output and the command line."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .output import emit_outputs, read_results_csv, write_results_csv, write_summary_csv
from .sweep import ResultRow, Summary, SweepSpec, run_sweep, solve_trial, summarize

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "Summary",
    "SweepSpec",
    "emit_outputs",
    "load_config",
    "parse_config",
    "read_results_csv",
    "run_sweep",
    "solve_trial",
    "summarize",
    "write_results_csv",
    "write_summary_csv",
]
