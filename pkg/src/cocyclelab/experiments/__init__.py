"""Reproducible experiment drivers, configs, and report plumbing."""
from .config import ConfigError, load_config, validate_config
from .report import all_passed, config_digest, write_report
from .runners import DESCRIPTIONS, RUNNERS, run_experiment

__all__ = [
    "ConfigError",
    "load_config",
    "validate_config",
    "all_passed",
    "config_digest",
    "write_report",
    "DESCRIPTIONS",
    "RUNNERS",
    "run_experiment",
]
