"""Experiment configs, the runner, report rendering and the command line."""
from .config import ConfigError, apply_overrides, config_hash, load, validate
from .report import report_render
from .runner import ExperimentReport, GridRecord, SimulationError, run
