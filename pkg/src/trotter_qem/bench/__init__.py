"""Experiment configuration, simulation sweeps and report writing."""

from .config import ESTIMATORS, PROFILES, ExperimentConfig, load_config, parse_observable
from .harness import BenchRow, Simulation, StateRow, build_plans, run_mse_sweep, run_state_table, simulate
from .report import emit_reports, read_mse_csv
