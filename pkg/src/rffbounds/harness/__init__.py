"""Experiment configs, seeded Monte Carlo runners and the command line entry point."""
from .config import ExperimentConfig, GrowthRule, load_config, parse_m_grid
from .experiments import (CSV_HEADER, CoverageRow, GrowthSummary, RateSummary, TrialRecord,
                          fit_loglog_slope, mix64, records_to_csv, run_coverage_experiment,
                          run_growing_diameter, run_rate_experiment, run_trials, trial_seed)
