"""Seeded, report-producing experiments on percolation graphs and GW trees."""
from .config import DEFAULTS, ExperimentConfig, load_config, parse_override
from .report import ExperimentReport
from .runners import (EXPERIMENTS, median_fraction, moment_matching_check, run_concentration,
                      run_deloc, run_dos, run_experiment, run_gw_ac, run_locallaw,
                      run_moment_matching, run_rate, run_trees, smoothed_empirical,
                      ugw_reference_transform)
