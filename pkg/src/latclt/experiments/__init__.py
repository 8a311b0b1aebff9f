"""Experiment configuration, trial execution and Monte Carlo drivers."""

from latclt.experiments.drivers import (
    Normalization,
    RunOptions,
    dioph_normalization,
    domain_normalization,
    run_count,
    run_dioph_clt,
    run_experiment,
    run_fuchs_d1,
    run_lattice_clt,
    run_mixing_probe,
    run_sample_lattice,
    run_spiral_clt,
    run_tail_probe,
    run_variance_probe,
    run_volume,
)
from latclt.experiments.runner import TrialRecord, run_trials
from latclt.experiments.schema import (
    EXPERIMENT_KINDS,
    ConfigError,
    ExperimentConfig,
    SystemConfig,
    apply_overrides,
    config_from_mapping,
    config_to_mapping,
    parse_config,
    parse_size,
    serialize_config,
)
from latclt.experiments.summary import ProbeTable, Report, ScheduleStatistics

__all__ = [
    # Configuration
    "EXPERIMENT_KINDS",
    "ExperimentConfig",
    "SystemConfig",
    "ConfigError",
    "parse_config",
    "parse_size",
    "serialize_config",
    "config_from_mapping",
    "config_to_mapping",
    "apply_overrides",
    # Trials
    "TrialRecord",
    "run_trials",
    # Reports
    "Report",
    "ScheduleStatistics",
    "ProbeTable",
    # Drivers
    "RunOptions",
    "Normalization",
    "dioph_normalization",
    "domain_normalization",
    "run_dioph_clt",
    "run_fuchs_d1",
    "run_lattice_clt",
    "run_spiral_clt",
    "run_mixing_probe",
    "run_tail_probe",
    "run_variance_probe",
    "run_experiment",
    "run_count",
    "run_volume",
    "run_sample_lattice",
]
