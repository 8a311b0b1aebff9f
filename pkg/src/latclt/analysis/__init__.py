"""Statistics: set partitions, cumulants, empirical distributions and variance series."""

from latclt.analysis.cumulants import (
    EmptySampleError,
    MomentTable,
    PartitionLimitError,
    SetPartition,
    bell_number,
    empirical_cumulant,
    joint_cumulant,
    set_partitions,
)
from latclt.analysis.distribution import (
    DegenerateDistributionError,
    EmpiricalDistribution,
    SummaryStats,
    gaussian_cdf,
    ks_distance,
    ks_stderr,
    ks_two_sample,
    summary_stats,
    variance_series,
)

__all__ = [
    # Cumulants
    "SetPartition",
    "MomentTable",
    "PartitionLimitError",
    "EmptySampleError",
    "bell_number",
    "set_partitions",
    "joint_cumulant",
    "empirical_cumulant",
    # Distributions
    "EmpiricalDistribution",
    "SummaryStats",
    "DegenerateDistributionError",
    "gaussian_cdf",
    "ks_distance",
    "ks_stderr",
    "ks_two_sample",
    "summary_stats",
    "variance_series",
]
