"""Aggregation of trial records into reports."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from latclt.analysis.cumulants import EmptySampleError, empirical_cumulant
from latclt.analysis.distribution import (
    DegenerateDistributionError,
    EmpiricalDistribution,
    ks_distance,
    ks_stderr,
    summary_stats,
)
from latclt.experiments.runner import TrialRecord

logger = logging.getLogger(__name__)

NAN = float("nan")
# Variance ratio band for the stabilization flag.
STABLE_VARIANCE_BAND = (0.5, 2.0)


@dataclass(frozen=True)
class ScheduleStatistics:
    """Distribution of the normalized discrepancy at one size parameter.

    Undefined statistics (too few trials or a degenerate sample) are NaN.
    """

    T: float
    trials: int
    raw_mean: float
    raw_mean_stderr: float
    mean: float
    mean_stderr: float
    variance: float
    variance_stderr: float
    skewness: float
    skewness_stderr: float
    excess_kurtosis: float
    kurtosis_stderr: float
    cum3: float
    cum4: float
    ks: float
    ks_stderr: float
    variance_ratio: float


@dataclass(frozen=True)
class ProbeTable:
    """A probe result table written as its own CSV file."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]


@dataclass
class Report:
    """Everything an experiment writes besides the trial records.

    Attributes:
        kind: Experiment kind.
        config: Configuration echo.
        version: Package version that produced the report.
        seed: Master seed.
        statistics: Per-T statistics in schedule order.
        flags: Boolean and categorical checks.
        summary: Experiment-specific results, e.g. mean laws and fitted slopes.
        notes: Human-readable remarks.
        table: Probe table, if any.
    """

    kind: str
    config: dict[str, Any]
    version: str
    seed: int
    statistics: list[ScheduleStatistics] = field(default_factory=list)
    flags: dict[str, Any] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    table: ProbeTable | None = None


def mean_with_stderr(values: Sequence[float] | np.ndarray) -> tuple[float, float]:
    """Sample mean and its standard error ``s / sqrt(M)``."""
    data = np.asarray(values, dtype=np.float64)
    if data.size == 0:
        return NAN, NAN
    if data.size == 1:
        return float(data[0]), NAN
    return float(np.mean(data)), float(np.std(data, ddof=1) / math.sqrt(data.size))


def _safe_cumulant(values: np.ndarray, r: int) -> float:
    try:
        return empirical_cumulant(values, r)
    except EmptySampleError:
        return NAN


def schedule_statistics(
    records: Sequence[TrialRecord], schedule: Sequence[float]
) -> list[ScheduleStatistics]:
    """Per-T statistics of the normalized values.

    The KS distance compares each sample with the normal law of its own mean
    and the variance observed at the largest T.
    """
    by_T = {
        T: (
            np.array([r.normalized for r in records if r.T == T], dtype=np.float64),
            np.array([r.raw_count for r in records if r.T == T], dtype=np.float64),
        )
        for T in schedule
    }
    reference = by_T[schedule[-1]][0]
    reference_variance = float(np.var(reference)) if reference.size else NAN

    result = []
    for T in schedule:
        values, raw = by_T[T]
        raw_mean, raw_stderr = mean_with_stderr(raw)
        distribution = EmpiricalDistribution(values)
        try:
            stats = summary_stats(distribution)
        except (EmptySampleError, DegenerateDistributionError) as e:
            logger.warning(f"Statistics at T={T:g} are undefined: {e}")
            stats = None
        try:
            ks = ks_distance(distribution, float(np.mean(values)), reference_variance)
        except (EmptySampleError, DegenerateDistributionError):
            ks = NAN
        variance = stats.variance if stats else NAN
        result.append(
            ScheduleStatistics(
                T=T,
                trials=int(values.size),
                raw_mean=raw_mean,
                raw_mean_stderr=raw_stderr,
                mean=stats.mean if stats else NAN,
                mean_stderr=stats.mean_stderr if stats else NAN,
                variance=variance,
                variance_stderr=stats.variance_stderr if stats else NAN,
                skewness=stats.skewness if stats else NAN,
                skewness_stderr=stats.skewness_stderr if stats else NAN,
                excess_kurtosis=stats.excess_kurtosis if stats else NAN,
                kurtosis_stderr=stats.kurtosis_stderr if stats else NAN,
                cum3=_safe_cumulant(values, 3),
                cum4=_safe_cumulant(values, 4),
                ks=ks,
                ks_stderr=ks_stderr(values.size) if values.size else NAN,
                variance_ratio=variance / reference_variance if reference_variance > 0 else NAN,
            )
        )
        logger.info(
            f"T={T:g}: mean={result[-1].mean:.4g} var={variance:.4g} "
            f"skew={result[-1].skewness:.3g} kurt={result[-1].excess_kurtosis:.3g} ks={ks:.3g}"
        )
    return result


def trend_flags(statistics: Sequence[ScheduleStatistics]) -> dict[str, Any]:
    """Checks on the shape of the distribution across the schedule.

    ``variance_stabilized``: the variance at the second largest T is within a
    factor two of the variance at the largest T. ``cumulants_shrinking``:
    ``|cum3|`` and ``|cum4|`` at the largest T do not exceed their values at
    the smallest T. ``ks_nonincreasing``: each KS distance exceeds its
    predecessor by at most two standard errors. ``variance_positive``: the
    largest-T variance is more than two standard errors above zero.
    """
    if not statistics:
        return {}
    first, last = statistics[0], statistics[-1]
    low, high = STABLE_VARIANCE_BAND
    stabilized = (
        low <= statistics[-2].variance_ratio <= high if len(statistics) > 1 else None
    )
    shrinking = abs(last.cum3) <= abs(first.cum3) and abs(last.cum4) <= abs(first.cum4)
    ks_ok = all(
        later.ks <= earlier.ks + 2.0 * later.ks_stderr
        for earlier, later in zip(statistics, statistics[1:], strict=False)
    )
    return {
        "variance_stabilized": stabilized,
        "cumulants_shrinking": bool(shrinking) if len(statistics) > 1 else None,
        "ks_nonincreasing": bool(ks_ok),
        "variance_positive": bool(last.variance > 2.0 * last.variance_stderr),
    }
