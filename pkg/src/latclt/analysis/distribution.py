"""Empirical distributions and their comparison with the normal law."""

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from scipy import special, stats

from latclt.analysis.cumulants import EmptySampleError

# Standard deviation of the Kolmogorov limit distribution.
KOLMOGOROV_SD = 0.2603


class DegenerateDistributionError(ValueError):
    """Raised when a statistic is undefined because the sample has zero variance."""

    pass


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """A finite sample with a cached sorted copy.

    Attributes:
        samples: The sample values in their original order.
        sorted_samples: The values in increasing order.
    """

    samples: npt.NDArray[np.float64]
    sorted_samples: npt.NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.samples, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise ValueError("Samples must be finite")
        ordered = np.sort(values)
        values.setflags(write=False)
        ordered.setflags(write=False)
        object.__setattr__(self, "samples", values)
        object.__setattr__(self, "sorted_samples", ordered)

    @classmethod
    def of(cls, samples: Sequence[float] | npt.ArrayLike) -> "EmpiricalDistribution":
        return cls(np.asarray(samples, dtype=np.float64))

    def __len__(self) -> int:
        return int(self.samples.size)

    def cdf(self, x: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Empirical distribution function ``#{samples <= x} / n``."""
        if len(self) == 0:
            raise EmptySampleError("Empirical CDF of an empty sample")
        counts = np.searchsorted(self.sorted_samples, np.asarray(x, dtype=np.float64), "right")
        return counts / len(self)


class SummaryStats(NamedTuple):
    """Plug-in moment statistics with Monte Carlo standard errors."""

    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    mean_stderr: float
    variance_stderr: float
    skewness_stderr: float
    kurtosis_stderr: float


def gaussian_cdf(u: float) -> float:
    """Standard normal distribution function."""
    return float(special.ndtr(u))


def ks_distance(distribution: EmpiricalDistribution, mean: float, variance: float) -> float:
    """Kolmogorov distance between the sample and ``N(mean, variance)``.

    Both one-sided jumps of the empirical CDF are checked at every sample.

    Raises:
        EmptySampleError: For an empty sample.
        DegenerateDistributionError: If ``variance`` is not positive.
    """
    n = len(distribution)
    if n == 0:
        raise EmptySampleError("KS distance of an empty sample")
    if not variance > 0:
        raise DegenerateDistributionError(f"Reference variance must be positive, got {variance}")
    reference = special.ndtr((distribution.sorted_samples - mean) / math.sqrt(variance))
    above = np.arange(1, n + 1) / n - reference
    below = reference - np.arange(0, n) / n
    return float(max(np.max(above), np.max(below)))


def ks_two_sample(first: EmpiricalDistribution, second: EmpiricalDistribution) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    if len(first) == 0 or len(second) == 0:
        raise EmptySampleError("Two-sample KS needs two nonempty samples")
    result = stats.ks_2samp(first.samples, second.samples)
    return float(result.statistic)


def summary_stats(distribution: EmpiricalDistribution) -> SummaryStats:
    """Mean, variance, skewness and excess kurtosis with standard errors.

    Moments are plug-in (biased) estimators. Standard errors are the
    large-sample values: ``sqrt(m2/M)`` for the mean, ``sqrt((m4 - m2^2)/M)``
    for the variance, ``sqrt(6/M)`` and ``sqrt(24/M)`` for skewness and
    excess kurtosis.

    Raises:
        EmptySampleError: With fewer than 4 samples.
        DegenerateDistributionError: If the sample variance is zero.
    """
    n = len(distribution)
    if n < 4:
        raise EmptySampleError(f"Summary statistics need at least 4 samples, got {n}")
    values = distribution.samples
    mean = float(np.mean(values))
    centered = values - mean
    m2 = float(np.mean(centered**2))
    if m2 <= 0.0:
        raise DegenerateDistributionError("Zero variance: skewness and kurtosis are undefined")
    m4 = float(np.mean(centered**4))
    return SummaryStats(
        mean=mean,
        variance=m2,
        skewness=float(stats.skew(values, bias=True)),
        excess_kurtosis=float(stats.kurtosis(values, fisher=True, bias=True)),
        mean_stderr=math.sqrt(m2 / n),
        variance_stderr=math.sqrt(max(m4 - m2 * m2, 0.0) / n),
        skewness_stderr=math.sqrt(6.0 / n),
        kurtosis_stderr=math.sqrt(24.0 / n),
    )


def ks_stderr(n: int) -> float:
    """Approximate standard error of a KS distance from n samples."""
    return KOLMOGOROV_SD / math.sqrt(n)


def variance_series(correlations: Sequence[float], mean_square: float) -> float:
    """Truncated series ``sum_{|k| <= K} (C_k - m^2)`` using ``C_{-k} = C_k``.

    Args:
        correlations: ``C_0, ..., C_K`` with ``C_k`` estimating ``E[phi (phi o a^k)]``.
        mean_square: The squared mean ``(E phi)^2``.

    Returns:
        ``(C_0 - m^2) + 2 sum_{k=1}^K (C_k - m^2)``.
    """
    if not correlations:
        raise EmptySampleError("variance_series needs at least C_0")
    head = correlations[0] - mean_square
    return math.fsum([head, *(2.0 * (c - mean_square) for c in correlations[1:])])
