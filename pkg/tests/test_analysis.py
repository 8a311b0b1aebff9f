"""Tests for cumulants and empirical distributions."""

import math

import numpy as np
import pytest

from latclt.analysis import (
    DegenerateDistributionError,
    EmptySampleError,
    EmpiricalDistribution,
    MomentTable,
    PartitionLimitError,
    bell_number,
    empirical_cumulant,
    gaussian_cdf,
    joint_cumulant,
    ks_distance,
    ks_stderr,
    ks_two_sample,
    set_partitions,
    summary_stats,
    variance_series,
)


class TestSetPartitions:
    """Tests for set partition enumeration."""

    @pytest.mark.parametrize("r,expected", [(1, 1), (3, 5), (4, 15), (5, 52), (6, 203)])
    def test_bell_numbers(self, r: int, expected: int) -> None:
        """Test the number of partitions is the Bell number."""
        assert len(set_partitions(r)) == expected
        assert bell_number(r) == expected

    def test_partitions_are_distinct_and_cover(self) -> None:
        """Test each partition covers {1..r} with disjoint blocks, once each."""
        partitions = set_partitions(5)
        seen = set()
        for partition in partitions:
            union = set().union(*partition.blocks)
            assert union == {1, 2, 3, 4, 5}
            assert sum(len(block) for block in partition.blocks) == 5
            key = frozenset(partition.blocks)
            assert key not in seen
            seen.add(key)

    def test_canonical_order(self) -> None:
        """Test the first partition is the single block and the last is all singletons."""
        partitions = set_partitions(3)
        assert partitions[0].blocks == (frozenset({1, 2, 3}),)
        assert len(partitions[-1]) == 3

    def test_order_limit(self) -> None:
        """Test r = 13 is refused."""
        with pytest.raises(PartitionLimitError):
            set_partitions(13)

    def test_order_positive(self) -> None:
        """Test r = 0 is refused."""
        with pytest.raises(ValueError):
            set_partitions(0)


class TestJointCumulant:
    """Tests for partition-sum cumulants."""

    def test_order_two_is_covariance(self) -> None:
        """Test cum(X, Y) = E[XY] - E[X]E[Y]."""
        table = MomentTable(2, {frozenset({1}): 2.0, frozenset({2}): 3.0, frozenset({1, 2}): 7.0})
        assert joint_cumulant(table) == pytest.approx(1.0)

    def test_gaussian_fourth_cumulant_vanishes(self) -> None:
        """Test the fourth cumulant of a standard normal is zero."""
        gaussian_moments = {1: 0.0, 2: 1.0, 3: 0.0, 4: 3.0}
        table = MomentTable.from_function(4, lambda subset: gaussian_moments[len(subset)])
        assert joint_cumulant(table) == pytest.approx(0.0, abs=1e-12)

    def test_independent_blocks_vanish(self) -> None:
        """Test the cumulant vanishes when {1, 2} is independent of {3}."""

        def moment(subset: frozenset[int]) -> float:
            left = {1: 0.5, 2: 0.25}
            pair = 0.4
            value = 1.0
            group = subset & {1, 2}
            if group == {1, 2}:
                value *= pair
            elif group:
                value *= left[next(iter(group))]
            if 3 in subset:
                value *= 2.0
            return value

        assert joint_cumulant(MomentTable.from_function(3, moment)) == pytest.approx(0.0, abs=1e-12)

    def test_missing_subset(self) -> None:
        """Test an incomplete table is rejected."""
        with pytest.raises(ValueError):
            MomentTable(2, {frozenset({1}): 1.0, frozenset({2}): 1.0})

    def test_from_samples(self) -> None:
        """Test plug-in moments of two columns."""
        table = MomentTable.from_samples([[1.0, 2.0], [3.0, 4.0]])
        assert table[{1}] == pytest.approx(2.0)
        assert table[{1, 2}] == pytest.approx(7.0)

    def test_from_empty_samples(self) -> None:
        """Test an empty sample is rejected."""
        with pytest.raises(EmptySampleError):
            MomentTable.from_samples(np.zeros((0, 2)))


class TestEmpiricalCumulant:
    """Tests for single-variable empirical cumulants."""

    def test_plus_minus_one(self) -> None:
        """Test the +-1 sample has variance 1, cum3 0 and cum4 -2."""
        samples = [-1.0, 1.0, -1.0, 1.0]
        assert empirical_cumulant(samples, 1) == pytest.approx(0.0)
        assert empirical_cumulant(samples, 2) == pytest.approx(1.0)
        assert empirical_cumulant(samples, 3) == pytest.approx(0.0, abs=1e-12)
        assert empirical_cumulant(samples, 4) == pytest.approx(-2.0)

    def test_shift_invariance(self) -> None:
        """Test cumulants of order >= 2 ignore shifts."""
        rng = np.random.default_rng(0)
        samples = rng.exponential(size=500)
        for r in (2, 3, 4):
            assert empirical_cumulant(samples + 10.0, r) == pytest.approx(
                empirical_cumulant(samples, r), rel=1e-9
            )

    def test_too_few_samples(self) -> None:
        """Test one sample is not enough."""
        with pytest.raises(EmptySampleError):
            empirical_cumulant([1.0], 2)

    def test_order_range(self) -> None:
        """Test orders above 6 are refused."""
        with pytest.raises(ValueError):
            empirical_cumulant([1.0, 2.0], 7)


class TestDistribution:
    """Tests for empirical distributions and the normal law."""

    def test_gaussian_cdf(self) -> None:
        """Test Phi(1) = 0.8413447."""
        assert gaussian_cdf(1.0) == pytest.approx(0.8413447, abs=1e-7)
        assert gaussian_cdf(0.0) == 0.5

    def test_cdf(self) -> None:
        """Test the empirical CDF counts samples at or below x."""
        distribution = EmpiricalDistribution.of([3.0, 1.0, 2.0, 2.0])
        np.testing.assert_allclose(distribution.cdf([0.0, 2.0, 3.0]), [0.0, 0.75, 1.0])

    def test_rejects_non_finite(self) -> None:
        """Test NaN samples are rejected."""
        with pytest.raises(ValueError):
            EmpiricalDistribution.of([1.0, math.nan])

    def test_ks_plus_minus_one(self) -> None:
        """Test the KS distance of {-1, +1} to N(0, 1) is 0.34134."""
        distribution = EmpiricalDistribution.of([-1.0, 1.0])
        assert ks_distance(distribution, 0.0, 1.0) == pytest.approx(0.34134, abs=1e-5)

    def test_ks_large_normal_sample(self) -> None:
        """Test a large normal sample is close to the normal law."""
        samples = np.random.default_rng(1).standard_normal(20000)
        assert ks_distance(EmpiricalDistribution.of(samples), 0.0, 1.0) < 0.02

    def test_ks_degenerate(self) -> None:
        """Test zero reference variance is refused."""
        with pytest.raises(DegenerateDistributionError):
            ks_distance(EmpiricalDistribution.of([1.0, 2.0]), 0.0, 0.0)

    def test_ks_empty(self) -> None:
        """Test an empty sample is refused."""
        with pytest.raises(EmptySampleError):
            ks_distance(EmpiricalDistribution.of([]), 0.0, 1.0)

    def test_ks_two_sample(self) -> None:
        """Test disjoint samples are at distance one."""
        first = EmpiricalDistribution.of([0.0, 1.0, 2.0])
        second = EmpiricalDistribution.of([10.0, 11.0])
        assert ks_two_sample(first, second) == pytest.approx(1.0)

    def test_ks_stderr(self) -> None:
        """Test the standard error shrinks like 1/sqrt(n)."""
        assert ks_stderr(400) == pytest.approx(ks_stderr(100) / 2.0)


class TestSummaryStats:
    """Tests for moment statistics."""

    def test_plus_minus_one(self) -> None:
        """Test the +-1 sample: variance 1, skewness 0, excess kurtosis -2."""
        stats = summary_stats(EmpiricalDistribution.of([-1.0, 1.0, -1.0, 1.0]))
        assert stats.mean == pytest.approx(0.0)
        assert stats.variance == pytest.approx(1.0)
        assert stats.skewness == pytest.approx(0.0, abs=1e-12)
        assert stats.excess_kurtosis == pytest.approx(-2.0)
        assert stats.skewness_stderr == pytest.approx(math.sqrt(6.0 / 4))
        assert stats.kurtosis_stderr == pytest.approx(math.sqrt(24.0 / 4))

    def test_too_few_samples(self) -> None:
        """Test three samples are not enough."""
        with pytest.raises(EmptySampleError):
            summary_stats(EmpiricalDistribution.of([1.0, 2.0, 3.0]))

    def test_zero_variance(self) -> None:
        """Test a constant sample is degenerate."""
        with pytest.raises(DegenerateDistributionError):
            summary_stats(EmpiricalDistribution.of([2.0] * 5))


class TestVarianceSeries:
    """Tests for the truncated variance series."""

    def test_geometric_correlations(self) -> None:
        """Test C_k - m^2 = v 0.5^k sums to about 3 v."""
        v, m = 2.0, 1.5
        correlations = [m * m + v * 0.5**k for k in range(41)]
        assert variance_series(correlations, m * m) == pytest.approx(3.0 * v, rel=1e-10)

    def test_single_term(self) -> None:
        """Test C_0 alone gives the variance."""
        assert variance_series([5.0], 4.0) == pytest.approx(1.0)

    def test_empty(self) -> None:
        """Test an empty series is refused."""
        with pytest.raises(EmptySampleError):
            variance_series([], 0.0)


def correlated_columns(rng: np.random.Generator, m: int = 300) -> np.ndarray:
    """Four dependent, skewed columns."""
    base = rng.exponential(size=(m, 4))
    return base @ np.array(
        [[1.0, 0.3, 0.0, 0.2], [0.0, 1.0, 0.5, 0.0], [0.4, 0.0, 1.0, 0.3], [0.0, 0.2, 0.0, 1.0]]
    )


class TestCumulantMultilinearity:
    """Tests for linearity of the joint cumulant in each variable."""

    @pytest.mark.parametrize("slot", [0, 1, 2])
    def test_scaling(self, slot: int) -> None:
        """Test scaling one variable by a scales the cumulant by a."""
        data = correlated_columns(np.random.default_rng(slot))[:, :3]
        scaled = data.copy()
        scaled[:, slot] *= -2.5
        expected = -2.5 * joint_cumulant(MomentTable.from_samples(data))
        result = joint_cumulant(MomentTable.from_samples(scaled))
        assert result == pytest.approx(expected, rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("slot", [0, 1, 2])
    def test_additivity(self, slot: int) -> None:
        """Test cum(X + Y, ...) = cum(X, ...) + cum(Y, ...) in every slot."""
        data = correlated_columns(np.random.default_rng(10 + slot))
        base, extra = data[:, :3], data[:, 3]
        summed = base.copy()
        summed[:, slot] += extra
        replaced = base.copy()
        replaced[:, slot] = extra
        expected = joint_cumulant(MomentTable.from_samples(base)) + joint_cumulant(
            MomentTable.from_samples(replaced)
        )
        result = joint_cumulant(MomentTable.from_samples(summed))
        assert result == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_scaling_from_moments(self) -> None:
        """Test scaling the moments that involve variable 1 scales the fourth cumulant."""
        moments = {1: 0.2, 2: 1.1, 3: 0.7, 4: 3.4}

        def moment(subset: frozenset[int]) -> float:
            return moments[len(subset)] + 0.1 * sum(subset)

        def scaled(subset: frozenset[int]) -> float:
            return (3.0 if 1 in subset else 1.0) * moment(subset)

        expected = 3.0 * joint_cumulant(MomentTable.from_function(4, moment))
        assert joint_cumulant(MomentTable.from_function(4, scaled)) == pytest.approx(
            expected, rel=1e-12, abs=1e-12
        )


class TestNormalSample:
    """Tests for cumulants and KS distances of Gaussian samples."""

    def test_higher_cumulants_small(self) -> None:
        """Test a standard normal sample of size 1e5 has |cum3| < 0.05 and |cum4| < 0.1."""
        samples = np.random.default_rng(42).standard_normal(100_000)
        assert abs(empirical_cumulant(samples, 3)) < 0.05
        assert abs(empirical_cumulant(samples, 4)) < 0.1

    @pytest.mark.parametrize("scale,shift", [(2.0, 0.0), (0.5, -3.0), (7.0, 11.0)])
    def test_ks_affine_invariance(self, scale: float, shift: float) -> None:
        """Test moving the sample and the reference together leaves the distance unchanged."""
        samples = np.random.default_rng(3).exponential(size=500)
        mean, variance = 1.2, 0.8
        original = ks_distance(EmpiricalDistribution.of(samples), mean, variance)
        moved = ks_distance(
            EmpiricalDistribution.of(scale * samples + shift),
            scale * mean + shift,
            scale**2 * variance,
        )
        assert moved == pytest.approx(original, abs=1e-12)
