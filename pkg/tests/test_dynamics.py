"""Tests for flows, Siegel transforms, Diophantine counters and samplers."""

import math
from fractions import Fraction

import numpy as np
import pytest

from latclt.dynamics import (
    BallIndicator,
    BoxIndicator,
    CounterMismatchError,
    DiophantineError,
    DiophantineProblem,
    FlowedTorusLattice,
    FlowElement,
    RadialBump,
    approximation_mask,
    audit_counts,
    dioph_count_direct,
    dioph_count_dynamical,
    dioph_level_counts,
    haar_sample_approx,
    haar_sample_exact_2d,
    random_torus_point,
    separation,
    siegel_transform,
    trial_rng,
)
from latclt.analysis import EmpiricalDistribution, ks_two_sample
from latclt.dynamics import diophantine
from latclt.lattice import (
    LatticeError,
    NonUnimodularError,
    UnimodularLattice,
    apply,
    diagonal,
    lll_reduce,
    shortest_vector_length,
)

# Hermite constant bound for dimension 2: sqrt(2 / sqrt(3)).
HERMITE_2D = 1.0745699318


@pytest.fixture
def z2() -> UnimodularLattice:
    """The integer lattice Z^2."""
    return UnimodularLattice.integer_lattice(2)


@pytest.fixture
def half_problem() -> DiophantineProblem:
    """Weights and constants (0.5, 0.5)."""
    return DiophantineProblem(np.array([0.5, 0.5]), np.array([0.5, 0.5]))


class TestFlowElement:
    """Test cases for diagonal flow elements."""

    def test_weighted_entries(self) -> None:
        """Test a_w(t) has entries e^{w_i t} and e^{-t}."""
        g = FlowElement.weighted([0.25, 0.75], 2.0)
        np.testing.assert_allclose(g.entries, [math.exp(0.5), math.exp(1.5), math.exp(-2.0)])
        assert np.linalg.det(g.matrix) == pytest.approx(1.0)

    def test_equal_dimension(self) -> None:
        """Test the equal-weight flow lives in dimension d + 1."""
        assert FlowElement.equal(3, 1.0).dim == 4

    def test_dyadic(self) -> None:
        """Test the dyadic step halves the last coordinate."""
        g = FlowElement.dyadic([0.5, 0.5])
        np.testing.assert_allclose(g.entries, [math.sqrt(2.0), math.sqrt(2.0), 0.5])

    def test_power_and_compose(self) -> None:
        """Test composing a^2 with a^3 gives a^5."""
        a = FlowElement.dyadic([1.0])
        np.testing.assert_allclose(a.power(2).compose(a.power(3)).entries, a.power(5).entries)

    def test_separation(self) -> None:
        """Test the separation of a_w(t) and a_w(s) is |t - s|."""
        w = [0.2, 0.3, 0.5]
        assert separation(FlowElement.weighted(w, 7.0), FlowElement.weighted(w, 2.5)) == (
            pytest.approx(4.5)
        )

    def test_separation_from_identity(self) -> None:
        """Test the identity is at separation zero from itself."""
        assert separation(FlowElement.identity(3), FlowElement.identity(3)) == 0.0

    def test_rejects_non_unit_determinant(self) -> None:
        """Test entries with product 2 are rejected."""
        with pytest.raises(NonUnimodularError):
            FlowElement.from_entries([2.0, 1.0])

    def test_rejects_nonpositive_entries(self) -> None:
        """Test negative entries are rejected."""
        with pytest.raises(NonUnimodularError):
            FlowElement.from_entries([-1.0, -1.0])

    def test_act(self, z2: UnimodularLattice) -> None:
        """Test acting on Z^2 scales the coordinates."""
        lattice = FlowElement.from_entries([2.0, 0.5]).act(z2)
        np.testing.assert_allclose(lattice.basis, np.diag([2.0, 0.5]))


class TestSiegelTransform:
    """Test cases for Siegel transforms."""

    def test_small_ball(self, z2: UnimodularLattice) -> None:
        """Test a ball of radius 0.5 holds no nonzero vector of Z^2."""
        assert siegel_transform(BallIndicator(0.5), z2) == 0.0

    def test_unit_ball(self, z2: UnimodularLattice) -> None:
        """Test the closed unit ball holds four vectors."""
        assert siegel_transform(BallIndicator(1.0), z2) == 4.0

    def test_box(self, z2: UnimodularLattice) -> None:
        """Test the box of half-width 1.5 holds the eight neighbours."""
        assert siegel_transform(BoxIndicator(np.array([1.5, 1.5])), z2) == 8.0

    def test_box_dimension_mismatch(self, z2: UnimodularLattice) -> None:
        """Test a 3D box on a 2D lattice is rejected."""
        with pytest.raises(LatticeError):
            siegel_transform(BoxIndicator(np.ones(3)), z2)

    def test_bump_between_indicators(self, z2: UnimodularLattice) -> None:
        """Test the bump lies between the inner and outer ball counts."""
        value = siegel_transform(RadialBump(1.6, 0.5), z2)
        assert 4.0 <= value <= 8.0

    def test_integrals(self) -> None:
        """Test the closed-form integrals of the indicators."""
        assert BallIndicator(1.0).integral(2) == pytest.approx(math.pi)
        assert BoxIndicator(np.array([1.0, 2.0])).integral(2) == pytest.approx(8.0)

    def test_bump_integral_bounds(self) -> None:
        """Test the bump integral lies between the inner and outer ball volumes."""
        bump = RadialBump(1.0, 0.5)
        value = bump.integral(3)
        assert BallIndicator(0.5).integral(3) < value < BallIndicator(1.0).integral(3)

    def test_pull_back(self) -> None:
        """Test pulling back by diag(2, 1/2) rescales the half-widths."""
        box = BoxIndicator(np.array([1.0, 1.0])).pull_back([2.0, 0.5])
        np.testing.assert_allclose(box.half_widths, [0.5, 2.0])

    def test_pull_back_equivariance(self) -> None:
        """Test the box sum over g Lambda equals the pulled-back box sum over Lambda."""
        rng = np.random.default_rng(13)
        box = BoxIndicator(np.array([1.2, 0.8, 1.0]))
        for index in range(100):
            n = 2 if index % 2 == 0 else 3
            if n == 2:
                lattice = haar_sample_exact_2d(rng)
            else:
                basis = rng.uniform(-2.0, 2.0, size=(3, 3))
                lattice = lll_reduce(UnimodularLattice.from_basis(basis))
            logs = rng.uniform(-1.0, 1.0, size=n)
            entries = np.exp(logs - logs.mean())
            f = BoxIndicator(box.half_widths[:n])
            moved = siegel_transform(f, apply(diagonal(entries), lattice))
            assert moved == siegel_transform(f.pull_back(entries), lattice)

    @pytest.mark.slow
    def test_mean_value_2d(self) -> None:
        """Test averages over random 2D lattices match the integrals within 3 standard errors."""
        functions = [
            BallIndicator(1.0),
            BoxIndicator(np.array([1.0, 0.5])),
            RadialBump(1.0, 0.5),
        ]
        rng = np.random.default_rng(4)
        values = np.empty((100_000, len(functions)))
        for row in range(values.shape[0]):
            lattice = haar_sample_exact_2d(rng)
            values[row] = [siegel_transform(f, lattice) for f in functions]
        for f, column in zip(functions, values.T, strict=True):
            stderr = column.std(ddof=1) / math.sqrt(column.size)
            assert abs(column.mean() - f.integral(2)) < 3.0 * stderr


class TestDiophantineProblem:
    """Test cases for problem validation."""

    def test_mean_coefficient(self, half_problem: DiophantineProblem) -> None:
        """Test 2^d c_1 ... c_d."""
        assert half_problem.mean_coefficient == pytest.approx(1.0)

    def test_equal_weights(self) -> None:
        """Test equal weights are 1/d."""
        problem = DiophantineProblem.equal_weights([1.0, 1.0, 1.0])
        np.testing.assert_allclose(problem.weights, [1 / 3, 1 / 3, 1 / 3])

    def test_one_dimensional(self) -> None:
        """Test d = 1 accepts w = (1,)."""
        assert DiophantineProblem(np.array([1.0]), np.array([0.5])).d == 1

    def test_weights_must_sum_to_one(self) -> None:
        """Test weights summing to 0.9 are rejected."""
        with pytest.raises(DiophantineError):
            DiophantineProblem(np.array([0.4, 0.5]), np.array([1.0, 1.0]))

    def test_constants_positive(self) -> None:
        """Test a zero constant is rejected."""
        with pytest.raises(DiophantineError):
            DiophantineProblem(np.array([0.5, 0.5]), np.array([1.0, 0.0]))


class TestDiophantineCounting:
    """Test cases for the direct and dynamical counters."""

    def test_half_point(self, half_problem: DiophantineProblem) -> None:
        """Test x = (0.5, 0.5), T = 4 has the single approximant q = 2."""
        assert dioph_count_direct(half_problem, [0.5, 0.5], 4) == 1

    def test_origin(self, half_problem: DiophantineProblem) -> None:
        """Test x = 0 has one approximant per denominator."""
        assert dioph_count_direct(half_problem, [0.0, 0.0], 4) == 3

    def test_dynamical_examples(self, half_problem: DiophantineProblem) -> None:
        """Test the dynamical counter reproduces both examples."""
        assert dioph_count_dynamical(half_problem, [0.5, 0.5], 2) == 1
        assert dioph_count_dynamical(half_problem, [0.0, 0.0], 2) == 3

    def test_zero_levels(self, half_problem: DiophantineProblem) -> None:
        """Test N = 0 counts nothing."""
        assert dioph_count_dynamical(half_problem, [0.3, 0.6], 0) == 0
        assert dioph_level_counts(half_problem, [0.3, 0.6], 0) == []

    def test_T_one(self, half_problem: DiophantineProblem) -> None:
        """Test T = 1 has no denominators."""
        assert dioph_count_direct(half_problem, [0.3, 0.6], 1) == 0

    def test_mask_is_strict(self, half_problem: DiophantineProblem) -> None:
        """Test q = 1, p = 0 fails at x = 0.5 because the bound is strict."""
        mask = approximation_mask(half_problem, [0.5, 0.5], [1, 2], [[0, 0], [1, 1]])
        assert mask.tolist() == [False, True]

    def test_levels_partition_denominators(self, half_problem: DiophantineProblem) -> None:
        """Test cumulative level sums reproduce the direct count at each 2^n."""
        x = [0.1234567, 0.7654321]
        levels = dioph_level_counts(half_problem, x, 10)
        cumulative = np.cumsum(levels)
        for n in range(1, 11):
            assert cumulative[n - 1] == dioph_count_direct(half_problem, x, 2**n)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_random_points_agree(self, d: int) -> None:
        """Test both counters agree on random points."""
        rng = np.random.default_rng(100 + d)
        weights = np.array([1.0]) if d == 1 else np.full(d, 1.0 / d)
        problem = DiophantineProblem(weights, np.full(d, 1.0))
        for _ in range(5):
            x = rng.random(d)
            assert audit_counts(problem, x, 9) == dioph_count_direct(problem, x, 2**9)

    def test_unequal_weights_agree(self) -> None:
        """Test unequal weights and constants."""
        problem = DiophantineProblem(np.array([0.3, 0.7]), np.array([0.8, 1.5]))
        rng = np.random.default_rng(21)
        for _ in range(5):
            x = rng.random(2)
            assert dioph_count_dynamical(problem, x, 10) == dioph_count_direct(problem, x, 1024)

    def test_audit_mismatch(self, half_problem: DiophantineProblem, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test a disagreement raises."""
        monkeypatch.setattr(diophantine, "dioph_count_direct", lambda *args: -1)
        with pytest.raises(CounterMismatchError):
            audit_counts(half_problem, [0.5, 0.5], 2)

    def test_wrong_point_dimension(self, half_problem: DiophantineProblem) -> None:
        """Test a point of the wrong dimension is rejected."""
        with pytest.raises(DiophantineError):
            dioph_count_direct(half_problem, [0.5], 4)

    def test_flowed_lattice_level_zero(self, half_problem: DiophantineProblem) -> None:
        """Test level 0 spans the lattice of the point."""
        flow = FlowedTorusLattice(half_problem, [Fraction(1, 3), Fraction(1, 5)])
        reduced, u = flow.level(0)
        assert abs(round(np.linalg.det(u.astype(float)))) == 1
        assert abs(np.linalg.det(reduced)) == pytest.approx(1.0)


class TestSampling:
    """Test cases for random lattices."""

    def test_trial_rng_reproducible(self) -> None:
        """Test the same seed and index give the same stream."""
        assert trial_rng(7, 3).random(4).tolist() == trial_rng(7, 3).random(4).tolist()

    def test_trial_rng_independent_of_index(self) -> None:
        """Test different indices give different streams."""
        assert trial_rng(7, 3).random(4).tolist() != trial_rng(7, 4).random(4).tolist()

    def test_exact_2d_shortest_vector(self) -> None:
        """Test exact samples satisfy the Hermite bound."""
        rng = np.random.default_rng(0)
        for _ in range(200):
            lattice = haar_sample_exact_2d(rng)
            assert abs(np.linalg.det(lattice.basis)) == pytest.approx(1.0)
            assert shortest_vector_length(lattice) <= HERMITE_2D + 1e-9

    def test_exact_2d_without_rotation(self) -> None:
        """Test unrotated samples are upper triangular."""
        lattice = haar_sample_exact_2d(np.random.default_rng(1), rotate=False)
        assert lattice.basis[1, 0] == 0.0

    def test_random_torus_point(self) -> None:
        """Test torus points are exact rationals in [0, 1)."""
        point = random_torus_point(3, np.random.default_rng(2))
        assert len(point) == 3
        assert all(isinstance(value, Fraction) and 0 <= value < 1 for value in point)

    def test_approx_sample(self) -> None:
        """Test approximate samples are unimodular of the requested dimension."""
        lattice = haar_sample_approx(3, 8.0, np.random.default_rng(3))
        assert lattice.dim == 3
        assert abs(np.linalg.det(lattice.basis)) == pytest.approx(1.0, abs=1e-9)

    def test_approx_sample_zero_time(self) -> None:
        """Test t0 = 0 returns the lattice of the torus point."""
        lattice = haar_sample_approx(2, 0.0, np.random.default_rng(3))
        assert lattice.basis[1, 1] == 1.0

    def test_approx_sample_reproducible(self) -> None:
        """Test the sampler is deterministic for a fixed stream."""
        first = haar_sample_approx(4, 16.0, trial_rng(1, 0))
        second = haar_sample_approx(4, 16.0, trial_rng(1, 0))
        np.testing.assert_array_equal(first.basis, second.basis)

    def test_approx_rejects_bad_input(self) -> None:
        """Test dimension 1 and negative times are rejected."""
        with pytest.raises(ValueError):
            haar_sample_approx(1, 1.0, np.random.default_rng(0))
        with pytest.raises(ValueError):
            haar_sample_approx(3, -1.0, np.random.default_rng(0))


def ball_transforms(lattices: list[UnimodularLattice]) -> EmpiricalDistribution:
    """Distribution of the unit-ball Siegel transform over the lattices."""
    ball = BallIndicator(1.0)
    return EmpiricalDistribution.of([siegel_transform(ball, lattice) for lattice in lattices])


class TestSamplerConsistency:
    """Test cases comparing the flow sampler with the exact 2D sampler."""

    def test_two_sample_ks(self) -> None:
        """Test Siegel transforms under both samplers have close distributions at t0 = 32."""
        exact = ball_transforms([haar_sample_exact_2d(trial_rng(1, i)) for i in range(1000)])
        approx = ball_transforms(
            [haar_sample_approx(2, 32.0, trial_rng(2, i)) for i in range(1000)]
        )
        assert ks_two_sample(exact, approx) < 0.1

    @pytest.mark.slow
    def test_two_sample_ks_by_flow_time(self) -> None:
        """Test the two-sample distance is small at every flow time."""
        size = 5000
        exact = ball_transforms([haar_sample_exact_2d(trial_rng(3, i)) for i in range(size)])
        for t0 in (4.0, 8.0, 16.0, 32.0):
            approx = ball_transforms(
                [haar_sample_approx(2, t0, trial_rng(4, i)) for i in range(size)]
            )
            assert ks_two_sample(exact, approx) < 0.05


class TestDirectCountMonotonicity:
    """Test cases for the direct counter as the constants grow."""

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_nondecreasing_in_each_constant(self, d: int) -> None:
        """Test enlarging any one c_i never lowers the count."""
        rng = np.random.default_rng(200 + d)
        weights = np.array([1.0]) if d == 1 else np.full(d, 1.0 / d)
        for _ in range(10):
            x = rng.random(d)
            constants = rng.uniform(0.2, 2.0, size=d)
            base = dioph_count_direct(DiophantineProblem(weights, constants), x, 256)
            for i in range(d):
                larger = constants.copy()
                larger[i] *= float(rng.uniform(1.0, 3.0))
                assert dioph_count_direct(DiophantineProblem(weights, larger), x, 256) >= base
