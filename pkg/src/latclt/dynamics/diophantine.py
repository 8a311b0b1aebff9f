"""Counting weighted Diophantine approximants.

For a point ``x`` in R^d, weights ``w`` and constants ``c``, an approximant is
a pair ``(p, q)`` with ``1 <= q < T`` and ``|q x_i - p_i| < c_i q^{-w_i}`` for
every i. Two counters are provided:

* :func:`dioph_count_direct` scans every denominator q.
* :func:`dioph_count_dynamical` sums a Siegel transform along the dyadic flow,
  level n contributing the approximants with ``2^n <= q < 2^{n+1}``.

Both counters accept candidates through :func:`approximation_mask`, so they
agree exactly.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import numpy.typing as npt

from latclt.lattice.core import MatrixD
from latclt.lattice.enumeration import DEFAULT_MAX_POINTS, enumerate_coefficients
from latclt.lattice.reduction import DEFAULT_DELTA, IntMatrix, reduce_basis

logger = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-12
BOX_SLACK = 1e-6
DIRECT_CHUNK = 1 << 16

Vector = npt.NDArray[np.float64]


class DiophantineError(ValueError):
    """Raised for invalid weights, constants or points."""

    pass


class CounterMismatchError(RuntimeError):
    """Raised when the direct and dynamical counts disagree."""

    pass


@dataclass(frozen=True, eq=False)
class DiophantineProblem:
    """Weights and constants of a weighted approximation problem.

    Attributes:
        weights: ``w_1, ..., w_d`` in (0, 1) summing to 1 (``w = (1,)`` when d = 1).
        constants: ``c_1, ..., c_d``, all positive.
    """

    weights: Vector
    constants: Vector

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64).reshape(-1)
        constants = np.array(self.constants, dtype=np.float64).reshape(-1)
        d = weights.size
        if d < 1 or constants.size != d:
            raise DiophantineError(
                f"Need d >= 1 weights and as many constants, got {d} and {constants.size}"
            )
        if abs(float(np.sum(weights)) - 1.0) > WEIGHT_TOLERANCE:
            raise DiophantineError(f"Weights must sum to 1, got {float(np.sum(weights))!r}")
        if d > 1 and not np.all((weights > 0) & (weights < 1)):
            raise DiophantineError(f"Weights must lie in (0, 1), got {weights.tolist()}")
        if not np.all(constants > 0) or not np.all(np.isfinite(constants)):
            raise DiophantineError(f"Constants must be positive, got {constants.tolist()}")
        weights.setflags(write=False)
        constants.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "constants", constants)

    @classmethod
    def equal_weights(cls, constants: Sequence[float]) -> "DiophantineProblem":
        """Problem with ``w_i = 1/d``."""
        d = len(constants)
        return cls(np.full(d, 1.0 / d), np.asarray(constants, dtype=np.float64))

    @property
    def d(self) -> int:
        return int(self.weights.size)

    @property
    def mean_coefficient(self) -> float:
        """``2^d c_1 ... c_d``, the growth rate of the count in ``log T``."""
        return float(2.0**self.d * np.prod(self.constants))


def _as_point(problem: DiophantineProblem, x: npt.ArrayLike) -> Vector:
    point = np.asarray(x, dtype=np.float64).reshape(-1)
    if point.size != problem.d or not np.all(np.isfinite(point)):
        raise DiophantineError(f"Expected a finite point in R^{problem.d}, got {point.tolist()}")
    return point


def coordinate_mask(
    x_i: float, c_i: float, w_i: float, q: Vector, p: npt.ArrayLike
) -> npt.NDArray[np.bool_]:
    """Elementwise test ``|q x_i - p| < c_i q^{-w_i}``."""
    return np.abs(q * x_i - np.asarray(p, dtype=np.float64)) < c_i * np.power(q, -w_i)


def approximation_mask(
    problem: DiophantineProblem, x: npt.ArrayLike, q: npt.ArrayLike, p: npt.ArrayLike
) -> npt.NDArray[np.bool_]:
    """Flag the rows ``(p, q)`` that satisfy every coordinate inequality.

    Args:
        problem: The problem.
        x: The point.
        q: Denominators, shape (m,).
        p: Numerators, shape (m, d).

    Returns:
        Boolean array of shape (m,).
    """
    point = _as_point(problem, x)
    qs = np.asarray(q, dtype=np.float64).reshape(-1)
    ps = np.asarray(p).reshape(qs.size, problem.d)
    mask = np.ones(qs.size, dtype=bool)
    for i in range(problem.d):
        mask &= coordinate_mask(
            float(point[i]), float(problem.constants[i]), float(problem.weights[i]), qs, ps[:, i]
        )
    return mask


def _direct_counts(problem: DiophantineProblem, point: Vector, qs: Vector) -> IntMatrix:
    """Number of approximants for each denominator in ``qs``."""
    totals = np.ones(qs.size, dtype=np.int64)
    for i in range(problem.d):
        x_i, c_i, w_i = float(point[i]), float(problem.constants[i]), float(problem.weights[i])
        radius = c_i * np.power(qs, -w_i)
        base = np.floor(qs * x_i - radius) - 1.0
        width = math.ceil(2.0 * c_i) + 3
        candidates = base[:, None] + np.arange(width, dtype=np.float64)[None, :]
        hits = coordinate_mask(x_i, c_i, w_i, qs[:, None], candidates)
        totals *= hits.sum(axis=1)
    return totals


def dioph_count_direct(problem: DiophantineProblem, x: npt.ArrayLike, T: float) -> int:
    """Number of approximants ``(p, q)`` with ``1 <= q < T``.

    Per coordinate the integers p_i in ``(q x_i - c_i q^{-w_i}, q x_i + c_i q^{-w_i})``
    are counted and the counts multiplied.
    """
    point = _as_point(problem, x)
    q_max = math.ceil(T) - 1
    total = 0
    for start in range(1, q_max + 1, DIRECT_CHUNK):
        qs = np.arange(start, min(start + DIRECT_CHUNK, q_max + 1), dtype=np.float64)
        total += int(np.sum(_direct_counts(problem, point, qs)))
    return total


class FlowedTorusLattice:
    """The lattice ``{(p - q x, q)}`` pushed by the dyadic flow ``a^n``.

    The point is held as exact rationals. At every level the basis is rebuilt
    from the exact product ``B_x U`` with the accumulated integer
    change-of-basis ``U``, then rescaled by ``a^n`` and LLL-reduced, so deep
    levels keep full double precision.
    """

    def __init__(
        self,
        problem: DiophantineProblem,
        x: Sequence[float] | Sequence[Fraction] | Vector,
        delta: float = DEFAULT_DELTA,
    ) -> None:
        self.problem = problem
        self.x = [Fraction(value) for value in x]
        if len(self.x) != problem.d:
            raise DiophantineError(f"Expected a point in R^{problem.d}, got {len(self.x)} values")
        self.delta = delta
        self._u: IntMatrix = np.eye(problem.d + 1, dtype=np.int64)

    def exact_columns(self) -> list[list[Fraction]]:
        """Columns of ``B_x U`` as exact rationals."""
        d = self.problem.d
        columns = []
        for j in range(d + 1):
            coeffs = [int(value) for value in self._u[:, j]]
            q = coeffs[d]
            columns.append([coeffs[i] - q * self.x[i] for i in range(d)] + [Fraction(q)])
        return columns

    def scaled_basis(self, log2_scales: Sequence[float]) -> MatrixD:
        """``diag(2^{s}) B_x U`` rounded entrywise from exact values."""
        columns = self.exact_columns()
        n = len(columns)
        basis = np.empty((n, n))
        for j, column in enumerate(columns):
            basis[:, j] = [float(value) for value in column]
        return basis * np.exp2(np.asarray(log2_scales, dtype=np.float64))[:, None]

    def reduce_at(self, log2_scales: Sequence[float]) -> tuple[MatrixD, IntMatrix]:
        """Reduce the rescaled lattice and accumulate the change of basis.

        Returns:
            Tuple ``(reduced, u)`` where ``reduced`` spans the rescaled lattice
            and ``u`` maps its coefficients to ``(p, q)`` coordinates.
        """
        basis = self.scaled_basis(log2_scales)
        reduced, step = reduce_basis(basis, self.delta, max_condition=None)
        self._u = self._u @ step
        return reduced, self._u.copy()

    def level(self, n: int) -> tuple[MatrixD, IntMatrix]:
        """Reduced basis of ``a^n Lambda_x``, with ``a = diag(2^{w_i}, 2^{-1})``."""
        scales = [n * float(w) for w in self.problem.weights] + [-float(n)]
        return self.reduce_at(scales)


def _level_radius(problem: DiophantineProblem) -> float:
    return math.sqrt(float(np.sum(problem.constants**2)) + 4.0) * (1.0 + BOX_SLACK)


def dioph_level_counts(
    problem: DiophantineProblem,
    x: npt.ArrayLike,
    N: int,
    max_points: int = DEFAULT_MAX_POINTS,
) -> list[int]:
    """Siegel transform of the level indicator along the flow, for n < N.

    Level n enumerates ``a^n Lambda_x`` in a ball around the box
    ``{1 <= y < 2, |v_i| <= c_i}``, recovers ``(p, q)`` from the integer
    coefficients and keeps the pairs with ``2^n <= q < 2^{n+1}`` that pass
    :func:`approximation_mask`.

    Returns:
        One count per level; their sum over n < N is the count at ``T = 2^N``.
    """
    if N < 0:
        raise DiophantineError(f"N must be nonnegative, got {N}")
    point = _as_point(problem, x)
    flow = FlowedTorusLattice(problem, point)
    radius = _level_radius(problem)
    d = problem.d
    counts = []
    for n in range(N):
        reduced, u = flow.level(n)
        found = enumerate_coefficients(reduced, radius, max_points)
        pq = found @ u.T
        q = pq[:, d]
        in_level = (q >= 1 << n) & (q < 1 << (n + 1))
        pq = pq[in_level]
        if pq.shape[0] == 0:
            counts.append(0)
            continue
        mask = approximation_mask(problem, point, pq[:, d], pq[:, :d])
        counts.append(int(np.count_nonzero(mask)))
    logger.debug(f"Level counts for N={N}: {counts}")
    return counts


def dioph_count_dynamical(
    problem: DiophantineProblem,
    x: npt.ArrayLike,
    N: int,
    max_points: int = DEFAULT_MAX_POINTS,
) -> int:
    """Count approximants with ``1 <= q < 2^N`` by summing along the dyadic flow."""
    return sum(dioph_level_counts(problem, x, N, max_points))


def audit_counts(problem: DiophantineProblem, x: npt.ArrayLike, N: int) -> int:
    """Run both counters and return the common value.

    Raises:
        CounterMismatchError: If the counts differ.
    """
    dynamical = dioph_count_dynamical(problem, x, N)
    direct = dioph_count_direct(problem, x, 2**N)
    if dynamical != direct:
        raise CounterMismatchError(
            f"Dynamical count {dynamical} != direct count {direct} at N={N}, "
            f"x={np.asarray(x).tolist()}"
        )
    return direct
