"""Complete enumeration of lattice points in Euclidean balls.

Enumeration runs a depth-first search over integer coefficients of an
LLL-reduced basis (Fincke-Pohst), bounding each level with the Gram-Schmidt
data from a QR factorization. Points are returned together with their integer
coefficients relative to the caller's basis.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from latclt.lattice.core import LatticeError, MatrixD, UnimodularLattice, as_matrix
from latclt.lattice.reduction import (
    DEFAULT_DELTA,
    MAX_CONDITION_NUMBER,
    IntMatrix,
    reduce_basis,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_POINTS = 10_000_000
SEARCH_SLACK = 1e-9
ACCEPT_SLACK = 1e-12


class EnumerationOverflowError(LatticeError):
    """Raised when an enumeration would produce more points than allowed."""

    pass


@dataclass(frozen=True)
class LatticePoints:
    """Lattice vectors with their integer coordinates.

    Attributes:
        vectors: Array of shape (m, n), one lattice vector per row.
        coefficients: Integer array of shape (m, n) with
            ``vectors[i] = basis @ coefficients[i]``.
    """

    vectors: MatrixD
    coefficients: IntMatrix

    def __len__(self) -> int:
        return int(self.vectors.shape[0])

    @classmethod
    def empty(cls, n: int) -> "LatticePoints":
        """Return an empty point set in dimension n."""
        return cls(np.zeros((0, n)), np.zeros((0, n), dtype=np.int64))

    def select(self, mask: npt.NDArray[np.bool_]) -> "LatticePoints":
        """Keep the rows where ``mask`` is true."""
        return LatticePoints(self.vectors[mask], self.coefficients[mask])


def enumerate_coefficients(
    basis: npt.ArrayLike,
    radius: float,
    max_points: int = DEFAULT_MAX_POINTS,
) -> IntMatrix:
    """Find all nonzero coefficient vectors m with ``|basis @ m| <= radius``.

    The search is complete for any basis, but only fast for reduced ones.

    Args:
        basis: Square column basis.
        radius: Ball radius, nonnegative.
        max_points: Upper bound on the number of candidates visited.

    Returns:
        Integer array of shape (m, n), one coefficient vector per row.

    Raises:
        EnumerationOverflowError: If more than ``max_points`` candidates arise.
        ValueError: If the radius is negative.
    """
    if radius < 0 or not math.isfinite(radius):
        raise ValueError(f"Radius must be finite and nonnegative, got {radius}")
    b = as_matrix(basis)
    n = b.shape[0]
    if radius == 0:
        return np.zeros((0, n), dtype=np.int64)

    _, r = np.linalg.qr(b)
    bound = radius * radius * (1.0 + SEARCH_SLACK) + SEARCH_SLACK
    coeffs = np.zeros(n, dtype=np.int64)
    blocks: list[IntMatrix] = []
    visited = 0

    def visit(level: int, remaining: float) -> None:
        nonlocal visited
        diag = r[level, level]
        center = -float(r[level, level + 1 :] @ coeffs[level + 1 :]) / diag
        half = math.sqrt(max(remaining, 0.0)) / abs(diag)
        lo = math.ceil(center - half)
        hi = math.floor(center + half)
        if hi < lo:
            return
        if level == 0:
            count = hi - lo + 1
            visited += count
            if visited > max_points:
                raise EnumerationOverflowError(
                    f"Enumeration exceeded {max_points} points at radius {radius:.6g}"
                )
            block = np.tile(coeffs, (count, 1))
            block[:, 0] = np.arange(lo, hi + 1, dtype=np.int64)
            blocks.append(block)
            return
        for value in range(lo, hi + 1):
            coeffs[level] = value
            offset = diag * (value - center)
            visit(level - 1, remaining - offset * offset)
        coeffs[level] = 0

    visit(n - 1, bound)

    if not blocks:
        return np.zeros((0, n), dtype=np.int64)
    found = np.concatenate(blocks)
    vectors = found @ b.T
    norms_sq = np.einsum("ij,ij->i", vectors, vectors)
    keep = (norms_sq <= radius * radius * (1.0 + ACCEPT_SLACK)) & np.any(found != 0, axis=1)
    return found[keep]


def enumerate_points(
    basis: npt.ArrayLike,
    radius: float,
    max_points: int = DEFAULT_MAX_POINTS,
    delta: float = DEFAULT_DELTA,
    max_condition: float | None = MAX_CONDITION_NUMBER,
) -> LatticePoints:
    """Enumerate nonzero points of the lattice spanned by any full-rank basis.

    Args:
        basis: Square column basis (any covolume).
        radius: Ball radius.
        max_points: Enumeration cap.
        delta: LLL parameter for the preprocessing step.
        max_condition: Condition-number guard passed to the reduction.

    Returns:
        Points with coefficients relative to ``basis``.
    """
    original = as_matrix(basis)
    n = original.shape[0]
    reduced, u = reduce_basis(original, delta, max_condition=max_condition)
    found = enumerate_coefficients(reduced, radius, max_points)
    if found.shape[0] == 0:
        return LatticePoints.empty(n)
    coefficients = found @ u.T
    vectors = found @ reduced.T
    logger.debug(f"Enumerated {found.shape[0]} points within radius {radius:.6g}")
    return LatticePoints(vectors, coefficients)


def enumerate_in_ball(
    lattice: UnimodularLattice,
    radius: float,
    max_points: int = DEFAULT_MAX_POINTS,
) -> LatticePoints:
    """Return every nonzero lattice vector of norm at most ``radius``, once each.

    Args:
        lattice: The lattice to search.
        radius: Ball radius, nonnegative.
        max_points: Result-size guard.

    Returns:
        The lattice points with coefficients relative to ``lattice.basis``.

    Raises:
        EnumerationOverflowError: If the cap is exceeded.
    """
    return enumerate_points(lattice.basis, radius, max_points)


def shortest_vector_length(lattice: UnimodularLattice) -> float:
    """Length of a shortest nonzero vector of the lattice."""
    reduced, _ = reduce_basis(lattice.basis)
    first = float(np.linalg.norm(reduced[:, 0]))
    candidates = enumerate_coefficients(reduced, first)
    if candidates.shape[0] == 0:
        return first
    vectors = candidates @ reduced.T
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", vectors, vectors))))
