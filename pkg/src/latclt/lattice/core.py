"""Core lattice types and group actions.

This module provides the unimodular lattice representation shared by every
other part of the package, together with the diagonal matrices used as flow
elements and the lattices attached to points of the torus.

Bases are stored column-wise: the lattice is ``basis @ Z^n`` and a matrix ``g``
acts by left multiplication, ``g @ basis``.
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

MatrixD = npt.NDArray[np.float64]

MIN_DIMENSION = 2
MAX_DIMENSION = 8
UNIMODULAR_TOLERANCE = 1e-9


class LatticeError(ValueError):
    """Base exception for invalid lattice input."""

    pass


class NonUnimodularError(LatticeError):
    """Raised when a matrix that must have determinant +-1 does not."""

    pass


def as_matrix(entries: npt.ArrayLike) -> MatrixD:
    """Convert input to a finite square float matrix.

    Args:
        entries: Nested sequence or array of matrix entries.

    Returns:
        A float64 square matrix.

    Raises:
        LatticeError: If the input is not square or has non-finite entries.
    """
    matrix = np.array(entries, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise LatticeError(f"Expected a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise LatticeError("Matrix has non-finite entries")
    return matrix


def _check_unimodular(matrix: MatrixD, what: str) -> None:
    det = float(np.linalg.det(matrix))
    if abs(abs(det) - 1.0) > UNIMODULAR_TOLERANCE:
        raise NonUnimodularError(f"{what} must have |det| = 1, got det = {det:.12g}")


@dataclass(frozen=True, eq=False)
class UnimodularLattice:
    """A full-rank lattice of covolume one.

    Attributes:
        basis: Square matrix whose columns generate the lattice.
    """

    basis: MatrixD

    def __post_init__(self) -> None:
        basis = as_matrix(self.basis)
        n = basis.shape[0]
        if not MIN_DIMENSION <= n <= MAX_DIMENSION:
            raise LatticeError(
                f"Lattice dimension must be in [{MIN_DIMENSION}, {MAX_DIMENSION}], got {n}"
            )
        _check_unimodular(basis, "Lattice basis")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def from_basis(cls, basis: npt.ArrayLike) -> "UnimodularLattice":
        """Build a lattice from any full-rank basis, rescaling it to covolume one.

        Args:
            basis: Square matrix with linearly independent columns.

        Returns:
            The lattice spanned by ``basis / |det(basis)|^(1/n)``.

        Raises:
            LatticeError: If the columns are linearly dependent.
        """
        matrix = as_matrix(basis)
        det = abs(float(np.linalg.det(matrix)))
        if det < 1e-12:
            raise LatticeError("Basis columns are linearly dependent")
        return cls(matrix / det ** (1.0 / matrix.shape[0]))

    @classmethod
    def integer_lattice(cls, n: int) -> "UnimodularLattice":
        """Return the standard lattice Z^n."""
        return cls(np.eye(n))

    @property
    def dim(self) -> int:
        """Dimension of the ambient space."""
        return int(self.basis.shape[0])

    def vectors(self, coefficients: npt.ArrayLike) -> MatrixD:
        """Map integer coefficient rows to lattice vectors (one vector per row)."""
        coeffs = np.asarray(coefficients, dtype=np.float64)
        return coeffs @ self.basis.T


def lattice_from_point(x: Sequence[float] | npt.NDArray[np.float64]) -> UnimodularLattice:
    """Build the lattice {(p - q x, q) : p in Z^d, q in Z} attached to a point x.

    Args:
        x: Point of R^d, d >= 1.

    Returns:
        Lattice of dimension d + 1 with basis ``[[I, -x], [0, 1]]``.

    Raises:
        LatticeError: If x is empty.
    """
    point = np.asarray(x, dtype=np.float64).reshape(-1)
    d = point.size
    if d < 1:
        raise LatticeError("lattice_from_point needs at least one coordinate")
    basis = np.eye(d + 1)
    basis[:d, d] = -point
    return UnimodularLattice(basis)


def diagonal(entries: Sequence[float] | npt.NDArray[np.float64]) -> MatrixD:
    """Build a diagonal matrix of determinant one.

    Args:
        entries: Diagonal entries; their product must be 1 within 1e-9.

    Returns:
        The diagonal matrix.

    Raises:
        NonUnimodularError: If the product of the entries is not 1.
    """
    values = np.asarray(entries, dtype=np.float64).reshape(-1)
    product = float(np.prod(values))
    if abs(product - 1.0) > UNIMODULAR_TOLERANCE:
        raise NonUnimodularError(f"Diagonal entries must multiply to 1, got {product:.12g}")
    return np.diag(values)


def apply(g: npt.ArrayLike, lattice: UnimodularLattice) -> UnimodularLattice:
    """Act on a lattice by a unimodular matrix.

    Args:
        g: Matrix with |det g| = 1 within 1e-9.
        lattice: Lattice of matching dimension.

    Returns:
        The lattice with basis ``g @ lattice.basis``.

    Raises:
        NonUnimodularError: If g is not unimodular.
        LatticeError: If the dimensions differ.
    """
    matrix = as_matrix(g)
    if matrix.shape[0] != lattice.dim:
        raise LatticeError(f"Dimension mismatch: {matrix.shape[0]} vs {lattice.dim}")
    _check_unimodular(matrix, "Group element")
    return UnimodularLattice(matrix @ lattice.basis)
