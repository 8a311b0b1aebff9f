"""LLL basis reduction in floating point.

The reduction works on column bases and tracks the integer change-of-basis
matrix ``U`` with ``reduced = basis @ U``, so that coefficients found in the
reduced basis can be mapped back to exact integer coordinates.
"""

import logging

import numpy as np
import numpy.typing as npt

from latclt.lattice.core import LatticeError, MatrixD, UnimodularLattice, as_matrix

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 0.99
MAX_CONDITION_NUMBER = 1e12
SIZE_REDUCTION_SLACK = 1e-9

IntMatrix = npt.NDArray[np.int64]


class IllConditionedBasisError(LatticeError):
    """Raised when a basis is too ill-conditioned for double precision reduction."""

    pass


def gram_schmidt(basis: MatrixD) -> tuple[MatrixD, npt.NDArray[np.float64]]:
    """Compute Gram-Schmidt coefficients of a column basis.

    Args:
        basis: Square matrix with linearly independent columns.

    Returns:
        Tuple ``(mu, bstar_sq)`` where ``mu[i, j] = <b_i, b*_j> / <b*_j, b*_j>``
        (unit lower triangular) and ``bstar_sq[i] = |b*_i|^2``.
    """
    _, r = np.linalg.qr(basis)
    diag = np.diag(r)
    mu = (r / diag[:, None]).T
    return mu, diag**2


def _check_conditioning(basis: MatrixD, max_condition: float) -> None:
    cond = float(np.linalg.cond(basis))
    if not np.isfinite(cond) or cond > max_condition:
        raise IllConditionedBasisError(
            f"Basis condition number {cond:.3g} exceeds {max_condition:.0e}"
        )


def _validate_delta(delta: float) -> None:
    if not 0.25 < delta < 1.0:
        raise ValueError(f"LLL parameter delta must lie in (0.25, 1), got {delta}")


def reduce_basis(
    basis: npt.ArrayLike,
    delta: float = DEFAULT_DELTA,
    max_swaps: int = 100_000,
    max_condition: float | None = MAX_CONDITION_NUMBER,
) -> tuple[MatrixD, IntMatrix]:
    """LLL-reduce a column basis.

    Args:
        basis: Square matrix with linearly independent columns.
        delta: Lovasz parameter in (0.25, 1).
        max_swaps: Safety limit on the number of column swaps.
        max_condition: Largest accepted condition number of the input, or
            None to skip the check for bases that are ill-conditioned only
            through a known diagonal rescaling.

    Returns:
        Tuple ``(reduced, u)`` with ``reduced = basis @ u`` and ``u`` an
        integer matrix of determinant +-1.

    Raises:
        IllConditionedBasisError: If the condition number exceeds
            ``max_condition`` or the reduction does not terminate within ``max_swaps`` swaps.
    """
    _validate_delta(delta)
    b = as_matrix(basis).copy()
    n = b.shape[0]
    if max_condition is not None:
        _check_conditioning(b, max_condition)

    u: IntMatrix = np.eye(n, dtype=np.int64)
    mu, bstar_sq = gram_schmidt(b)
    swaps = 0
    k = 1
    while k < n:
        # Repeat size reduction until the float coefficients settle.
        for _ in range(8):
            if np.all(np.abs(mu[k, :k]) <= 0.5 + SIZE_REDUCTION_SLACK):
                break
            for j in range(k - 1, -1, -1):
                q = int(np.rint(mu[k, j]))
                if q:
                    b[:, k] -= q * b[:, j]
                    u[:, k] -= q * u[:, j]
                    mu[k, : j + 1] -= q * mu[j, : j + 1]
            mu, bstar_sq = gram_schmidt(b)

        if bstar_sq[k] >= (delta - mu[k, k - 1] ** 2) * bstar_sq[k - 1]:
            k += 1
            continue

        b[:, [k - 1, k]] = b[:, [k, k - 1]]
        u[:, [k - 1, k]] = u[:, [k, k - 1]]
        mu, bstar_sq = gram_schmidt(b)
        k = max(k - 1, 1)
        swaps += 1
        if swaps > max_swaps:
            raise IllConditionedBasisError(f"LLL did not terminate after {max_swaps} swaps")

    logger.debug(f"LLL finished in dimension {n} after {swaps} swaps")
    return b, u


def is_lll_reduced(
    basis: npt.ArrayLike, delta: float = DEFAULT_DELTA, tolerance: float = 1e-9
) -> bool:
    """Check the size-reduction and Lovasz conditions.

    Args:
        basis: Square column basis.
        delta: Lovasz parameter.
        tolerance: Absolute slack on both conditions.

    Returns:
        True if the basis is LLL-reduced with parameter ``delta``.
    """
    mu, bstar_sq = gram_schmidt(as_matrix(basis))
    n = mu.shape[0]
    for i in range(1, n):
        if np.any(np.abs(mu[i, :i]) > 0.5 + tolerance):
            return False
        lhs = bstar_sq[i]
        rhs = (delta - mu[i, i - 1] ** 2) * bstar_sq[i - 1]
        if lhs < rhs * (1.0 - tolerance):
            return False
    return True


def lll_reduce(lattice: UnimodularLattice, delta: float = DEFAULT_DELTA) -> UnimodularLattice:
    """Return the same lattice with an LLL-reduced basis.

    Args:
        lattice: Lattice to reduce.
        delta: Lovasz parameter in (0.25, 1).

    Returns:
        Lattice whose basis is LLL-reduced and spans the same lattice.
    """
    reduced, _ = reduce_basis(lattice.basis, delta)
    return UnimodularLattice(reduced)
