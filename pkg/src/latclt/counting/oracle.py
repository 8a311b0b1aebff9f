"""Exhaustive counting over a box of integer coefficients.

This is an independent code path used to check the tile-cover counter.
"""

import itertools
import logging
import math
from collections.abc import Iterator

import numpy as np

from latclt.counting.counter import points_from_coefficients
from latclt.geometry.angular import AngularTarget
from latclt.geometry.domains import DomainError, ProductDomain, domain_mask
from latclt.lattice.core import UnimodularLattice
from latclt.lattice.reduction import IntMatrix

logger = logging.getLogger(__name__)

MAX_BOX_SCALE = 1e3
MAX_BOX_POINTS = 10**9


class IntractableBoxError(ValueError):
    """Raised when the coefficient box for brute-force counting is too large."""

    pass


def coefficient_box_radius(lattice: UnimodularLattice, domain: ProductDomain) -> int:
    """Half-width of a coefficient box containing every point of the domain.

    Points of the domain satisfy ``|M x| < sqrt(k) T``, so their coefficients
    are bounded by ``sqrt(k) T ||(M B)^{-1}||``.

    Raises:
        IntractableBoxError: If ``T ||(M B)^{-1}||`` exceeds 1e3 or the box has
            more than 1e9 points.
    """
    image = domain.system.stacked @ lattice.basis
    inverse_norm = float(np.linalg.norm(np.linalg.inv(image), ord=2))
    scale = domain.T * inverse_norm
    if scale > MAX_BOX_SCALE:
        raise IntractableBoxError(f"Coefficient box scale {scale:.3g} exceeds {MAX_BOX_SCALE:g}")
    k = len(domain.system.block_dims)
    radius = math.ceil(scale * math.sqrt(k)) + 1
    if (2 * radius + 1) ** lattice.dim > MAX_BOX_POINTS:
        raise IntractableBoxError(
            f"Coefficient box of radius {radius} in dimension {lattice.dim} is too large"
        )
    return radius


def _iter_box_slices(radius: int, n: int) -> Iterator[IntMatrix]:
    """Yield the coefficient box in slices of at most (2r+1)^2 rows."""
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    tail = min(n, 2)
    grid = np.stack(np.meshgrid(*([axis] * tail), indexing="ij"), axis=-1).reshape(-1, tail)
    for head in itertools.product(axis.tolist(), repeat=n - tail):
        block = np.empty((grid.shape[0], n), dtype=np.int64)
        block[:, : n - tail] = head
        block[:, n - tail :] = grid
        yield block


def brute_force_count(
    lattice: UnimodularLattice,
    domain: ProductDomain,
    target: AngularTarget | None = None,
) -> int:
    """Count domain points by testing every coefficient vector in a box.

    Args:
        lattice: The lattice.
        domain: Product domain of matching dimension.
        target: Optional angular target for spiraling counts.

    Returns:
        The count, which equals the tile-cover count.
    """
    if lattice.dim != domain.system.dim:
        raise DomainError(
            f"Lattice dimension {lattice.dim} does not match system {domain.system.dim}"
        )
    if target is not None:
        target.check(domain.system)
    radius = coefficient_box_radius(lattice, domain)
    total = 0
    for coefficients in _iter_box_slices(radius, lattice.dim):
        vectors = points_from_coefficients(lattice.basis, coefficients)
        mask = domain_mask(domain, vectors)
        if target is not None and mask.any():
            mask &= target.contains(domain.system, vectors)
        total += int(np.count_nonzero(mask))
    logger.debug(f"Brute-force count {total} over coefficient box of radius {radius}")
    return total
