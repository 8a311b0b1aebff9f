"""Exact lattice-point counts in product domains via the dyadic tile cover."""

import logging

import numpy as np

from latclt.counting.tiles import DyadicTile, tile_cover
from latclt.geometry.angular import AngularTarget
from latclt.geometry.domains import BlockSystem, DomainError, ProductDomain, domain_mask
from latclt.lattice.core import MatrixD, UnimodularLattice
from latclt.lattice.enumeration import DEFAULT_MAX_POINTS, LatticePoints, enumerate_points
from latclt.lattice.reduction import IntMatrix

logger = logging.getLogger(__name__)

# Tile rescaling stretches the basis by up to a factor T^2.
TILE_MAX_CONDITION = 1e16


def points_from_coefficients(basis: MatrixD, coefficients: IntMatrix) -> MatrixD:
    """Recompute lattice vectors ``basis @ m`` row by row from integer coefficients."""
    vectors: MatrixD = coefficients.astype(np.float64) @ basis.T
    return vectors


def _check_dimensions(lattice: UnimodularLattice, system: BlockSystem) -> None:
    if lattice.dim != system.dim:
        raise DomainError(f"Lattice dimension {lattice.dim} does not match system {system.dim}")


def _tile_points(
    lattice: UnimodularLattice,
    domain: ProductDomain,
    tile: DyadicTile,
    max_points: int,
) -> LatticePoints:
    image = domain.system.stacked @ lattice.basis
    reference = image / tile.scaling[:, None]
    candidates = enumerate_points(
        reference, tile.radius, max_points, max_condition=TILE_MAX_CONDITION
    )
    if len(candidates) == 0:
        return candidates
    vectors = points_from_coefficients(lattice.basis, candidates.coefficients)
    inside = domain_mask(domain, vectors)
    inside &= tile.matches(domain.system.block_norms(vectors))
    return LatticePoints(vectors[inside], candidates.coefficients[inside])


def _iter_tile_points(
    lattice: UnimodularLattice, domain: ProductDomain, max_points: int
) -> list[tuple[DyadicTile, LatticePoints]]:
    _check_dimensions(lattice, domain.system)
    return [
        (tile, _tile_points(lattice, domain, tile, max_points)) for tile in tile_cover(domain)
    ]


def domain_points(
    lattice: UnimodularLattice,
    domain: ProductDomain,
    max_points: int = DEFAULT_MAX_POINTS,
) -> LatticePoints:
    """All nonzero lattice points inside the domain.

    Args:
        lattice: The lattice.
        domain: Product domain of the same dimension.
        max_points: Enumeration cap per tile.

    Returns:
        The points with their integer coefficients, each point once.
    """
    parts = [points for _, points in _iter_tile_points(lattice, domain, max_points)]
    parts = [points for points in parts if len(points)]
    if not parts:
        return LatticePoints.empty(lattice.dim)
    return LatticePoints(
        np.concatenate([points.vectors for points in parts]),
        np.concatenate([points.coefficients for points in parts]),
    )


def count_in_domain(
    lattice: UnimodularLattice,
    domain: ProductDomain,
    max_points: int = DEFAULT_MAX_POINTS,
) -> int:
    """Number of nonzero lattice points in the domain.

    Raises:
        EnumerationOverflowError: If a tile enumeration exceeds ``max_points``.
        DomainError: On a dimension mismatch.
    """
    count = len(domain_points(lattice, domain, max_points))
    logger.debug(f"Counted {count} points for T={domain.T:g}")
    return count


def count_by_tile(
    lattice: UnimodularLattice,
    domain: ProductDomain,
    max_points: int = DEFAULT_MAX_POINTS,
) -> dict[tuple[int, ...], int]:
    """Per-tile breakdown of :func:`count_in_domain`, keyed by dyadic exponents."""
    return {
        tile.exponents: len(points)
        for tile, points in _iter_tile_points(lattice, domain, max_points)
    }


def count_spiraling(
    lattice: UnimodularLattice,
    domain: ProductDomain,
    target: AngularTarget,
    max_points: int = DEFAULT_MAX_POINTS,
) -> int:
    """Number of lattice points in the domain whose block directions lie in ``target``."""
    target.check(domain.system)
    points = domain_points(lattice, domain, max_points)
    if len(points) == 0:
        return 0
    return int(np.count_nonzero(target.contains(domain.system, points.vectors)))
