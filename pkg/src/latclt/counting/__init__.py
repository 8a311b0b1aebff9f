"""Exact lattice-point counting in product domains."""

from latclt.counting.counter import (
    count_by_tile,
    count_in_domain,
    count_spiraling,
    domain_points,
    points_from_coefficients,
)
from latclt.counting.oracle import IntractableBoxError, brute_force_count, coefficient_box_radius
from latclt.counting.tiles import DyadicTile, exponent_ranges, tile_cover

__all__ = [
    # Tiles
    "DyadicTile",
    "exponent_ranges",
    "tile_cover",
    # Counter
    "count_by_tile",
    "count_in_domain",
    "count_spiraling",
    "domain_points",
    "points_from_coefficients",
    # Oracle
    "IntractableBoxError",
    "brute_force_count",
    "coefficient_box_radius",
]
