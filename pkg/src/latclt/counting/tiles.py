"""Dyadic tile cover of product domains.

Tiles are indexed by the dyadic exponents ``k_i = floor(log2 ||L_i(x)||)`` of
the first ``k - 1`` block norms. Each tile is rescaled by a diagonal matrix
into a bounded reference region, so that one ball enumeration of the rescaled
lattice finds every lattice point of the tile.
"""

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from latclt.geometry.domains import BoolArray, PointArray, ProductDomain

logger = logging.getLogger(__name__)

RADIUS_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class DyadicTile:
    """One tile of the cover.

    Attributes:
        exponents: Dyadic exponents ``k_1, ..., k_{k-1}``; block norm i lies in
            ``[2^{k_i}, 2^{k_i + 1})``.
        scaling: Diagonal of the matrix that maps the reference region onto the
            tile, one entry per coordinate of ``y = M x``.
        radius: Radius of a ball containing the reference region.
    """

    exponents: tuple[int, ...]
    scaling: npt.NDArray[np.float64]
    radius: float

    def matches(self, block_norms: PointArray) -> BoolArray:
        """Flag the rows whose first block norms fall in this tile.

        Exponents are read from the binary representation, so the test is
        exact for every finite positive norm.
        """
        if not self.exponents:
            return np.ones(block_norms.shape[0], dtype=bool)
        _, exps = np.frexp(block_norms[:, : len(self.exponents)])
        mask: BoolArray = np.all(exps - 1 == np.asarray(self.exponents), axis=1)
        return mask


def exponent_ranges(domain: ProductDomain) -> list[range]:
    """Candidate exponents for each of the first ``k - 1`` blocks.

    Block norm i satisfies ``r_i < T`` and ``r_i^{d_i} > a / T^{d - d_i}``; the
    lower end is widened by one dyadic step.
    """
    dims = domain.system.block_dims
    d = domain.system.dim
    log_t = math.log2(domain.T)
    top = math.ceil(log_t) - 1
    ranges = []
    for size in dims[:-1]:
        low = (math.log2(domain.a) - (d - size) * log_t) / size
        ranges.append(range(math.floor(low) - 1, top + 1))
    return ranges


def _max_product(domain: ProductDomain, exponents: tuple[int, ...]) -> float:
    dims = domain.system.block_dims
    product = domain.T ** dims[-1]
    for k_i, size in zip(exponents, dims[:-1], strict=True):
        product *= min(2.0 ** (k_i + 1), domain.T) ** size
    return product


def tile_cover(domain: ProductDomain) -> list[DyadicTile]:
    """Dyadic tiles covering the domain.

    Args:
        domain: The domain to cover.

    Returns:
        Tiles in lexicographic order of their exponents; empty when
        ``T^d <= a``.
    """
    dims = domain.system.block_dims
    d = domain.system.dim
    if domain.T**d <= domain.a:
        return []

    last = dims[-1]
    tiles = []
    for exponents in itertools.product(*exponent_ranges(domain)):
        # Factor 2 guards the pruning against rounding at the edges.
        if 2.0 * _max_product(domain, exponents) <= domain.a:
            continue
        log_min_product = sum(k_i * size for k_i, size in zip(exponents, dims[:-1], strict=True))
        scaling = np.empty(d)
        offset = 0
        for k_i, size in zip(exponents, dims[:-1], strict=True):
            scaling[offset : offset + size] = 2.0**k_i
            offset += size
        scaling[offset:] = 2.0 ** (-log_min_product / last)
        radius_sq = 4.0 * len(exponents) + domain.b ** (2.0 / last)
        tiles.append(
            DyadicTile(
                exponents=tuple(int(k_i) for k_i in exponents),
                scaling=scaling,
                radius=math.sqrt(radius_sq) * (1.0 + RADIUS_SLACK),
            )
        )

    logger.debug(f"Tile cover with {len(tiles)} tiles for T={domain.T:g}")
    return tiles
