"""Lattice representation, reduction and enumeration."""

from latclt.lattice.core import (
    LatticeError,
    MatrixD,
    NonUnimodularError,
    UnimodularLattice,
    apply,
    as_matrix,
    diagonal,
    lattice_from_point,
)
from latclt.lattice.enumeration import (
    DEFAULT_MAX_POINTS,
    EnumerationOverflowError,
    LatticePoints,
    enumerate_coefficients,
    enumerate_in_ball,
    enumerate_points,
    shortest_vector_length,
)
from latclt.lattice.reduction import (
    DEFAULT_DELTA,
    IllConditionedBasisError,
    gram_schmidt,
    is_lll_reduced,
    lll_reduce,
    reduce_basis,
)

__all__ = [
    # Core
    "MatrixD",
    "UnimodularLattice",
    "LatticeError",
    "NonUnimodularError",
    "apply",
    "as_matrix",
    "diagonal",
    "lattice_from_point",
    # Reduction
    "DEFAULT_DELTA",
    "IllConditionedBasisError",
    "gram_schmidt",
    "is_lll_reduced",
    "lll_reduce",
    "reduce_basis",
    # Enumeration
    "DEFAULT_MAX_POINTS",
    "EnumerationOverflowError",
    "LatticePoints",
    "enumerate_coefficients",
    "enumerate_in_ball",
    "enumerate_points",
    "shortest_vector_length",
]
