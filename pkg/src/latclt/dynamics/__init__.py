"""Diagonal flows, Siegel transforms, Diophantine counting and lattice sampling."""

from latclt.dynamics.diophantine import (
    CounterMismatchError,
    DiophantineError,
    DiophantineProblem,
    FlowedTorusLattice,
    approximation_mask,
    audit_counts,
    dioph_count_direct,
    dioph_count_dynamical,
    dioph_level_counts,
)
from latclt.dynamics.flows import FlowElement, separation
from latclt.dynamics.sampling import (
    haar_sample_approx,
    haar_sample_exact_2d,
    random_torus_point,
    trial_rng,
)
from latclt.dynamics.siegel import (
    BallIndicator,
    BoxIndicator,
    RadialBump,
    TestFunction,
    siegel_transform,
)

__all__ = [
    # Flows
    "FlowElement",
    "separation",
    # Test functions
    "TestFunction",
    "BallIndicator",
    "BoxIndicator",
    "RadialBump",
    "siegel_transform",
    # Diophantine counting
    "DiophantineProblem",
    "DiophantineError",
    "CounterMismatchError",
    "FlowedTorusLattice",
    "approximation_mask",
    "audit_counts",
    "dioph_count_direct",
    "dioph_count_dynamical",
    "dioph_level_counts",
    # Sampling
    "haar_sample_exact_2d",
    "haar_sample_approx",
    "random_torus_point",
    "trial_rng",
]
