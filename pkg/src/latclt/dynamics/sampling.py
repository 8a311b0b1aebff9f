"""Random unimodular lattices.

``haar_sample_exact_2d`` samples the invariant probability measure on 2D
unimodular lattices through the modular fundamental domain. In higher
dimensions ``haar_sample_approx`` pushes a uniformly random torus lattice
``Lambda_x`` by an expanding diagonal flow, whose translates equidistribute.
"""

import math
from fractions import Fraction

import numpy as np

from latclt.dynamics.diophantine import DiophantineProblem, FlowedTorusLattice
from latclt.lattice.core import UnimodularLattice, lattice_from_point

DEFAULT_T0 = 32.0
FLOW_STEP = 4.0
# x is drawn as k / 2^126 from two 63-bit integers.
RATIONAL_BITS = 63


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Counter-based stream for one trial, independent of worker assignment."""
    return np.random.Generator(
        np.random.Philox(key=master_seed, counter=[0, 0, trial_index, 0])
    )


def haar_sample_exact_2d(rng: np.random.Generator, rotate: bool = True) -> UnimodularLattice:
    """Sample a 2D unimodular lattice from the invariant probability measure.

    The point ``z = x + iy`` of the fundamental domain ``{|x| <= 1/2, |z| >= 1}``
    follows ``(3/pi) y^{-2} dx dy``: the x-marginal has density proportional
    to ``(1 - x^2)^{-1/2}``, so ``x = sin(theta)`` with theta uniform on
    ``[-pi/6, pi/6]``, and ``y = sqrt(1 - x^2) / U`` by inversion.

    Args:
        rng: Random generator.
        rotate: Compose with an independent uniform rotation.

    Returns:
        Lattice with basis ``R (1/sqrt(y)) [[1, x], [0, y]]``.
    """
    theta = rng.uniform(-math.pi / 6.0, math.pi / 6.0)
    x = math.sin(theta)
    y = math.sqrt(1.0 - x * x) / (1.0 - rng.random())
    basis = np.array([[1.0, x], [0.0, y]]) / math.sqrt(y)
    if rotate:
        phi = rng.uniform(0.0, 2.0 * math.pi)
        rotation = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
        basis = rotation @ basis
    return UnimodularLattice(basis)


def random_torus_point(d: int, rng: np.random.Generator) -> list[Fraction]:
    """Uniform point of ``[0, 1)^d`` as exact dyadic rationals with 126 bits."""
    draws = rng.integers(0, 1 << RATIONAL_BITS, size=(d, 2), dtype=np.uint64)
    denominator = 1 << (2 * RATIONAL_BITS)
    return [
        Fraction((int(high) << RATIONAL_BITS) + int(low), denominator) for high, low in draws
    ]


def haar_sample_approx(n: int, t0: float, rng: np.random.Generator) -> UnimodularLattice:
    """Approximate sample from the invariant measure in dimension n.

    Draws x uniformly from ``[0, 1]^{n-1}`` and returns ``a_w(t0) Lambda_x``
    with equal weights ``w_i = 1/(n-1)``. The flow is applied in steps of at
    most 4 with a reduction after each, recomputing the basis from exact
    rationals.

    Args:
        n: Lattice dimension, at least 2.
        t0: Flow time, nonnegative.
        rng: Random generator.

    Returns:
        A reduced basis of the flowed lattice, or ``Lambda_x`` itself when t0 = 0.
    """
    if n < 2:
        raise ValueError(f"Dimension must be at least 2, got {n}")
    if t0 < 0:
        raise ValueError(f"Flow time must be nonnegative, got {t0}")
    d = n - 1
    x = random_torus_point(d, rng)
    if t0 == 0:
        return lattice_from_point([float(value) for value in x])
    flow = FlowedTorusLattice(DiophantineProblem.equal_weights([1.0] * d), x)
    steps = max(1, math.ceil(t0 / FLOW_STEP))
    reduced = np.eye(n)
    for step in range(1, steps + 1):
        t = t0 * step / steps
        log2_scale = t / math.log(2.0)
        reduced, _ = flow.reduce_at([log2_scale / d] * d + [-log2_scale])
    return UnimodularLattice(reduced)
