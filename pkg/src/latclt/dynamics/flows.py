"""Diagonal flow elements acting on lattices.

Flow elements are stored through the natural logarithms of their diagonal
entries, which add under composition and make separations easy to compute.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from latclt.lattice.core import (
    UNIMODULAR_TOLERANCE,
    MatrixD,
    NonUnimodularError,
    UnimodularLattice,
    apply,
    diagonal,
)


@dataclass(frozen=True, eq=False)
class FlowElement:
    """A diagonal matrix of determinant one.

    Attributes:
        log_entries: Natural logarithms of the diagonal entries; they sum to 0.
    """

    log_entries: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        logs = np.array(self.log_entries, dtype=np.float64).reshape(-1)
        if logs.size < 2 or not np.all(np.isfinite(logs)):
            raise NonUnimodularError("Flow elements need at least two finite entries")
        if abs(math.expm1(float(np.sum(logs)))) > UNIMODULAR_TOLERANCE:
            raise NonUnimodularError(
                f"Flow entries must multiply to 1, got exp({float(np.sum(logs)):.3g})"
            )
        logs.setflags(write=False)
        object.__setattr__(self, "log_entries", logs)

    @classmethod
    def from_entries(cls, entries: Sequence[float]) -> "FlowElement":
        """Build from positive diagonal entries."""
        values = np.asarray(entries, dtype=np.float64)
        if np.any(values <= 0):
            raise NonUnimodularError("Flow entries must be positive")
        return cls(np.log(values))

    @classmethod
    def weighted(cls, weights: Sequence[float], t: float) -> "FlowElement":
        """``a_w(t) = diag(e^{w_1 t}, ..., e^{w_d t}, e^{-t})``."""
        return cls(t * np.append(np.asarray(weights, dtype=np.float64), -1.0))

    @classmethod
    def equal(cls, d: int, t: float) -> "FlowElement":
        """``g(t) = diag(e^{t/d}, ..., e^{t/d}, e^{-t})`` in dimension d + 1."""
        return cls.weighted([1.0 / d] * d, t)

    @classmethod
    def dyadic(cls, weights: Sequence[float]) -> "FlowElement":
        """``a = diag(2^{w_1}, ..., 2^{w_d}, 2^{-1})``."""
        return cls.weighted(weights, math.log(2.0))

    @classmethod
    def identity(cls, n: int) -> "FlowElement":
        return cls(np.zeros(n))

    @property
    def dim(self) -> int:
        return int(self.log_entries.size)

    @property
    def entries(self) -> npt.NDArray[np.float64]:
        """Diagonal entries."""
        return np.exp(self.log_entries)

    @property
    def matrix(self) -> MatrixD:
        """The diagonal matrix."""
        return diagonal(self.entries)

    def power(self, n: float) -> "FlowElement":
        """The element raised to the power n."""
        return FlowElement(n * self.log_entries)

    def compose(self, other: "FlowElement") -> "FlowElement":
        """Matrix product ``self @ other``."""
        if other.dim != self.dim:
            raise NonUnimodularError(f"Dimension mismatch: {self.dim} vs {other.dim}")
        return FlowElement(self.log_entries + other.log_entries)

    def act(self, lattice: UnimodularLattice) -> UnimodularLattice:
        """Apply the element to a lattice."""
        return apply(self.matrix, lattice)


def separation(g1: FlowElement, g2: FlowElement) -> float:
    """Largest absolute difference of log-diagonal entries."""
    if g1.dim != g2.dim:
        raise NonUnimodularError(f"Dimension mismatch: {g1.dim} vs {g2.dim}")
    return float(np.max(np.abs(g1.log_entries - g2.log_entries)))
