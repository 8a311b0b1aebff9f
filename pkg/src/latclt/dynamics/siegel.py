"""Compactly supported test functions and their Siegel transforms."""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy import integrate

from latclt.geometry.domains import unit_ball_volume
from latclt.lattice.core import LatticeError, UnimodularLattice
from latclt.lattice.enumeration import DEFAULT_MAX_POINTS, enumerate_in_ball

Values = npt.NDArray[np.float64]


class TestFunction(ABC):
    """A bounded function on R^n supported in a ball."""

    __test__ = False

    @property
    @abstractmethod
    def support_radius(self) -> float:
        """Radius of a closed ball containing the support."""

    @abstractmethod
    def evaluate(self, points: Values) -> Values:
        """Function values at the rows of ``points``."""

    @abstractmethod
    def integral(self, n: int) -> float:
        """Lebesgue integral over R^n."""


@dataclass(frozen=True)
class BallIndicator(TestFunction):
    """Indicator of the closed ball ``|v| <= radius``."""

    radius: float

    def __post_init__(self) -> None:
        if not self.radius >= 0:
            raise ValueError(f"Radius must be nonnegative, got {self.radius}")

    @property
    def support_radius(self) -> float:
        return self.radius

    def evaluate(self, points: Values) -> Values:
        norms_sq = np.einsum("ij,ij->i", points, points)
        return (norms_sq <= self.radius**2).astype(np.float64)

    def integral(self, n: int) -> float:
        return unit_ball_volume(n) * self.radius**n


@dataclass(frozen=True, eq=False)
class BoxIndicator(TestFunction):
    """Indicator of the closed box ``|v_i| <= h_i``."""

    half_widths: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        widths = np.asarray(self.half_widths, dtype=np.float64).reshape(-1)
        if np.any(widths < 0) or not np.all(np.isfinite(widths)):
            raise ValueError(f"Half-widths must be finite and nonnegative, got {widths}")
        object.__setattr__(self, "half_widths", widths)

    @property
    def support_radius(self) -> float:
        return float(np.linalg.norm(self.half_widths))

    def evaluate(self, points: Values) -> Values:
        return np.all(np.abs(points) <= self.half_widths, axis=1).astype(np.float64)

    def integral(self, n: int) -> float:
        if n != self.half_widths.size:
            raise ValueError(f"Box lives in R^{self.half_widths.size}, not R^{n}")
        return float(np.prod(2.0 * self.half_widths))

    def pull_back(self, entries: npt.ArrayLike) -> "BoxIndicator":
        """The box indicator of ``v -> f(g v)`` for ``g = diag(entries)``."""
        return BoxIndicator(self.half_widths / np.asarray(entries, dtype=np.float64))


def _smooth_step(u: Values) -> Values:
    """C-infinity step from 1 at u <= 0 to 0 at u >= 1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        left = np.where(u < 1.0, np.exp(-1.0 / np.where(u < 1.0, 1.0 - u, 1.0)), 0.0)
        right = np.where(u > 0.0, np.exp(-1.0 / np.where(u > 0.0, u, 1.0)), 0.0)
    result: Values = left / (left + right)
    return result


@dataclass(frozen=True)
class RadialBump(TestFunction):
    """Smooth radial function equal to 1 on ``|v| <= radius - margin`` and 0 past ``radius``."""

    radius: float
    margin: float

    def __post_init__(self) -> None:
        if not 0 < self.margin <= self.radius:
            raise ValueError(f"Need 0 < margin <= radius, got {self.margin}, {self.radius}")

    @property
    def support_radius(self) -> float:
        return self.radius

    def profile(self, rho: Values) -> Values:
        """Value as a function of the norm."""
        return _smooth_step((rho - (self.radius - self.margin)) / self.margin)

    def evaluate(self, points: Values) -> Values:
        return self.profile(np.linalg.norm(points, axis=1))

    def integral(self, n: int) -> float:
        sphere_area = n * unit_ball_volume(n)
        inner = self.radius - self.margin
        shell, _ = integrate.quad(
            lambda rho: float(self.profile(np.array([rho]))[0]) * rho ** (n - 1),
            inner,
            self.radius,
        )
        return sphere_area * (inner**n / n + shell)


def siegel_transform(
    f: TestFunction,
    lattice: UnimodularLattice,
    max_points: int = DEFAULT_MAX_POINTS,
) -> float:
    """Sum of ``f`` over the nonzero vectors of the lattice.

    Raises:
        EnumerationOverflowError: If the lattice has too many points in the
            support, which signals a pathologically short vector.
    """
    if isinstance(f, BoxIndicator) and f.half_widths.size != lattice.dim:
        raise LatticeError(f"Box in R^{f.half_widths.size} on a lattice of dimension {lattice.dim}")
    points = enumerate_in_ball(lattice, f.support_radius, max_points)
    if len(points) == 0:
        return 0.0
    return float(math.fsum(f.evaluate(points.vectors)))
