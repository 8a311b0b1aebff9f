"""Angular targets for spiraling counts.

A target is a product of one factor per block, each a subset of the unit
sphere ``S^{d_i - 1}``: the whole sphere, a set of signs (``d_i = 1``), an arc
(``d_i = 2``) or a spherical cap (``d_i >= 3``). Measures are normalized so
the whole sphere has measure one.
"""

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy import special

from latclt.geometry.domains import BlockSystem, BoolArray, DomainError, PointArray

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FullFactor:
    """The whole sphere."""

    def measure(self) -> float:
        return 1.0

    def accepts(self, directions: PointArray) -> BoolArray:
        return np.ones(directions.shape[0], dtype=bool)

    def check_dim(self, size: int) -> None:
        pass


@dataclass(frozen=True)
class SignFactor:
    """A subset of ``{-1, +1}`` for a one-dimensional block."""

    signs: frozenset[int]

    def __post_init__(self) -> None:
        if not self.signs <= {-1, 1}:
            raise DomainError(f"Signs must be a subset of {{-1, +1}}, got {sorted(self.signs)}")

    def measure(self) -> float:
        return len(self.signs) / 2.0

    def accepts(self, directions: PointArray) -> BoolArray:
        signs = np.sign(directions[:, 0]).astype(np.int64)
        return np.isin(signs, sorted(self.signs))

    def check_dim(self, size: int) -> None:
        if size != 1:
            raise DomainError(f"Sign factors need a block of size 1, got {size}")


@dataclass(frozen=True)
class ArcFactor:
    """The arc of angles ``[start, end)`` on the circle, measured counterclockwise."""

    start: float
    end: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.end - self.start <= TWO_PI:
            raise DomainError(f"Arc [{self.start}, {self.end}) must have length in [0, 2*pi]")

    def measure(self) -> float:
        return (self.end - self.start) / TWO_PI

    def accepts(self, directions: PointArray) -> BoolArray:
        angles = np.arctan2(directions[:, 1], directions[:, 0])
        offset = np.mod(angles - self.start, TWO_PI)
        if self.end - self.start >= TWO_PI:
            return np.ones(directions.shape[0], dtype=bool)
        result: BoolArray = offset < self.end - self.start
        return result

    def check_dim(self, size: int) -> None:
        if size != 2:
            raise DomainError(f"Arc factors need a block of size 2, got {size}")


@dataclass(frozen=True, eq=False)
class CapFactor:
    """Directions within ``angle`` radians of a unit axis."""

    axis: npt.NDArray[np.float64]
    angle: float

    def __post_init__(self) -> None:
        axis = np.asarray(self.axis, dtype=np.float64).reshape(-1)
        norm = float(np.linalg.norm(axis))
        if norm == 0.0:
            raise DomainError("Cap axis must be nonzero")
        if not 0.0 <= self.angle <= math.pi:
            raise DomainError(f"Cap angle must lie in [0, pi], got {self.angle}")
        object.__setattr__(self, "axis", axis / norm)

    def measure(self) -> float:
        """Normalized area of the cap on ``S^{m-1}``."""
        m = self.axis.size
        half = 0.5 * float(special.betainc((m - 1) / 2.0, 0.5, math.sin(self.angle) ** 2))
        return half if self.angle <= math.pi / 2 else 1.0 - half

    def accepts(self, directions: PointArray) -> BoolArray:
        cosines = np.clip(directions @ self.axis, -1.0, 1.0)
        result: BoolArray = np.arccos(cosines) <= self.angle
        return result

    def check_dim(self, size: int) -> None:
        if size < 3 or size != self.axis.size:
            raise DomainError(f"Cap with axis in R^{self.axis.size} does not fit a block of size {size}")


AngularFactor = FullFactor | SignFactor | ArcFactor | CapFactor


@dataclass(frozen=True)
class AngularTarget:
    """Product target ``D = D_1 x ... x D_k`` on the block spheres.

    Attributes:
        factors: One factor per block.
    """

    factors: tuple[AngularFactor, ...]

    @classmethod
    def full(cls, k: int) -> "AngularTarget":
        """The target that accepts every direction."""
        return cls(tuple(FullFactor() for _ in range(k)))

    def check(self, system: BlockSystem) -> None:
        """Ensure the factors match the block sizes of ``system``.

        Raises:
            DomainError: On a mismatch.
        """
        if len(self.factors) != len(system.block_dims):
            raise DomainError(
                f"Target has {len(self.factors)} factors but the system has "
                f"{len(system.block_dims)} blocks"
            )
        for factor, size in zip(self.factors, system.block_dims, strict=True):
            factor.check_dim(size)

    def contains(self, system: BlockSystem, points: npt.ArrayLike) -> BoolArray:
        """Flag the rows of ``points`` whose radial projections lie in the target.

        Rows with a vanishing block have no direction and are rejected.
        """
        self.check(system)
        values = system.block_values(points)
        mask = np.ones(values[0].shape[0], dtype=bool)
        for factor, value in zip(self.factors, values, strict=True):
            norms = np.linalg.norm(value, axis=1)
            nonzero = norms > 0
            directions = np.divide(
                value, norms[:, None], out=np.zeros_like(value), where=nonzero[:, None]
            )
            mask &= nonzero & factor.accepts(directions)
        return mask


def angular_volume(target: AngularTarget) -> float:
    """Normalized product measure of the target, in [0, 1]."""
    return math.prod(factor.measure() for factor in target.factors)


def _parse_factor(entry: Mapping[str, Any], path: str) -> AngularFactor:
    kind = entry.get("kind")
    try:
        if kind == "full":
            return FullFactor()
        if kind == "sign":
            return SignFactor(frozenset(int(sign) for sign in entry["signs"]))
        if kind == "arc":
            return ArcFactor(float(entry["start"]), float(entry["end"]))
        if kind == "cap":
            return CapFactor(np.asarray(entry["axis"], dtype=np.float64), float(entry["angle"]))
    except KeyError as e:
        raise DomainError(f"{path}: missing key {e.args[0]!r} for kind {kind!r}") from e
    raise DomainError(f"{path}: unknown factor kind {kind!r}")


def parse_target(raw: Sequence[Mapping[str, Any]] | Mapping[str, Any]) -> AngularTarget:
    """Build a target from its JSON form.

    Args:
        raw: Either a list of factor objects or ``{"blocks": [...]}``. Each
            factor is ``{"kind": "full"}``, ``{"kind": "sign", "signs": [...]}``,
            ``{"kind": "arc", "start": a, "end": b}`` or
            ``{"kind": "cap", "axis": [...], "angle": t}``.

    Returns:
        The parsed target.

    Raises:
        DomainError: On malformed input.
    """
    entries = raw.get("blocks") if isinstance(raw, Mapping) else raw
    if not isinstance(entries, Sequence) or not entries:
        raise DomainError("target: expected a nonempty list of block factors")
    factors = []
    for index, entry in enumerate(entries):
        if not isinstance(entry, Mapping):
            raise DomainError(f"target.blocks[{index}]: expected an object")
        factors.append(_parse_factor(entry, f"target.blocks[{index}]"))
    return AngularTarget(tuple(factors))


def serialize_target(target: AngularTarget) -> list[dict[str, Any]]:
    """Inverse of :func:`parse_target`."""
    result: list[dict[str, Any]] = []
    for factor in target.factors:
        if isinstance(factor, SignFactor):
            result.append({"kind": "sign", "signs": sorted(factor.signs)})
        elif isinstance(factor, ArcFactor):
            result.append({"kind": "arc", "start": factor.start, "end": factor.end})
        elif isinstance(factor, CapFactor):
            result.append({"kind": "cap", "axis": factor.axis.tolist(), "angle": factor.angle})
        else:
            result.append({"kind": "full"})
    return result
