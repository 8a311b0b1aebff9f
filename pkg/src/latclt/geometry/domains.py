"""Product-of-linear-forms domains and their volumes.

A domain is built from a system of linear maps ``L_1, ..., L_k`` with block
sizes ``d_1 + ... + d_k = d``. Points are tested through the stacked matrix
``M`` whose rows are the rows of the blocks, so ``y = M x`` holds the block
values side by side.

Two variants are supported:

* ``signed``: every block is one linear form and the product is the signed
  product ``L_1(x) ... L_d(x)``.
* ``norm``: the product is ``prod ||L_i(x)||^{d_i}``.
"""

import logging
import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np
import numpy.typing as npt
from scipy import integrate, special
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

logger = logging.getLogger(__name__)

Variant = Literal["signed", "norm"]
VolumeMethod = Literal["closed-form", "quadrature", "monte-carlo"]

MIN_STACKED_DET = 1e-9
QUADRATURE_REL_TOL = 1e-6
QUADRATURE_LIMIT = 50
MONTE_CARLO_SAMPLES = 1_000_000
MONTE_CARLO_CHUNK = 250_000

PointArray = npt.NDArray[np.float64]
BoolArray = npt.NDArray[np.bool_]


class DomainError(ValueError):
    """Raised for invalid block systems, domains or angular targets."""

    pass


class UndefinedDirectionError(DomainError):
    """Raised when a block value is zero, so its direction is undefined."""

    pass


class QuadratureError(DomainError):
    """Raised when the adaptive volume quadrature does not converge.

    Attributes:
        error_bound: Absolute error estimate achieved by the last attempt.
    """

    def __init__(self, message: str, error_bound: float) -> None:
        super().__init__(message)
        self.error_bound = error_bound


class VolumeEstimate(NamedTuple):
    """Monte Carlo volume estimate with its standard error."""

    value: float
    stderr: float


@dataclass(frozen=True, eq=False)
class BlockSystem:
    """A family of linear maps with linearly independent stacked rows.

    Attributes:
        blocks: One ``d_i x d`` matrix per linear map.
        variant: ``"signed"`` (all ``d_i = 1``) or ``"norm"``.
        stacked: The ``d x d`` matrix stacking all blocks.
    """

    blocks: tuple[npt.NDArray[np.float64], ...]
    variant: Variant = "signed"
    stacked: npt.NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.blocks:
            raise DomainError("A block system needs at least one block")
        blocks = tuple(np.atleast_2d(np.array(block, dtype=np.float64)) for block in self.blocks)
        d = blocks[0].shape[1]
        for block in blocks:
            if block.shape[1] != d or not np.all(np.isfinite(block)):
                raise DomainError(f"Block of shape {block.shape} does not act on R^{d}")
            block.setflags(write=False)
        if sum(block.shape[0] for block in blocks) != d:
            raise DomainError(f"Block sizes must add up to the dimension {d}")
        if self.variant not in ("signed", "norm"):
            raise DomainError(f"Unknown variant {self.variant!r}")
        if self.variant == "signed" and any(block.shape[0] != 1 for block in blocks):
            raise DomainError("The signed variant requires one linear form per block")
        stacked = np.vstack(blocks)
        if abs(float(np.linalg.det(stacked))) <= MIN_STACKED_DET:
            raise DomainError("Stacked block matrix is not invertible")
        stacked.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "stacked", stacked)

    @classmethod
    def identity(cls, d: int, variant: Variant = "signed") -> "BlockSystem":
        """Coordinate forms ``L_i(x) = x_i``."""
        return cls(tuple(np.eye(d)[i : i + 1] for i in range(d)), variant)

    @classmethod
    def from_matrix(
        cls,
        matrix: npt.ArrayLike,
        block_dims: Sequence[int] | None = None,
        variant: Variant | None = None,
    ) -> "BlockSystem":
        """Split a square matrix into row blocks.

        Args:
            matrix: Stacked ``d x d`` matrix.
            block_dims: Block sizes; defaults to ``d`` blocks of size one.
            variant: Defaults to ``"signed"`` when every block has size one.

        Returns:
            The block system.
        """
        stacked = np.array(matrix, dtype=np.float64)
        if stacked.ndim != 2 or stacked.shape[0] != stacked.shape[1]:
            raise DomainError(f"Expected a square matrix, got shape {stacked.shape}")
        dims = list(block_dims) if block_dims is not None else [1] * stacked.shape[0]
        if any(size < 1 for size in dims):
            raise DomainError(f"Block sizes must be positive, got {dims}")
        if variant is None:
            variant = "signed" if all(size == 1 for size in dims) else "norm"
        edges = np.cumsum([0, *dims])
        blocks = tuple(stacked[start:end] for start, end in zip(edges[:-1], edges[1:], strict=True))
        return cls(blocks, variant)

    @property
    def dim(self) -> int:
        """Ambient dimension d."""
        return int(self.blocks[0].shape[1])

    @property
    def block_dims(self) -> tuple[int, ...]:
        """Block sizes ``(d_1, ..., d_k)``."""
        return tuple(int(block.shape[0]) for block in self.blocks)

    @property
    def det(self) -> float:
        """Absolute determinant of the stacked matrix."""
        return abs(float(np.linalg.det(self.stacked)))

    def compose(self, g: npt.ArrayLike) -> "BlockSystem":
        """Return the system ``L_i o g`` for an invertible ``d x d`` matrix g."""
        matrix = np.asarray(g, dtype=np.float64)
        return BlockSystem(tuple(block @ matrix for block in self.blocks), self.variant)

    def block_values(self, points: npt.ArrayLike) -> list[PointArray]:
        """Evaluate every block on a batch of points.

        Args:
            points: Array of shape (m, d) or a single vector.

        Returns:
            One array of shape (m, d_i) per block.
        """
        y = _as_points(points, self.dim) @ self.stacked.T
        edges = np.cumsum([0, *self.block_dims])
        return [y[:, start:end] for start, end in zip(edges[:-1], edges[1:], strict=True)]

    def block_norms(self, points: npt.ArrayLike) -> PointArray:
        """Euclidean norm of each block value, shape (m, k)."""
        values = self.block_values(points)
        return np.column_stack([np.linalg.norm(value, axis=1) for value in values])


@dataclass(frozen=True, eq=False)
class ProductDomain:
    """The region ``{x : N(x) in (a, b), every block norm < T}``.

    Attributes:
        system: The block system defining ``N``.
        a: Lower endpoint, positive.
        b: Upper endpoint, greater than ``a``.
        T: Size parameter, at least one.
    """

    system: BlockSystem
    a: float
    b: float
    T: float

    def __post_init__(self) -> None:
        if not 0 < self.a < self.b:
            raise DomainError(f"Interval must satisfy 0 < a < b, got ({self.a}, {self.b})")
        if not self.T >= 1 or not math.isfinite(self.T):
            raise DomainError(f"T must be a finite number >= 1, got {self.T}")

    def with_T(self, T: float) -> "ProductDomain":
        """Same system and interval at another size parameter."""
        return ProductDomain(self.system, self.a, self.b, T)


def _as_points(points: npt.ArrayLike, d: int) -> PointArray:
    array = np.asarray(points, dtype=np.float64)
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2 or array.shape[1] != d:
        raise DomainError(f"Expected points of dimension {d}, got shape {array.shape}")
    return array


def product_values(system: BlockSystem, points: npt.ArrayLike) -> PointArray:
    """Vectorized :func:`product_value` over the rows of ``points``."""
    values = system.block_values(points)
    if system.variant == "signed":
        return np.prod(np.hstack(values), axis=1)
    result = np.ones(values[0].shape[0])
    for value, size in zip(values, system.block_dims, strict=True):
        result *= np.einsum("ij,ij->i", value, value) ** (size / 2.0)
    return result


def product_value(system: BlockSystem, x: npt.ArrayLike) -> float:
    """Signed product of the forms, or ``prod ||L_i(x)||^{d_i}`` in the norm variant."""
    return float(product_values(system, x)[0])


def domain_mask(domain: ProductDomain, points: npt.ArrayLike) -> BoolArray:
    """Strict membership test for a batch of points, one flag per row."""
    system = domain.system
    array = _as_points(points, system.dim)
    if array.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    inside_blocks = np.all(system.block_norms(array) < domain.T, axis=1)
    values = product_values(system, array)
    mask: BoolArray = inside_blocks & (values > domain.a) & (values < domain.b)
    return mask


def contains(domain: ProductDomain, x: npt.ArrayLike) -> bool:
    """True iff ``N(x)`` lies in ``(a, b)`` and every block norm is below ``T``."""
    return bool(domain_mask(domain, x)[0])


def angular_coords(system: BlockSystem, x: npt.ArrayLike) -> tuple[PointArray, ...]:
    """Radial projections ``L_i(x) / ||L_i(x)||`` of a single point.

    Raises:
        UndefinedDirectionError: If some block value is zero.
    """
    values = system.block_values(x)
    directions = []
    for index, value in enumerate(values):
        norm = float(np.linalg.norm(value[0]))
        if norm == 0.0:
            raise UndefinedDirectionError(f"Block {index} vanishes at {np.asarray(x).tolist()}")
        directions.append(value[0] / norm)
    return tuple(directions)


def _scaled_bounds(domain: ProductDomain) -> tuple[list[float], float]:
    """Bounds T_i = T^{d_i} in the coordinates s_i = ||y_i||^{d_i}, and the orthant factor."""
    dims = domain.system.block_dims
    bounds = [domain.T**size for size in dims]
    if domain.system.variant == "signed":
        factor = 2.0 ** (len(dims) - 1)
    else:
        factor = math.prod(unit_ball_volume(size) for size in dims)
    return bounds, factor


def unit_ball_volume(n: int) -> float:
    """Volume of the Euclidean unit ball in R^n."""
    return float(math.pi ** (n / 2.0) / special.gamma(n / 2.0 + 1.0))


def _sublevel_volume(v: float, bounds: Sequence[float]) -> float:
    """Volume of ``{s in prod (0, T_i) : s_1 ... s_k < v}``."""
    if v <= 0:
        return 0.0
    total = math.prod(bounds)
    log_ratio = max(0.0, math.log(total) - math.log(v))
    return float(total * special.gammaincc(len(bounds), log_ratio))


def _volume_closed_form(domain: ProductDomain) -> float:
    bounds, factor = _scaled_bounds(domain)
    shell = _sublevel_volume(domain.b, bounds) - _sublevel_volume(domain.a, bounds)
    return factor * shell / domain.system.det


class _NotConverged(Exception):
    def __init__(self, error_bound: float) -> None:
        super().__init__(f"error bound {error_bound:.3g}")
        self.error_bound = error_bound


def _sublevel_quadrature(v: float, bounds: Sequence[float], limit: int) -> tuple[float, float]:
    """Recursion ``F_m(v) = int_0^{T_m} F_{m-1}(v / y) dy`` with ``F_1(v) = min(v, T_1)``.

    The integral is split where ``F_{m-1}`` saturates at ``prod_{i<m} T_i`` and
    the remaining part is integrated in ``u = log y``.
    """
    if v <= 0:
        return 0.0, 0.0
    if len(bounds) == 1:
        return min(v, bounds[0]), 0.0
    head, last = bounds[:-1], bounds[-1]
    saturated = math.prod(head)
    y0 = min(last, v / saturated)
    flat = saturated * y0
    if y0 >= last:
        return flat, 0.0

    def integrand(u: float) -> float:
        y = math.exp(u)
        return _sublevel_quadrature(v / y, head, limit)[0] * y

    value, error, *_ = integrate.quad(
        integrand, math.log(y0), math.log(last), limit=limit, epsrel=QUADRATURE_REL_TOL,
        full_output=1,
    )
    return flat + float(value), float(error)


def volume_quadrature(domain: ProductDomain) -> float:
    """Volume by adaptive quadrature of the product-measure recursion.

    Each failed attempt doubles the subdivision limit; three attempts are made.

    Raises:
        QuadratureError: If the relative error target 1e-6 is not met.
    """
    bounds, factor = _scaled_bounds(domain)
    limits = iter([QUADRATURE_LIMIT * 2**attempt for attempt in range(3)])

    def attempt() -> float:
        limit = next(limits)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            upper, err_upper = _sublevel_quadrature(domain.b, bounds, limit)
            lower, err_lower = _sublevel_quadrature(domain.a, bounds, limit)
        shell = upper - lower
        error = err_upper + err_lower
        if error > QUADRATURE_REL_TOL * max(abs(shell), 1e-300):
            logger.debug(f"Quadrature with limit {limit} reached error {error:.3g}")
            raise _NotConverged(error * factor / domain.system.det)
        return factor * shell / domain.system.det

    try:
        for retry_state in Retrying(
            retry=retry_if_exception_type(_NotConverged),
            stop=stop_after_attempt(3),
        ):
            with retry_state:
                result = attempt()
        return result
    except RetryError as e:
        failure = e.last_attempt.exception()
        bound = failure.error_bound if isinstance(failure, _NotConverged) else float("nan")
        raise QuadratureError(
            f"Volume quadrature did not reach relative error {QUADRATURE_REL_TOL}", bound
        ) from e


def volume_monte_carlo(
    domain: ProductDomain,
    samples: int = MONTE_CARLO_SAMPLES,
    rng: np.random.Generator | None = None,
) -> VolumeEstimate:
    """Rejection estimate of the volume over a bounding box in original coordinates.

    Args:
        domain: The domain.
        samples: Number of uniform points.
        rng: Random generator; seeded with 0 when omitted.

    Returns:
        The estimate and its binomial standard error.
    """
    generator = rng if rng is not None else np.random.default_rng(0)
    inverse = np.linalg.inv(domain.system.stacked)
    # Every coordinate of y = M x is bounded by T inside the domain.
    half_widths = domain.T * np.sum(np.abs(inverse), axis=1)
    box_volume = float(np.prod(2.0 * half_widths))
    hits = 0
    remaining = samples
    while remaining > 0:
        chunk = min(remaining, MONTE_CARLO_CHUNK)
        points = generator.uniform(-half_widths, half_widths, size=(chunk, domain.system.dim))
        hits += int(np.count_nonzero(domain_mask(domain, points)))
        remaining -= chunk
    fraction = hits / samples
    stderr = box_volume * math.sqrt(fraction * (1.0 - fraction) / samples)
    return VolumeEstimate(box_volume * fraction, stderr)


def domain_volume(domain: ProductDomain, method: VolumeMethod = "closed-form") -> float:
    """Lebesgue volume of the domain.

    Args:
        domain: The domain.
        method: ``"closed-form"`` evaluates the product-measure recursion via the
            regularized incomplete gamma function; ``"quadrature"`` integrates it
            numerically and falls back to Monte Carlo on failure;
            ``"monte-carlo"`` uses the rejection estimate.

    Returns:
        The volume.
    """
    if method == "closed-form":
        return _volume_closed_form(domain)
    if method == "quadrature":
        try:
            return volume_quadrature(domain)
        except QuadratureError as e:
            estimate = volume_monte_carlo(domain)
            logger.warning(
                f"Quadrature failed (error bound {e.error_bound:.3g}); "
                f"Monte Carlo volume {estimate.value:.6g} +- {estimate.stderr:.2g}"
            )
            return estimate.value
    if method == "monte-carlo":
        return volume_monte_carlo(domain).value
    raise DomainError(f"Unknown volume method {method!r}")
