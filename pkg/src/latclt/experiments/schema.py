"""Experiment configuration: the JSON schema, its parser and serializer.

A configuration is one JSON object. Keys common to every experiment are
``kind``, ``d``, ``M``, ``seed``, ``t0``, ``delta`` and ``T``; the rest depend
on the kind. ``T`` entries may be numbers or ``"2^N"`` literals. Unknown keys
are rejected.
"""

import json
import math
import re
from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass, replace
from typing import Any, Literal

from latclt.dynamics.diophantine import DiophantineError, DiophantineProblem
from latclt.geometry.angular import parse_target, serialize_target
from latclt.geometry.domains import BlockSystem, DomainError
from latclt.lattice.core import MAX_DIMENSION

ExperimentKind = Literal[
    "dioph-clt",
    "fuchs1d",
    "lattice-clt",
    "spiral-clt",
    "mixing-probe",
    "tail-probe",
    "variance-probe",
    "count",
    "volume",
    "sample-lattice",
]
SamplerKind = Literal["exact", "approx"]

EXPERIMENT_KINDS: tuple[str, ...] = (
    "dioph-clt",
    "fuchs1d",
    "lattice-clt",
    "spiral-clt",
    "mixing-probe",
    "tail-probe",
    "variance-probe",
    "count",
    "volume",
    "sample-lattice",
)
DIOPHANTINE_KINDS = frozenset({"dioph-clt", "fuchs1d", "tail-probe", "variance-probe"})
DOMAIN_KINDS = frozenset({"lattice-clt", "spiral-clt", "count", "volume"})
SCHEDULE_KINDS = frozenset(
    {"dioph-clt", "fuchs1d", "lattice-clt", "spiral-clt", "variance-probe", "count", "volume"}
)
SAMPLER_KINDS = frozenset({"lattice-clt", "spiral-clt", "mixing-probe", "count", "sample-lattice"})

DEFAULT_TRIALS = 1000
DEFAULT_SEED = 0
DEFAULT_T0 = 32.0
DEFAULT_DELTA = 0.99
DEFAULT_AUDIT_RATE = 0.01
DEFAULT_CAP = 10.0
DEFAULT_SEPARATIONS = (0.0, 1.0, 2.0, 4.0)
DEFAULT_TAIL_GRID = (4.0, 8.0, 16.0, 32.0, 64.0)

_POWER_OF_TWO = re.compile(r"^\s*2\s*\^\s*(\d+)\s*$")
_SYSTEM_KEYS = frozenset({"matrix", "blocks", "variant"})


class ConfigError(ValueError):
    """Raised when an experiment configuration violates the schema.

    Attributes:
        key: JSON key path of the offending value, e.g. ``"system.blocks"``.
        invariant: Name of the violated constraint.
    """

    def __init__(self, message: str, key: str = "", invariant: str = "") -> None:
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key
        self.invariant = invariant


@dataclass(frozen=True)
class SystemConfig:
    """JSON form of a block system. Missing entries mean the coordinate forms."""

    matrix: tuple[tuple[float, ...], ...] | None = None
    blocks: tuple[int, ...] | None = None
    variant: str | None = None

    def build(self, d: int) -> BlockSystem:
        matrix = [list(row) for row in self.matrix] if self.matrix is not None else _eye(d)
        return BlockSystem.from_matrix(matrix, self.blocks, self.variant)  # type: ignore[arg-type]


def _eye(d: int) -> list[list[float]]:
    return [[1.0 if i == j else 0.0 for j in range(d)] for i in range(d)]


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment configuration with defaults applied.

    Attributes:
        kind: Experiment or one-off command.
        d: Dimension. The Diophantine dimension for Diophantine kinds, the
            lattice dimension otherwise.
        T: Size schedule, strictly increasing.
        M: Number of trials.
        seed: Master seed of the per-trial streams.
        t0: Flow time of the approximate sampler.
        delta: LLL parameter.
        w: Flow weights (Diophantine kinds).
        c: Approximation constants (Diophantine kinds).
        system: Block system (domain kinds).
        a: Lower end of the product interval.
        b: Upper end of the product interval.
        sampler: ``"exact"`` (d = 2 only) or ``"approx"``.
        target: Angular target in its JSON form (spiral-clt).
        s: Flow separations (mixing-probe).
        cap: Cap of the bounded statistic (mixing-probe).
        box: Half-widths of the box test function (mixing-probe).
        L: Threshold grid (tail-probe).
        n: Flow level (tail-probe).
        radius: Ball radius of the test function (tail-probe).
        K: Largest correlation lag (variance-probe).
        burn_in: Levels skipped before the series starts (variance-probe).
        audit_rate: Fraction of dioph-clt trials re-counted directly.
        basis: Lattice basis (count); sampled when absent.
        volume_method: Volume method (lattice-clt, spiral-clt, volume).
    """

    kind: str
    d: int
    T: tuple[float, ...] = ()
    M: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    t0: float = DEFAULT_T0
    delta: float = DEFAULT_DELTA
    w: tuple[float, ...] | None = None
    c: tuple[float, ...] | None = None
    system: SystemConfig | None = None
    a: float = 1.0
    b: float = 2.0
    sampler: str | None = None
    target: tuple[Mapping[str, Any], ...] | None = None
    s: tuple[float, ...] = DEFAULT_SEPARATIONS
    cap: float = DEFAULT_CAP
    box: tuple[float, ...] | None = None
    L: tuple[float, ...] = DEFAULT_TAIL_GRID
    n: int | None = None
    radius: float = 1.0
    K: int = 8
    burn_in: int = 4
    audit_rate: float = DEFAULT_AUDIT_RATE
    basis: tuple[tuple[float, ...], ...] | None = None
    volume_method: str = "closed-form"

    @property
    def problem(self) -> DiophantineProblem:
        """The Diophantine problem of a Diophantine kind."""
        if self.w is None or self.c is None:
            raise ConfigError(f"kind {self.kind!r} has no Diophantine problem", "kind")
        return DiophantineProblem(self.w, self.c)

    @property
    def block_system(self) -> BlockSystem:
        return (self.system or SystemConfig()).build(self.d)

    @property
    def levels(self) -> tuple[int, ...]:
        """``log2 T`` for each entry of a dyadic schedule."""
        return tuple(int(round(math.log2(T))) for T in self.T)


def _fail(key: str, message: str, invariant: str = "") -> ConfigError:
    return ConfigError(message, key, invariant)


def _as_int(raw: Any, key: str, minimum: int | None = None) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int | float) or int(raw) != raw:
        raise _fail(key, f"expected an integer, got {raw!r}", "type")
    value = int(raw)
    if minimum is not None and value < minimum:
        raise _fail(key, f"must be >= {minimum}, got {value}", f"{key} >= {minimum}")
    return value


def _as_float(raw: Any, key: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, int | float):
        raise _fail(key, f"expected a number, got {raw!r}", "type")
    value = float(raw)
    if not math.isfinite(value):
        raise _fail(key, f"must be finite, got {raw!r}", "finite")
    return value


def _as_floats(raw: Any, key: str) -> tuple[float, ...]:
    if not isinstance(raw, Sequence) or isinstance(raw, str):
        raise _fail(key, f"expected a list of numbers, got {raw!r}", "type")
    return tuple(_as_float(value, f"{key}[{i}]") for i, value in enumerate(raw))


def _as_matrix(raw: Any, key: str) -> tuple[tuple[float, ...], ...]:
    if not isinstance(raw, Sequence) or isinstance(raw, str) or not raw:
        raise _fail(key, "expected a nonempty list of rows", "type")
    rows = tuple(_as_floats(row, f"{key}[{i}]") for i, row in enumerate(raw))
    if any(len(row) != len(rows) for row in rows):
        raise _fail(key, f"expected a square matrix with {len(rows)} columns", "square")
    return rows


def parse_size(raw: Any, key: str = "T") -> float:
    """A size parameter given as a number or as a ``"2^N"`` literal."""
    if isinstance(raw, str):
        match = _POWER_OF_TWO.match(raw)
        if match is None:
            raise _fail(key, f"expected a number or a '2^N' literal, got {raw!r}", "type")
        return float(2 ** int(match.group(1)))
    return _as_float(raw, key)


def _parse_schedule(raw: Any) -> tuple[float, ...]:
    entries = raw if isinstance(raw, Sequence) and not isinstance(raw, str) else [raw]
    schedule = tuple(parse_size(value, f"T[{i}]") for i, value in enumerate(entries))
    for i, T in enumerate(schedule):
        if T < 1:
            raise _fail(f"T[{i}]", f"must be >= 1, got {T:g}", "T >= 1")
    for i in range(1, len(schedule)):
        if not schedule[i] > schedule[i - 1]:
            raise _fail("T", f"schedule must be strictly increasing, got {schedule}", "increasing")
    return schedule


def _parse_system(raw: Any) -> SystemConfig:
    if not isinstance(raw, Mapping):
        raise _fail("system", "expected an object", "type")
    unknown = sorted(set(raw) - _SYSTEM_KEYS)
    if unknown:
        raise _fail(f"system.{unknown[0]}", "unknown key", "known keys")
    matrix = _as_matrix(raw["matrix"], "system.matrix") if "matrix" in raw else None
    blocks = None
    if "blocks" in raw:
        if not isinstance(raw["blocks"], Sequence):
            raise _fail("system.blocks", "expected a list of block sizes", "type")
        blocks = tuple(
            _as_int(size, f"system.blocks[{i}]", 1) for i, size in enumerate(raw["blocks"])
        )
    variant = raw.get("variant")
    if variant is not None and variant not in ("signed", "norm"):
        raise _fail("system.variant", f"expected 'signed' or 'norm', got {variant!r}", "variant")
    return SystemConfig(matrix, blocks, variant)


_PARSERS: dict[str, Any] = {
    "M": lambda raw: _as_int(raw, "M", 1),
    "seed": lambda raw: _as_int(raw, "seed", 0),
    "t0": lambda raw: _as_float(raw, "t0"),
    "delta": lambda raw: _as_float(raw, "delta"),
    "w": lambda raw: _as_floats(raw, "w"),
    "c": lambda raw: _as_floats(raw, "c"),
    "system": _parse_system,
    "a": lambda raw: _as_float(raw, "a"),
    "b": lambda raw: _as_float(raw, "b"),
    "sampler": lambda raw: raw,
    "target": lambda raw: raw,
    "s": lambda raw: _as_floats(raw, "s"),
    "cap": lambda raw: _as_float(raw, "cap"),
    "box": lambda raw: _as_floats(raw, "box"),
    "L": lambda raw: _as_floats(raw, "L"),
    "n": lambda raw: _as_int(raw, "n", 0),
    "radius": lambda raw: _as_float(raw, "radius"),
    "K": lambda raw: _as_int(raw, "K", 0),
    "burn_in": lambda raw: _as_int(raw, "burn_in", 0),
    "audit_rate": lambda raw: _as_float(raw, "audit_rate"),
    "basis": lambda raw: _as_matrix(raw, "basis"),
    "volume_method": lambda raw: raw,
    "T": _parse_schedule,
}
KNOWN_KEYS = frozenset({"kind", "d", *_PARSERS})


def config_from_mapping(raw: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a decoded JSON object and apply defaults.

    Raises:
        ConfigError: On unknown keys, wrong types or violated constraints.
    """
    if not isinstance(raw, Mapping):
        raise _fail("", "configuration must be a JSON object", "type")
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise _fail(unknown[0], "unknown key", "known keys")
    kind = raw.get("kind")
    if kind not in EXPERIMENT_KINDS:
        raise _fail("kind", f"expected one of {', '.join(EXPERIMENT_KINDS)}, got {kind!r}", "kind")
    if "d" not in raw:
        raise _fail("d", "missing required key", "required")
    d = _as_int(raw["d"], "d", 1)
    values = {key: _PARSERS[key](value) for key, value in raw.items() if key in _PARSERS}
    config = ExperimentConfig(kind=kind, d=d, **values)
    return _resolve(config)


def _resolve(config: ExperimentConfig) -> ExperimentConfig:
    """Check per-kind constraints and fill kind-dependent defaults."""
    kind, d = config.kind, config.d
    if not 0.25 < config.delta < 1.0:
        raise _fail("delta", f"must lie in (1/4, 1), got {config.delta}", "1/4 < delta < 1")
    if config.t0 < 0:
        raise _fail("t0", f"must be nonnegative, got {config.t0}", "t0 >= 0")
    if kind in SCHEDULE_KINDS and not config.T:
        raise _fail("T", "schedule must not be empty", "nonempty")
    updates: dict[str, Any] = {}

    if kind in DIOPHANTINE_KINDS:
        updates.update(_resolve_diophantine(config))
    else:
        if not 2 <= d <= MAX_DIMENSION:
            raise _fail("d", f"lattice dimension must lie in [2, {MAX_DIMENSION}], got {d}", "d")
        if kind in SAMPLER_KINDS:
            sampler = config.sampler if config.sampler is not None else (
                "exact" if d == 2 else "approx"
            )
            if sampler not in ("exact", "approx"):
                raise _fail("sampler", f"expected 'exact' or 'approx', got {sampler!r}", "sampler")
            if sampler == "exact" and d != 2:
                raise _fail("sampler", "the exact sampler needs d = 2", "exact sampler d = 2")
            updates["sampler"] = sampler

    if kind in DOMAIN_KINDS or kind == "spiral-clt":
        updates.update(_resolve_domain(config))
    if kind == "spiral-clt" or (kind == "count" and config.target is not None):
        updates["target"] = _resolve_target(config)
    if kind == "mixing-probe":
        updates.update(_resolve_mixing(config))
    if kind == "tail-probe":
        updates.update(_resolve_tail(config))
    if kind == "count" and config.basis is not None and len(config.basis) != d:
        raise _fail("basis", f"expected a {d} x {d} basis", "basis dimension")
    if kind in ("variance-probe",) and config.burn_in >= config.levels[-1]:
        raise _fail(
            "burn_in",
            f"must be smaller than log2 T = {config.levels[-1]}",
            "burn_in < log2 T",
        )
    if not 0.0 <= config.audit_rate <= 1.0:
        raise _fail("audit_rate", f"must lie in [0, 1], got {config.audit_rate}", "rate")
    return replace(config, **updates)


def _resolve_diophantine(config: ExperimentConfig) -> dict[str, Any]:
    kind, d = config.kind, config.d
    if kind == "fuchs1d" and d != 1:
        raise _fail("d", f"fuchs1d requires d = 1, got {d}", "d = 1")
    constants = config.c
    if constants is None:
        # Only the weights reach the tail experiment.
        if kind != "tail-probe":
            raise _fail("c", "missing required key", "required")
        constants = tuple(1.0 for _ in range(d))
    if len(constants) != d:
        raise _fail("c", f"expected {d} constants, got {len(constants)}", "len(c) = d")
    if d + 1 > MAX_DIMENSION:
        raise _fail("d", f"lattices of dimension {d + 1} exceed {MAX_DIMENSION}", "d")
    weights = config.w if config.w is not None else (
        (1.0,) if d == 1 else tuple(1.0 / d for _ in range(d))
    )
    if len(weights) != d:
        raise _fail("w", f"expected {d} weights, got {len(weights)}", "len(w) = d")
    if abs(math.fsum(weights) - 1.0) > 1e-12:
        raise _fail("w", f"weights sum to {math.fsum(weights)!r}", "sum(w) = 1")
    try:
        DiophantineProblem(weights, constants)
    except DiophantineError as e:
        raise _fail("w", str(e), "0 < w_i < 1, c_i > 0") from e
    for i, T in enumerate(config.T):
        if T != 2.0 ** round(math.log2(T)):
            raise _fail(f"T[{i}]", f"must be a power of two, got {T:g}", "T = 2^N")
        if T < 2:
            raise _fail(f"T[{i}]", f"must be at least 2, got {T:g}", "T >= 2")
    if kind == "fuchs1d":
        for i, T in enumerate(config.T):
            if T <= math.e:
                raise _fail(f"T[{i}]", f"must exceed e, got {T:g}", "T > e")
    return {"w": weights, "c": constants}


def _resolve_domain(config: ExperimentConfig) -> dict[str, Any]:
    if not 0 < config.a < config.b:
        raise _fail("a", f"interval must satisfy 0 < a < b, got ({config.a}, {config.b})", "0<a<b")
    try:
        system = config.block_system
    except DomainError as e:
        raise _fail("system", str(e), "block system") from e
    if system.dim != config.d:
        raise _fail("system", f"system acts on R^{system.dim}, expected R^{config.d}", "dim = d")
    if config.volume_method not in ("closed-form", "quadrature", "monte-carlo"):
        raise _fail("volume_method", f"unknown method {config.volume_method!r}", "method")
    return {}


def _resolve_target(config: ExperimentConfig) -> tuple[Mapping[str, Any], ...]:
    if config.target is None:
        raise _fail("target", "missing required key", "required")
    try:
        target = parse_target(config.target)  # type: ignore[arg-type]
        target.check(config.block_system)
    except DomainError as e:
        raise _fail("target", str(e), "angular target") from e
    return tuple(serialize_target(target))


def _resolve_mixing(config: ExperimentConfig) -> dict[str, Any]:
    if not config.s or any(value < 0 for value in config.s):
        raise _fail("s", f"expected nonnegative separations, got {config.s}", "s >= 0")
    if config.cap <= 0:
        raise _fail("cap", f"must be positive, got {config.cap}", "cap > 0")
    box = config.box if config.box is not None else tuple(1.0 for _ in range(config.d))
    if len(box) != config.d or any(value <= 0 for value in box):
        raise _fail("box", f"expected {config.d} positive half-widths, got {box}", "box")
    return {"box": box, "s": tuple(sorted(config.s))}


def _resolve_tail(config: ExperimentConfig) -> dict[str, Any]:
    grid = config.L
    if not grid or any(value <= 0 for value in grid):
        raise _fail("L", f"expected positive thresholds, got {grid}", "L > 0")
    if any(grid[i] <= grid[i - 1] for i in range(1, len(grid))):
        raise _fail("L", f"grid must be strictly increasing, got {grid}", "increasing")
    if config.radius <= 0:
        raise _fail("radius", f"must be positive, got {config.radius}", "radius > 0")
    n = config.n if config.n is not None else recommended_tail_level(grid)
    return {"n": n}


def recommended_tail_level(grid: Sequence[float]) -> int:
    """Smallest flow level with ``n >= 2 log2(max L)``."""
    return max(0, math.ceil(2.0 * math.log2(max(grid))))


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON configuration document.

    Args:
        text: UTF-8 JSON text.

    Returns:
        The validated configuration with defaults applied.

    Raises:
        ConfigError: On malformed JSON or schema violations.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e}", "", "JSON") from e
    return config_from_mapping(raw)


def config_to_mapping(config: ExperimentConfig) -> dict[str, Any]:
    """JSON-ready mapping of every set field. Tuples encode as JSON arrays."""
    result = {key: value for key, value in asdict(config).items() if value is not None}
    if "system" in result:
        result["system"] = {
            key: value for key, value in result["system"].items() if value is not None
        }
    return result


def serialize_config(config: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config`."""
    return json.dumps(config_to_mapping(config), indent=2, sort_keys=True)


def _coerce_override(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(raw: Mapping[str, Any], overrides: Sequence[str]) -> dict[str, Any]:
    """Apply ``key=value`` overrides to a decoded configuration.

    Values are decoded as JSON when possible and kept as strings otherwise.
    Dotted keys address nested objects, e.g. ``system.variant=norm``. The
    result still has to pass :func:`config_from_mapping`, which type-checks
    every value.

    Raises:
        ConfigError: On an override without ``=``.
    """
    result: dict[str, Any] = json.loads(json.dumps(raw))
    for override in overrides:
        key, sep, text = override.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"expected key=value, got {override!r}", "--set", "key=value")
        *parents, leaf = key.split(".")
        node = result
        for part in parents:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError("cannot set a key inside a non-object", key, "type")
            node = child
        node[leaf] = _coerce_override(text)
    return result
