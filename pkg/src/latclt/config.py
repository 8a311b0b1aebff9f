"""Application configuration for latclt."""

import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

from latclt.lattice.enumeration import DEFAULT_MAX_POINTS

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class AppConfig:
    """Application configuration."""

    output_dir: Path = field(default_factory=lambda: Path("./results"))
    log_level: str = "INFO"
    workers: int = 1
    max_points: int = DEFAULT_MAX_POINTS
    progress: bool = True


def _int_variable(name: str, default: int, minimum: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from e
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def _bool_variable(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    if raw.strip().lower() in ("1", "true", "yes", "on"):
        return True
    if raw.strip().lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{name} must be a boolean (0 or 1), got {raw!r}")


def load_config() -> AppConfig:
    """Load configuration from environment variables and ``.env``.

    Returns:
        AppConfig: The loaded configuration object.

    Raises:
        ValueError: If a variable has an invalid value.
    """
    load_dotenv()

    log_level = os.getenv("LATCLT_LOG_LEVEL", "INFO").upper()
    if log_level not in LOG_LEVELS:
        raise ValueError(f"LATCLT_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {log_level!r}")

    return AppConfig(
        output_dir=Path(os.getenv("LATCLT_OUTPUT_DIR", "./results")),
        log_level=log_level,
        workers=_int_variable("LATCLT_WORKERS", 1, 1),
        max_points=_int_variable("LATCLT_MAX_POINTS", DEFAULT_MAX_POINTS, 1),
        progress=_bool_variable("LATCLT_PROGRESS", True),
    )
