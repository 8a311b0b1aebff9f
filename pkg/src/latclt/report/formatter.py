"""Formatting helpers shared by the CSV, JSON and Markdown outputs."""

import math
from collections.abc import Mapping, Sequence
from typing import Any

# Reals are written with this many significant digits everywhere.
SIGNIFICANT_DIGITS = 9
FLOAT_FORMAT = f"%.{SIGNIFICANT_DIGITS}g"


def format_real(value: float | int | None, digits: int = SIGNIFICANT_DIGITS) -> str:
    """Format a real with a fixed number of significant digits.

    Examples:
        >>> format_real(0.1234567891)
        '0.123456789'
        >>> format_real(1048576.0)
        '1048576'
        >>> format_real(None)
        'n/a'
    """
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    return f"{value:.{digits}g}"


def format_estimate(value: float | None, stderr: float | None, digits: int = 4) -> str:
    """Format ``value +- stderr`` for the Markdown report.

    Examples:
        >>> format_estimate(1.23456, 0.01)
        '1.235 ± 0.01'
        >>> format_estimate(1.5, None)
        '1.5'
    """
    text = format_real(value, digits)
    if stderr is None or (isinstance(stderr, float) and math.isnan(stderr)):
        return text
    return f"{text} ± {format_real(stderr, 2)}"


def format_flag(value: Any) -> str:
    """Render a check result as ``yes``, ``no`` or ``n/a``."""
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)


def round_significant(value: float) -> float | None:
    """Round to the output precision; NaN and infinities become None."""
    if not math.isfinite(value):
        return None
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


def to_json_ready(value: Any) -> Any:
    """Recursively round floats and turn tuples into lists."""
    if isinstance(value, bool) or value is None or isinstance(value, int | str):
        return value
    if isinstance(value, float):
        return round_significant(value)
    if isinstance(value, Mapping):
        return {str(key): to_json_ready(item) for key, item in value.items()}
    if isinstance(value, Sequence):
        return [to_json_ready(item) for item in value]
    if hasattr(value, "item"):
        return to_json_ready(value.item())
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def format_table_row(values: Sequence[Any], widths: Sequence[int] | None = None) -> str:
    """Format a table row with proper alignment.

    Examples:
        >>> format_table_row(['T', 'mean'])
        '| T | mean |'
        >>> format_table_row(['1024', '0.5'], [6, 4])
        '| 1024   | 0.5  |'
    """
    if widths:
        cells = [f" {str(val):<{width}} " for val, width in zip(values, widths, strict=True)]
    else:
        cells = [f" {str(val)} " for val in values]
    return "|" + "|".join(cells) + "|"


def create_markdown_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Create a Markdown table from headers and rows.

    Returns:
        The table, or an empty string when there are no rows.
    """
    if not rows:
        return ""
    str_rows = [[str(cell) for cell in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in str_rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))

    lines = [format_table_row(headers, widths)]
    lines.append("|" + "|".join("-" * (width + 2) for width in widths) + "|")
    lines.extend(format_table_row(row, widths) for row in str_rows)
    return "\n".join(lines)
