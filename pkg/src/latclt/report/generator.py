"""Experiment output files: trial records, JSON summary, probe tables and Markdown report."""

import json
import logging
from collections.abc import Sequence
from dataclasses import asdict
from pathlib import Path
from typing import Any

import pandas as pd

from latclt.experiments.runner import TrialRecord
from latclt.experiments.summary import ProbeTable, Report
from latclt.report.formatter import (
    FLOAT_FORMAT,
    create_markdown_table,
    format_estimate,
    format_real,
    to_json_ready,
)
from latclt.report.templates import render_main_template

logger = logging.getLogger(__name__)

TRIAL_COLUMNS = ("trial", "T", "raw_count", "normalized")
TRIALS_FILENAME = "trials.csv"
SUMMARY_FILENAME = "summary.json"
REPORT_FILENAME = "report.md"

_TABLE_TITLES = {
    "mixing": "Correlation decay",
    "tail": "Exceedance probabilities",
    "variance": "Level correlations",
}


class OutputError(OSError):
    """Raised when an output file cannot be written.

    Attributes:
        path: The file or directory that failed.
    """

    def __init__(self, message: str, path: Path) -> None:
        super().__init__(f"{message}: {path}")
        self.path = path


def _write_text(path: Path, content: str) -> Path:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
    except OSError as e:
        raise OutputError(f"Cannot write {path.name}", path) from e
    logger.info(f"Wrote {path}")
    return path


def trials_frame(records: Sequence[TrialRecord]) -> pd.DataFrame:
    """Trial records as a DataFrame with the fixed column order."""
    if not records:
        return pd.DataFrame({column: [] for column in TRIAL_COLUMNS})
    return pd.DataFrame(
        {
            "trial": [r.trial for r in records],
            "T": [float(r.T) for r in records],
            "raw_count": [r.raw_count for r in records],
            "normalized": [r.normalized for r in records],
        },
        columns=list(TRIAL_COLUMNS),
    )


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    return _write_text(
        path, frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    )


def write_trials_csv(records: Sequence[TrialRecord], path: Path) -> Path:
    """Write ``trial,T,raw_count,normalized`` rows, reals with 9 significant digits."""
    return _write_frame(trials_frame(records), path)


def write_probe_table(table: ProbeTable, path: Path) -> Path:
    """Write a probe table with its declared columns."""
    frame = pd.DataFrame([list(row) for row in table.rows], columns=list(table.columns))
    return _write_frame(frame, path)


def summary_document(report: Report) -> dict[str, Any]:
    """JSON-ready form of the report."""
    document: dict[str, Any] = {
        "kind": report.kind,
        "version": report.version,
        "seed": report.seed,
        "config": report.config,
        "statistics": [asdict(stats) for stats in report.statistics],
        "flags": report.flags,
        "summary": report.summary,
        "notes": report.notes,
    }
    if report.table is not None:
        document["table"] = {
            "name": report.table.name,
            "columns": list(report.table.columns),
            "rows": [list(row) for row in report.table.rows],
        }
    return to_json_ready(document)  # type: ignore[no-any-return]


def write_summary_json(report: Report, path: Path) -> Path:
    """Write the summary with sorted keys and 9 significant digits."""
    text = json.dumps(summary_document(report), indent=2, sort_keys=True, allow_nan=False)
    return _write_text(path, text + "\n")


def _statistics_table(report: Report) -> str:
    headers = ["T", "mean", "variance", "skewness", "excess kurtosis", "cum3", "cum4", "KS"]
    rows = [
        [
            format_real(stats.T),
            format_estimate(stats.mean, stats.mean_stderr),
            format_estimate(stats.variance, stats.variance_stderr),
            format_estimate(stats.skewness, stats.skewness_stderr),
            format_estimate(stats.excess_kurtosis, stats.kurtosis_stderr),
            format_real(stats.cum3, 4),
            format_real(stats.cum4, 4),
            format_estimate(stats.ks, stats.ks_stderr),
        ]
        for stats in report.statistics
    ]
    return create_markdown_table(headers, rows)


def _probe_table(table: ProbeTable | None) -> str:
    if table is None:
        return ""
    rows = [[format_real(value, 6) for value in row] for row in table.rows]
    return create_markdown_table(list(table.columns), rows)


def render_report(report: Report) -> str:
    """Markdown rendering of the report. Contains no timestamps."""
    document = summary_document(report)
    return render_main_template(
        kind=report.kind,
        version=report.version,
        seed=report.seed,
        trials=report.config.get("M", ""),
        config_json=json.dumps(document["config"], indent=2, sort_keys=True),
        statistics_table=_statistics_table(report),
        flags=sorted(report.flags.items()),
        table_title=_TABLE_TITLES.get(report.table.name, report.table.name) if report.table else "",
        table=_probe_table(report.table),
        summary_json=json.dumps(document["summary"], indent=2, sort_keys=True)
        if report.summary
        else "",
        notes=report.notes,
    )


def emit_outputs(
    report: Report, records: Sequence[TrialRecord], directory: Path | str
) -> list[Path]:
    """Write every output file of an experiment.

    Args:
        report: The aggregated report.
        records: Trial records in (trial, T) order; may be empty.
        directory: Output directory, created if needed.

    Returns:
        Paths of ``trials.csv``, ``summary.json``, ``report.md`` and, for
        probes, ``<table>.csv``.

    Raises:
        OutputError: If the directory or a file cannot be written.
    """
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError("Cannot create output directory", out) from e

    paths = [
        write_trials_csv(records, out / TRIALS_FILENAME),
        write_summary_json(report, out / SUMMARY_FILENAME),
        _write_text(out / REPORT_FILENAME, render_report(report)),
    ]
    if report.table is not None:
        paths.append(write_probe_table(report.table, out / f"{report.table.name}.csv"))
    return paths
