"""Output files of experiments: CSV records, JSON summary and Markdown report."""

from latclt.report.formatter import format_estimate, format_real, to_json_ready
from latclt.report.generator import (
    OutputError,
    emit_outputs,
    render_report,
    summary_document,
    trials_frame,
    write_probe_table,
    write_summary_json,
    write_trials_csv,
)

__all__ = [
    # Files
    "OutputError",
    "emit_outputs",
    "write_trials_csv",
    "write_summary_json",
    "write_probe_table",
    # Rendering
    "render_report",
    "summary_document",
    "trials_frame",
    "format_real",
    "format_estimate",
    "to_json_ready",
]
