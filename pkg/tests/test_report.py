"""Tests for report generation module."""

import json
import math
import tempfile
from pathlib import Path

import pytest

from latclt.experiments import ProbeTable, Report, TrialRecord
from latclt.experiments.summary import schedule_statistics
from latclt.report.formatter import (
    create_markdown_table,
    format_estimate,
    format_flag,
    format_real,
    format_table_row,
    round_significant,
    to_json_ready,
)
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
from latclt.report.templates import get_template_environment, render_main_template


class TestFormatter:
    """Test formatter functions."""

    def test_format_real(self) -> None:
        """Test nine significant digits."""
        assert format_real(0.1234567891) == "0.123456789"
        assert format_real(1048576.0) == "1048576"
        assert format_real(14) == "14"

    def test_format_real_missing(self) -> None:
        """Test None and NaN render as n/a."""
        assert format_real(None) == "n/a"
        assert format_real(math.nan) == "n/a"

    def test_format_estimate(self) -> None:
        """Test value and standard error."""
        assert format_estimate(1.23456, 0.01) == "1.235 ± 0.01"
        assert format_estimate(1.5, None) == "1.5"
        assert format_estimate(1.5, math.nan) == "1.5"

    def test_format_flag(self) -> None:
        """Test check rendering."""
        assert format_flag(True) == "yes"
        assert format_flag(False) == "no"
        assert format_flag(None) == "n/a"

    def test_round_significant(self) -> None:
        """Test rounding and non-finite values."""
        assert round_significant(1.0 / 3.0) == 0.333333333
        assert round_significant(math.nan) is None
        assert round_significant(math.inf) is None

    def test_to_json_ready(self) -> None:
        """Test nested structures are rounded and tuples become lists."""
        value = {"a": (1.0 / 3.0, 2), "b": [math.nan, True], "c": None}
        assert to_json_ready(value) == {"a": [0.333333333, 2], "b": [None, True], "c": None}

    def test_to_json_ready_rejects_objects(self) -> None:
        """Test arbitrary objects are not serialized."""
        with pytest.raises(TypeError):
            to_json_ready(object())

    def test_format_table_row(self) -> None:
        """Test table row formatting."""
        assert format_table_row(["T", "mean"]) == "| T | mean |"
        assert format_table_row(["1024", "0.5"], [6, 4]) == "| 1024   | 0.5  |"

    def test_create_markdown_table(self) -> None:
        """Test Markdown table creation."""
        table = create_markdown_table(["s", "estimate"], [["0", "0.25"], ["1", "0.1"]])
        lines = table.split("\n")
        assert len(lines) == 4
        assert lines[0] == "| s | estimate |"
        assert lines[1] == "|---|----------|"
        assert lines[2] == "| 0 | 0.25     |"

    def test_create_markdown_table_empty(self) -> None:
        """Test an empty table renders as nothing."""
        assert create_markdown_table(["a"], []) == ""


class TestTemplates:
    """Test cases for the Jinja2 environment."""

    def test_registered_filters(self) -> None:
        """Test only the filter the template uses is registered."""
        filters = get_template_environment().filters
        assert filters["format_flag"] is format_flag
        assert "format_real" not in filters
        assert "format_estimate" not in filters

    def test_flags_rendered(self) -> None:
        """Test check results go through format_flag."""
        text = render_main_template(
            kind="mixing-probe",
            version="0.1.0",
            seed=0,
            trials=5,
            config_json="{}",
            flags=[("decay_monotone", True), ("largest_separation_decayed", None)],
        )
        assert "- decay_monotone: yes" in text
        assert "- largest_separation_decayed: n/a" in text


class TestReportGenerator:
    """Test output files."""

    @pytest.fixture
    def output_dir(self) -> Path:
        """Create temporary output directory."""
        with tempfile.TemporaryDirectory() as tmpdir:
            yield Path(tmpdir)

    @pytest.fixture
    def records(self) -> list[TrialRecord]:
        """Four trials at two sizes."""
        result = []
        for trial, raw, normalized in [(0, 1, 0.1), (1, 2, -0.3), (2, 4, 0.7), (3, 0, -0.5)]:
            result.append(TrialRecord(trial, 16.0, raw, normalized))
            result.append(TrialRecord(trial, 256.0, raw + 3, normalized * 1.5))
        return result

    @pytest.fixture
    def report(self, records: list[TrialRecord]) -> Report:
        """A report with statistics, flags, summary and notes."""
        return Report(
            kind="dioph-clt",
            config={"kind": "dioph-clt", "d": 2, "M": 4, "T": [16.0, 256.0], "seed": 0},
            version="0.1.0",
            seed=0,
            statistics=schedule_statistics(records, [16.0, 256.0]),
            flags={"variance_positive": True, "variance_stabilized": None},
            summary={"audited_trials": 1, "slope": 1.0 / 3.0},
            notes=["Sample note."],
        )

    def test_trial_row(self, output_dir: Path) -> None:
        """Test the trial record formats with nine significant digits."""
        path = write_trials_csv(
            [TrialRecord(0, 1048576.0, 14, 0.123456789)], output_dir / "trials.csv"
        )
        lines = path.read_text(encoding="utf-8").split("\n")
        assert lines[0] == "trial,T,raw_count,normalized"
        assert lines[1] == "0,1048576,14,0.123456789"

    def test_empty_trials(self, output_dir: Path) -> None:
        """Test an empty record list writes only the header."""
        path = write_trials_csv([], output_dir / "trials.csv")
        assert path.read_text(encoding="utf-8") == "trial,T,raw_count,normalized\n"

    def test_trials_frame_order(self, records: list[TrialRecord]) -> None:
        """Test records keep their (trial, T) order."""
        frame = trials_frame(records)
        assert list(frame.columns) == ["trial", "T", "raw_count", "normalized"]
        assert frame["trial"].tolist() == [0, 0, 1, 1, 2, 2, 3, 3]
        assert frame["T"].tolist()[:2] == [16.0, 256.0]

    def test_summary_json(self, output_dir: Path, report: Report) -> None:
        """Test the summary is valid sorted JSON with rounded floats."""
        path = write_summary_json(report, output_dir / "summary.json")
        text = path.read_text(encoding="utf-8")
        document = json.loads(text)
        assert text.endswith("\n")
        assert list(document) == sorted(document)
        assert document["summary"]["slope"] == 0.333333333
        assert document["flags"]["variance_stabilized"] is None
        assert [stats["T"] for stats in document["statistics"]] == [16.0, 256.0]

    def test_summary_document_table(self, report: Report) -> None:
        """Test a probe table is included in the summary."""
        report.table = ProbeTable("tail", ("L", "exceedance", "stderr"), ((4.0, 0.5, 0.1),))
        document = summary_document(report)
        assert document["table"] == {
            "name": "tail",
            "columns": ["L", "exceedance", "stderr"],
            "rows": [[4.0, 0.5, 0.1]],
        }

    def test_render_report(self, report: Report) -> None:
        """Test the Markdown report sections."""
        content = render_report(report)
        assert content.startswith("# latclt report: dioph-clt")
        assert "- trials: 4" in content
        assert "## Configuration" in content
        assert "## Normalized discrepancy by T" in content
        assert "- variance_positive: yes" in content
        assert "- variance_stabilized: n/a" in content
        assert "Sample note." in content

    def test_render_is_deterministic(self, report: Report) -> None:
        """Test two renderings are identical."""
        assert render_report(report) == render_report(report)

    def test_extra_table_csv(self, output_dir: Path) -> None:
        """Test probe tables are written with their columns."""
        table = ProbeTable("mixing", ("s", "estimate", "stderr"), ((0.0, 0.25, 0.01),))
        path = write_probe_table(table, output_dir / "mixing.csv")
        assert path.read_text(encoding="utf-8") == "s,estimate,stderr\n0,0.25,0.01\n"

    def test_emit_outputs(self, output_dir: Path, report: Report, records: list[TrialRecord]) -> None:
        """Test every output file is written into a new directory."""
        target = output_dir / "runs" / "dioph"
        paths = emit_outputs(report, records, target)
        assert [path.name for path in paths] == ["trials.csv", "summary.json", "report.md"]
        assert all(path.exists() for path in paths)

    def test_emit_outputs_with_table(self, output_dir: Path, report: Report) -> None:
        """Test probes also write their table."""
        report.table = ProbeTable("variance", ("k", "correlation", "stderr"), ((0.0, 1.0, 0.1),))
        paths = emit_outputs(report, [], output_dir)
        assert paths[-1].name == "variance.csv"

    def test_unwritable_directory(self, output_dir: Path, report: Report) -> None:
        """Test a file in place of the directory raises OutputError."""
        blocker = output_dir / "blocked"
        blocker.write_text("x", encoding="utf-8")
        with pytest.raises(OutputError) as excinfo:
            emit_outputs(report, [], blocker)
        assert excinfo.value.path == blocker
