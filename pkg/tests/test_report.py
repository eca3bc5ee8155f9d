import json

import pandas as pd
import pytest

from gptrans_lib.number_crunchers.report import (
    OUTCOME_COLUMNS,
    OutcomeStatus,
    VerificationOutcome,
    VerificationReport,
    export_report,
    format_point,
    parse_report,
    render_report,
    report_to_csv,
    run_metadata,
    serialize_report,
)


def _outcome(record_id, status, expected="MUST_PASS", note=""):
    return VerificationOutcome(record_id, {"f": "exp(-x^2)", "n": 1, "z": 1.0}, 0.25, 0.25 + 1e-9, 1e-9, 4e-9,
                               1e-12, 0.0, status, expected, note)


@pytest.fixture
def sample_report():
    return VerificationReport(
        outcomes=[
            _outcome("L3", OutcomeStatus.PASS),
            _outcome("E5", OutcomeStatus.CONDITIONAL, "AUDIT", "matches with constant pi/(2n)"),
            _outcome("R1", OutcomeStatus.FAIL),
        ],
        meta=run_metadata("0.2.0"),
    )


def test_summary_counts(sample_report):
    assert sample_report.summary() == {"PASS": 1, "FAIL": 1, "CONDITIONAL": 1, "total": 3, "must_pass_failures": 1}
    assert [o.id for o in sample_report.must_pass_failures()] == ["R1"]
    assert not sample_report.ok


def test_audit_failures_do_not_break_ok():
    report = VerificationReport([_outcome("E2", OutcomeStatus.FAIL, "AUDIT"), _outcome("L3", OutcomeStatus.PASS)])
    assert report.ok


def test_json_round_trip_ignores_meta(sample_report):
    text = serialize_report(sample_report)
    payload = json.loads(text)
    assert set(payload) == {"meta", "summary", "outcomes"}
    assert payload["meta"]["version"] == "0.2.0"
    assert payload["outcomes"][1]["status"] == "CONDITIONAL"
    assert parse_report(text) == sample_report


def test_identical_runs_differ_only_in_meta(sample_report):
    other = VerificationReport(sample_report.outcomes, meta={"created": "elsewhen"})
    a, b = json.loads(serialize_report(sample_report)), json.loads(serialize_report(other))
    assert a["outcomes"] == b["outcomes"]
    assert a["summary"] == b["summary"]


def test_csv_has_fixed_columns(sample_report):
    from io import StringIO
    df = pd.read_csv(StringIO(report_to_csv(sample_report)))
    assert list(df.columns) == OUTCOME_COLUMNS
    assert df.loc[0, "point"] == "f=exp(-x^2), n=1, z=1"


def test_table_has_summary_footer(sample_report):
    text = render_report(sample_report, "table")
    assert "CONDITIONAL" in text
    assert text.rstrip().endswith("must_pass_failures=1")


def test_empty_table():
    assert render_report(VerificationReport([]), "table") == "(no outcomes)"


def test_unknown_format(sample_report):
    with pytest.raises(ValueError, match="unknown report format"):
        render_report(sample_report, "xml")


def test_export_writes_file(sample_report, tmp_path):
    path = tmp_path / "out" / "report.json"
    text = export_report(sample_report, "json", str(path))
    assert path.read_text().rstrip("\n") == text.rstrip("\n")


def test_format_point_is_sorted():
    assert format_point({"z": 0.5, "f": "exp(-x)", "n": 2}) == "f=exp(-x), n=2, z=0.5"


def test_format_point_keeps_full_precision():
    point = {"y": 1.0 / 3.0, "z": 0.1, "a": 1e-20, "n": 2, "w": 2.0}
    text = format_point(point)
    assert text == "a=1e-20, n=2, w=2, y=0.3333333333333333, z=0.1"
    read_back = dict(part.split("=") for part in text.split(", "))
    assert float(read_back["y"]) == point["y"]
    assert float(read_back["a"]) == point["a"]
