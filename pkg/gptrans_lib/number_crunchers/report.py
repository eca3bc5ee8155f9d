import os
import json
import datetime
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from .toolbox import tprint

REPORT_SCHEMA_VERSION = 1

Binding = Union[float, str]


class OutcomeStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    CONDITIONAL = "CONDITIONAL"


@dataclass(frozen=True)
class VerificationOutcome:
    """
    One record evaluated at one point.

    `point` holds the numeric parameters and the function bindings (expression
    strings) the record was evaluated with. `lhs_err_est` and `rhs_err_est` are
    the quadrature error estimates of the two sides (0 for closed forms).
    """
    id: str
    point: Dict[str, Binding]
    lhs_value: float
    rhs_value: float
    abs_err: float
    rel_err: float
    lhs_err_est: float
    rhs_err_est: float
    status: OutcomeStatus
    expected: str
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["status"] = self.status.value
        out["point"] = dict(self.point)
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VerificationOutcome":
        return cls(
            id=data["id"],
            point=dict(data["point"]),
            lhs_value=float(data["lhs_value"]),
            rhs_value=float(data["rhs_value"]),
            abs_err=float(data["abs_err"]),
            rel_err=float(data["rel_err"]),
            lhs_err_est=float(data["lhs_err_est"]),
            rhs_err_est=float(data["rhs_err_est"]),
            status=OutcomeStatus(data["status"]),
            expected=data["expected"],
            note=data.get("note", ""),
        )


# Column order of the tabular exports; fixed.
OUTCOME_COLUMNS = [
    "id", "point", "lhs_value", "rhs_value", "abs_err", "rel_err",
    "lhs_err_est", "rhs_err_est", "status", "expected", "note",
]


@dataclass(frozen=True)
class VerificationReport:
    outcomes: List[VerificationOutcome]
    meta: Dict[str, Any] = field(default_factory=dict, compare=False)

    def summary(self) -> Dict[str, int]:
        counts = {status.value: 0 for status in OutcomeStatus}
        for outcome in self.outcomes:
            counts[outcome.status.value] += 1
        counts["total"] = len(self.outcomes)
        counts["must_pass_failures"] = len(self.must_pass_failures())
        return counts

    def must_pass_failures(self) -> List[VerificationOutcome]:
        return [o for o in self.outcomes if o.expected == "MUST_PASS" and o.status != OutcomeStatus.PASS]

    @property
    def ok(self) -> bool:
        return not self.must_pass_failures()


def _float_text(value: float) -> str:
    # shortest text that reads back to the same float; integral values drop ".0"
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def format_point(point: Dict[str, Binding]) -> str:
    """Compact, deterministic text form of a binding set, e.g. "f=exp(-x^2), n=1, z=1".

    Floats are written in full precision, so the text reads back to the same point.
    """
    parts = []
    for name in sorted(point):
        value = point[name]
        parts.append(f"{name}={_float_text(value)}" if isinstance(value, float) else f"{name}={value}")
    return ", ".join(parts)


def outcomes_frame(report: VerificationReport) -> pd.DataFrame:
    """One row per outcome, columns in OUTCOME_COLUMNS order; `point` is flattened to text."""
    rows = []
    for outcome in report.outcomes:
        row = outcome.to_dict()
        row["point"] = format_point(outcome.point)
        rows.append(row)
    return pd.DataFrame(rows, columns=OUTCOME_COLUMNS)


def run_metadata(version: str) -> Dict[str, Any]:
    return {
        "schema": REPORT_SCHEMA_VERSION,
        "version": version,
        "created": datetime.datetime.now(tz=datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


def serialize_report(report: VerificationReport) -> str:
    """
    JSON document {"meta": ..., "summary": ..., "outcomes": [...]}.

    Everything that changes between identical runs (timestamps, version) is
    confined to "meta".
    """
    payload = {
        "meta": report.meta,
        "summary": report.summary(),
        "outcomes": [o.to_dict() for o in report.outcomes],
    }
    return json.dumps(payload, indent=2, allow_nan=True)


def parse_report(text: str) -> VerificationReport:
    """Inverse of serialize_report."""
    payload = json.loads(text)
    outcomes = [VerificationOutcome.from_dict(item) for item in payload.get("outcomes", [])]
    return VerificationReport(outcomes=outcomes, meta=payload.get("meta", {}))


def report_to_csv(report: VerificationReport) -> str:
    return outcomes_frame(report).to_csv(index=False)


def report_to_table(report: VerificationReport) -> str:
    df = outcomes_frame(report)
    if df.empty:
        return "(no outcomes)"
    df = df.drop(columns=["note"]).assign(note=df["note"].str.slice(0, 60))
    summary = report.summary()
    footer = ", ".join(f"{k}={v}" for k, v in summary.items())
    return df.to_string(index=False, float_format=lambda v: f"{v:.10g}") + "\n\n" + footer


def render_report(report: VerificationReport, fmt: str) -> str:
    if fmt == "json":
        return serialize_report(report)
    if fmt == "csv":
        return report_to_csv(report)
    if fmt == "table":
        return report_to_table(report)
    raise ValueError(f"unknown report format '{fmt}' (valid: table, json, csv)")


def export_report(report: VerificationReport, fmt: str, output_path: Optional[str] = None) -> str:
    """Renders the report and writes it to `output_path` when given; returns the rendered text."""
    text = render_report(report, fmt)
    if output_path:
        directory = os.path.dirname(output_path)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
        with open(output_path, "w") as f:
            f.write(text)
            if not text.endswith("\n"):
                f.write("\n")
        tprint(f"Exported {fmt} report to {output_path}")
    return text
