"""Run reports: tabular records, named verdicts and their file output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class Verdict:
    """One checked inequality ``lhs <op> rhs`` with the numbers that were compared."""

    name: str
    inequality: str
    lhs: float
    rhs: float
    passed: bool
    tol: float = 0.0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "inequality": self.inequality,
            "lhs": _json_float(self.lhs),
            "rhs": _json_float(self.rhs),
            "tol": _json_float(self.tol),
            "passed": bool(self.passed),
        }


def _json_float(x):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def check_le(name: str, lhs: float, rhs: float, tol: float = 0.0, label: str | None = None) -> Verdict:
    return Verdict(name, label or f"{name}: lhs <= rhs + tol", lhs, rhs, bool(lhs <= rhs + tol), tol)


def check_close(name: str, value: float, target: float, tol: float, label: str | None = None) -> Verdict:
    return Verdict(name, label or f"{name}: |value - target| <= tol", value, target, bool(abs(value - target) <= tol), tol)


def check_eq(name: str, value, target, label: str | None = None) -> Verdict:
    return Verdict(name, label or f"{name}: value == target", float(value), float(target), bool(value == target), 0.0)


@dataclass
class RunReport:
    scenario: str
    columns: tuple
    rows: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    runtimes_ms: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def add(self, *row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(self.columns)}")
        self.rows.append(tuple(row))


def _cell(v) -> str:
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, (float, int)) and not isinstance(v, bool):
        return repr(float(v)) if isinstance(v, float) else str(v)
    if hasattr(v, "item"):
        return _cell(v.item())
    return str(v)


def csv_text(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.columns)
    for row in report.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def verdict_document(report: RunReport) -> dict:
    return {
        "scenario": report.scenario,
        "passed": report.passed,
        "verdicts": [v.as_dict() for v in report.verdicts],
        "runtimes_ms": {k: round(v, 3) for k, v in report.runtimes_ms.items()},
        "notes": list(report.notes),
    }


def emit_report(report: RunReport, out_dir, fmt: str = "csv") -> list[Path]:
    """Write ``<scenario>.csv`` and ``<scenario>.verdicts.json`` into ``out_dir``."""
    if fmt != "csv":
        raise ValueError(f"unsupported format {fmt!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{report.scenario}.csv"
        with open(csv_path, "w", newline="") as fh:
            fh.write(csv_text(report))
        json_path = out / f"{report.scenario}.verdicts.json"
        with open(json_path, "w", newline="\n") as fh:
            json.dump(verdict_document(report), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {exc.filename or out}: {exc.strerror}") from exc
    return [csv_path, json_path]


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
