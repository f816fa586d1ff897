"""Experiment reports: one row per (tau, rule), CSV round-trip, and report diffs."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .errors import ContractError

REPORT_COLUMNS = ("tau", "rule", "alpha", "relative_error")


def fmt(x: float) -> str:
    """17 significant digits: lossless for doubles and stable across runs."""
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class ReportRow:
    tau: float
    rule: str
    alpha: float
    relative_error: float


@dataclass
class ExperimentReport:
    rows: list[ReportRow]
    provenance: dict = field(default_factory=dict)

    def keys(self) -> list[tuple[float, str]]:
        return [(r.tau, r.rule) for r in self.rows]

    def get(self, tau: float, rule: str) -> ReportRow:
        for row in self.rows:
            if row.tau == tau and row.rule == rule:
                return row
        raise KeyError((tau, rule))

    def validate(self, taus, rules) -> None:
        expected = sorted((float(t), r) for t in taus for r in rules)
        if sorted(self.keys()) != expected:
            raise ContractError(f"report rows {self.keys()} do not cover {expected}")

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for r in self.rows:
            writer.writerow([fmt(r.tau), r.rule, fmt(r.alpha), fmt(r.relative_error)])
        return buf.getvalue()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())

    @classmethod
    def from_csv(cls, path) -> "ExperimentReport":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != REPORT_COLUMNS:
                raise ContractError(f"{path}: expected columns {REPORT_COLUMNS}, got {reader.fieldnames}")
            rows = [
                ReportRow(float(d["tau"]), d["rule"], float(d["alpha"]), float(d["relative_error"]))
                for d in reader
            ]
        return cls(rows)


@dataclass(frozen=True)
class RowDelta:
    tau: float
    rule: str
    alpha_abs: float
    alpha_rel: float
    error_abs: float
    error_rel: float

    @property
    def nonzero(self) -> bool:
        return self.alpha_abs != 0 or self.error_abs != 0


@dataclass
class ReportDiff:
    deltas: list[RowDelta]

    @property
    def max_relative_delta(self) -> float:
        return max((max(d.alpha_rel, d.error_rel) for d in self.deltas), default=0.0)

    @property
    def changed(self) -> list[RowDelta]:
        return [d for d in self.deltas if d.nonzero]

    def summary(self) -> str:
        lines = [f"rows compared: {len(self.deltas)}, rows changed: {len(self.changed)}, "
                 f"max relative delta: {self.max_relative_delta:.3g}"]
        for d in self.changed:
            lines.append(
                f"  tau={d.tau:g} rule={d.rule}: d_alpha={d.alpha_abs:.3g} ({d.alpha_rel:.3g} rel), "
                f"d_error={d.error_abs:.3g} ({d.error_rel:.3g} rel)"
            )
        return "\n".join(lines)


def _rel(a: float, b: float) -> float:
    diff = abs(a - b)
    if diff == 0:
        return 0.0
    return diff / max(abs(a), abs(b))


def compare_reports(a: ExperimentReport, b: ExperimentReport) -> ReportDiff:
    """Per-row absolute and relative deltas of alpha and error; rows matched by (tau, rule)."""
    if sorted(a.keys()) != sorted(b.keys()):
        raise ContractError(f"reports have different shapes: {a.keys()} vs {b.keys()}")
    deltas = []
    for row in a.rows:
        other = b.get(row.tau, row.rule)
        deltas.append(RowDelta(
            row.tau, row.rule,
            abs(row.alpha - other.alpha), _rel(row.alpha, other.alpha),
            abs(row.relative_error - other.relative_error),
            _rel(row.relative_error, other.relative_error),
        ))
    return ReportDiff(deltas)
