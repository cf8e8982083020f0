"""Scenario reports and their JSON, CSV and text renderings."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

CURVE_COLUMNS = ("r", "deficit_i", "deficit_f", "deficit_local")


@dataclass(frozen=True)
class Check:
    """One verdict: ``value <= tolerance`` (``relation="<="``) or ``value >= tolerance``."""

    name: str
    value: float
    tolerance: float
    relation: str = "<="

    def __post_init__(self) -> None:
        if self.relation not in ("<=", ">="):
            raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def passed(self) -> bool:
        return self.value <= self.tolerance if self.relation == "<=" else self.value >= self.tolerance


@dataclass
class ScenarioReport:
    scenario: str
    params: dict[str, Any]
    values: dict[str, float]
    checks: list[Check]
    duration_s: float
    curves: dict[str, list[float]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        nums = list(self.values.values()) + [c.value for c in self.checks] + [self.duration_s]
        nums += [x for col in self.curves.values() for x in col]
        bad = [x for x in nums if not math.isfinite(x)]
        if bad:
            raise ValueError(f"report for {self.scenario} holds non-finite numbers")

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["checks"] = [dict(asdict(c), passed=c.passed) for c in self.checks]
        d["passed"] = self.passed
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ScenarioReport:
        checks = [Check(c["name"], c["value"], c["tolerance"], c["relation"]) for c in d["checks"]]
        return cls(
            d["scenario"], dict(d["params"]), dict(d["values"]), checks, d["duration_s"],
            {k: list(v) for k, v in d.get("curves", {}).items()}, list(d.get("warnings", [])),
        )


def to_json(report: ScenarioReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)


def from_json(text: str) -> ScenarioReport:
    return ScenarioReport.from_dict(json.loads(text))


def to_csv(report: ScenarioReport) -> str:
    """Flat table ``kind,name,value,tolerance,relation,verdict``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "name", "value", "tolerance", "relation", "verdict"])
    for k, v in report.values.items():
        w.writerow(["value", k, repr(float(v)), "", "", ""])
    for c in report.checks:
        w.writerow(["check", c.name, repr(float(c.value)), repr(float(c.tolerance)), c.relation,
                    "PASS" if c.passed else "FAIL"])
    return buf.getvalue()


def curves_to_csv(curves: dict[str, list[float]]) -> str:
    missing = [c for c in CURVE_COLUMNS if c not in curves]
    if missing:
        raise ValueError(f"curve data lacks columns {missing}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_COLUMNS)
    for row in zip(*(curves[c] for c in CURVE_COLUMNS)):
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def to_text(report: ScenarioReport) -> str:
    lines = [f"scenario: {report.scenario}  ({report.duration_s:.2f} s)"]
    if report.params:
        lines.append("params: " + ", ".join(f"{k}={v}" for k, v in sorted(report.params.items())))
    for k, v in report.values.items():
        lines.append(f"  {k} = {v:.6g}")
    for c in report.checks:
        verdict = "PASS" if c.passed else "FAIL"
        lines.append(f"{verdict} {c.name}: {c.value:.3e} {c.relation} {c.tolerance:.3e}")
    for msg in report.warnings:
        lines.append(f"warning: {msg}")
    lines.append("overall: " + ("PASS" if report.passed else "FAIL"))
    return "\n".join(lines) + "\n"


FORMATS = ("json", "csv", "text")


def emit_report(report: ScenarioReport, fmt: str = "json") -> str:
    if fmt == "json":
        return to_json(report) + "\n"
    if fmt == "csv":
        return to_csv(report)
    if fmt == "text":
        return to_text(report)
    raise ValueError(f"format must be one of {FORMATS}")
