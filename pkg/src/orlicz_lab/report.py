"""Named check results shared by the verification suites and the CLI."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class Check:
    """One verdict: a measured value compared with a target at a tolerance."""
    name: str
    anchor: str
    measured: float
    target: float | None = None
    tol: float | None = None
    passed: bool = True
    detail: dict = field(default_factory=dict)

    @classmethod
    def compare(cls, name, anchor, measured, target, tol, **detail):
        ok = bool(np.isfinite(measured) and abs(measured - target) <= tol)
        return cls(name, anchor, float(measured), float(target), float(tol), ok, detail)

    @classmethod
    def bound(cls, name, anchor, measured, upper, **detail):
        ok = bool(np.isfinite(measured) and measured <= upper)
        return cls(name, anchor, float(measured), float(upper), None, ok, detail)


@dataclass
class VerificationReport:
    title: str
    checks: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def add(self, check):
        self.checks.append(check)
        return check

    def extend(self, checks):
        self.checks.extend(checks)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_rows(self):
        rows = []
        for c in self.checks:
            rows.append({"check": c.name, "anchor": c.anchor, "value": _fmt(c.measured),
                         "target": _fmt(c.target), "tolerance": _fmt(c.tol),
                         "verdict": "pass" if c.passed else "fail"})
        return rows

    def to_csv(self):
        buf = io.StringIO()
        cols = ["check", "anchor", "value", "target", "tolerance", "verdict"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(self.to_rows())
        return buf.getvalue()

    def to_json(self):
        doc = {"title": self.title, "passed": self.passed,
               "provenance": _jsonable(self.provenance),
               "checks": [_jsonable(asdict(c)) for c in self.checks]}
        return json.dumps(doc, indent=2, sort_keys=True)

    def summary(self):
        n = len(self.checks)
        bad = len(self.failures())
        return f"{self.title}: {n - bad}/{n} checks passed"


def _fmt(x):
    if x is None:
        return ""
    return f"{x:.12g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return repr(obj)
