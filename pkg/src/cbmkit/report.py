"""Outcome record shared by every checker."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


def _jsonable(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "tolist"):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    return repr(x)


@dataclass
class IneqReport:
    """One inequality check.

    ``slack`` is oriented so that a nonnegative value means the inequality
    holds: ``lhs - rhs`` for ">=" checks and ``rhs - lhs`` for "<=" checks.
    """

    name: str
    lhs: float
    rhs: float
    orientation: str
    rel_tolerance: float
    slack: float = 0.0
    passed: bool = False
    witness: dict = field(default_factory=dict)
    path: str = "closed_form"
    mode: str = "assert"
    notes: list = field(default_factory=list)
    check: str = ""

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        if self.orientation not in (">=", "<="):
            raise ValueError("orientation must be '>=' or '<='")
        if self.lhs == self.rhs:
            self.slack = 0.0
        elif self.orientation == ">=":
            self.slack = self.lhs - self.rhs
        else:
            self.slack = self.rhs - self.lhs
        scale = max(abs(self.lhs), abs(self.rhs), 1e-12)
        if math.isnan(self.slack):
            self.passed = False
        elif math.isinf(scale):
            self.passed = self.slack >= 0
        else:
            self.passed = self.slack >= -self.rel_tolerance * scale
        if not self.check:
            self.check = self.name

    @property
    def relative_slack(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs), 1e-12)
        return self.slack / scale if math.isfinite(scale) else math.nan

    def to_dict(self) -> dict[str, Any]:
        return _jsonable({
            "check": self.check,
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "orientation": self.orientation,
            "slack": self.slack,
            "rel_tolerance": self.rel_tolerance,
            "pass": bool(self.passed),
            "path": self.path,
            "mode": self.mode,
            "witness": self.witness,
            "notes": list(self.notes),
        })
