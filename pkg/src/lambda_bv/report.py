"""Named inequality checks and the verification report that collects them."""
from __future__ import annotations

import json
import math
import platform
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any

TOL = 1e-10

_STRICT = {"<", ">"}
_RELATIONS = {"<", "<=", ">", ">=", "=="}


@dataclass
class Check:
    name: str
    lhs: Any
    rhs: Any
    relation: str
    margin: float
    status: str
    radius: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def line(self) -> str:
        return (f"[{self.status.upper():12s}] {self.name}: {self.lhs} {self.relation} {self.rhs} "
                f"(margin {self.margin:.3e}, radius {self.radius:.1e})")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("lhs", "rhs"):
            if isinstance(d[k], Fraction):
                d[k] = str(d[k])
        return d


def _margin(lhs, rhs, relation: str):
    if relation in ("<", "<="):
        return rhs - lhs
    if relation in (">", ">="):
        return lhs - rhs
    return -abs(lhs - rhs)


def exact_check(name: str, lhs: Fraction, rhs: Fraction, relation: str, note: str = "") -> Check:
    """Zero-tolerance comparison of exact rationals."""
    if relation not in _RELATIONS:
        raise ValueError(relation)
    lhs, rhs = Fraction(lhs), Fraction(rhs)
    m = _margin(lhs, rhs, relation)
    ok = {"<": lhs < rhs, "<=": lhs <= rhs, ">": lhs > rhs, ">=": lhs >= rhs, "==": lhs == rhs}[relation]
    return Check(name, lhs, rhs, relation, float(m), "pass" if ok else "fail", 0.0, note)


def float_check(name: str, lhs: float, rhs: float, relation: str, radius: float = 0.0,
                tol: float = TOL, note: str = "") -> Check:
    """Compare floats whose lhs - rhs is known only to within ``radius``.

    Strict relations pass only when the margin beats ``radius + tol``; a
    positive margin below that is inconclusive. Non-strict relations pass
    when the margin is at least ``radius - tol`` (so exact equality passes)
    and fail when it is below ``-(radius + tol)``.
    """
    if relation not in _RELATIONS:
        raise ValueError(relation)
    lhs, rhs = float(lhs), float(rhs)
    m = _margin(lhs, rhs, relation)
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        status = "fail"
    elif relation == "==":
        status = "pass" if -m <= tol + radius else "fail"
    elif relation in _STRICT:
        status = "pass" if m > radius + tol else ("inconclusive" if m > -(radius + tol) else "fail")
    else:
        status = "pass" if m >= radius - tol else ("inconclusive" if m >= -(radius + tol) else "fail")
    return Check(name, lhs, rhs, relation, m, status, radius, note)


def bool_check(name: str, ok: bool, detail: str = "", lhs: Any = None, rhs: Any = None) -> Check:
    """Structural predicate; both sides are still recorded."""
    return Check(name, lhs if lhs is not None else ok, rhs if rhs is not None else True, "==",
                 0.0 if ok else -1.0, "pass" if ok else "fail", 0.0, detail)


@dataclass
class VerificationReport:
    config: dict
    checks: list[Check] = field(default_factory=list)
    wall_time: float = 0.0
    versions: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.versions:
            import numpy

            from . import __version__

            self.versions = {"lambda_bv": __version__, "python": platform.python_version(),
                             "numpy": numpy.__version__}

    def extend(self, checks):
        self.checks.extend(checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def counts(self) -> dict:
        out = {"pass": 0, "fail": 0, "inconclusive": 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "ok": self.ok,
            "counts": self.counts(),
            "checks": [c.to_dict() for c in self.checks],
            "versions": self.versions,
            "wall_time": self.wall_time,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]
