"""Verdicts and study reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
FOUND = "expected-counterexample: found"
NOT_FOUND = "hypotheses fail: no violation found"
SKIPPED = "not applicable"


@dataclass
class Verdict:
    """Outcome of one check.

    ``hypotheses`` says whether the assumptions behind the claimed inequality
    hold for this instance. When they do not, the check only records whether a
    violation exists and never fails.
    """

    check: str
    claim: str
    passed: bool
    worst: float = 0.0
    location: tuple | None = None
    hypotheses: bool = True
    status: str = PASS
    engine: str = ""

    @classmethod
    def inequality(cls, check, claim, worst, location, tol, hypotheses=True, engine=""):
        violated = worst > tol
        if not hypotheses:
            status = FOUND if violated else NOT_FOUND
            return cls(check, claim, True, worst, location if violated else None, False, status, engine)
        return cls(check, claim, not violated, worst, location if violated else None, True,
                   FAIL if violated else PASS, engine)

    @classmethod
    def flag(cls, check, claim, ok, worst=0.0, location=None, engine=""):
        return cls(check, claim, bool(ok), worst, location, True, PASS if ok else FAIL, engine)

    @classmethod
    def skipped(cls, check, claim, reason, engine=""):
        return cls(check, f"{claim} ({reason})", True, 0.0, None, False, SKIPPED, engine)

    @property
    def violation_found(self) -> bool:
        return self.status in (FOUND, FAIL)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "engine": self.engine,
            "claim": self.claim,
            "passed": self.passed,
            "status": self.status,
            "hypotheses": self.hypotheses,
            "worst": _clean(self.worst),
            "location": list(self.location) if self.location is not None else None,
        }

    def line(self) -> str:
        where = f" at (n, j) = {self.location}" if self.location is not None else ""
        eng = f"[{self.engine}] " if self.engine else ""
        return f"{self.status.upper():<8} {eng}{self.check}: {self.claim}; worst {self.worst:.3e}{where}"


@dataclass
class StudyReport:
    scenario: str
    params: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    table: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def failures(self) -> list:
        return [v for v in self.verdicts if not v.passed]

    def verdict(self, check: str, engine: str | None = None) -> Verdict:
        for v in self.verdicts:
            if v.check == check and (engine is None or v.engine == engine):
                return v
        raise KeyError(check)

    def add(self, *verdicts):
        self.verdicts.extend(verdicts)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "ok": self.ok,
            "params": _clean(self.params),
            "verdicts": [v.to_dict() for v in self.verdicts],
            "table": _clean(self.table),
            "slopes": _clean(self.slopes),
            "extra": _clean(self.extra),
        }

    def to_text(self) -> str:
        lines = [f"== {self.scenario} ({'ok' if self.ok else 'FAILED'})"]
        lines += ["  " + v.line() for v in self.verdicts]
        if self.table:
            cols = list(self.table[0])
            lines.append("  " + " ".join(f"{c:>14}" for c in cols))
            for row in self.table:
                lines.append("  " + " ".join(_cell(row.get(c)) for c in cols))
        for k, v in self.slopes.items():
            lines.append(f"  slope {k}: {v:.4f}")
        for k, v in self.extra.items():
            if isinstance(v, (int, float, str, bool)):
                lines.append(f"  {k}: {v}")
        return "\n".join(lines)


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:>14.6e}"
    return f"{str(v):>14}"


def _clean(obj):
    """Make a structure JSON-safe: NaN/inf become None, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj
