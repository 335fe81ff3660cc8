"""Time-dependent market coefficients r(t), q(t), sigma(t).

Curves are piecewise constant ("step") or piecewise linear ("linear") in t.
At a knot the curve takes the value of the segment that starts there, so
``Piecewise{{0.2, 0 <= t < 2}, {0.1, 2 <= t}}`` evaluates to 0.1 at t = 2.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError

# Times closer than this (relative to max(1, |t|)) to a knot are treated as the knot,
# so accumulated partition sums land on the intended segment.
KNOT_RTOL = 1e-12

# Ratio comparisons in the monotonicity checks; absorbs rounding of r/sigma^2.
RATIO_RTOL = 1e-12

INTERPOLATIONS = ("step", "linear")


def _time_tol(t: float) -> float:
    return KNOT_RTOL * max(1.0, abs(t))


@dataclass(frozen=True)
class CoefficientCurve:
    """A coefficient as a function of calendar time in years."""

    times: tuple[float, ...]
    values: tuple[float, ...]
    interp: str = "step"

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if not times:
            raise DomainError("a curve needs at least one knot")
        if len(times) != len(values):
            raise DomainError("knot times and values differ in length")
        if times[0] != 0.0:
            raise DomainError(f"first knot must be at t = 0, got {times[0]!r}")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("knot times must be strictly increasing")
        if not all(math.isfinite(v) for v in values):
            raise DomainError("curve values must be finite")
        if self.interp not in INTERPOLATIONS:
            raise DomainError(f"interp must be one of {INTERPOLATIONS}, got {self.interp!r}")

    @classmethod
    def constant(cls, value: float) -> "CoefficientCurve":
        return cls((0.0,), (value,), "step")

    @classmethod
    def from_knots(cls, knots: Iterable[tuple[float, float]], interp: str = "step") -> "CoefficientCurve":
        pairs = list(knots)
        return cls(tuple(t for t, _ in pairs), tuple(v for _, v in pairs), interp)

    def segment(self, t: float) -> int:
        """Index of the segment containing ``t`` (its start knot is <= t)."""
        return max(bisect.bisect_right(self.times, t + _time_tol(t)) - 1, 0)

    def __call__(self, t: float) -> float:
        i = self.segment(t)
        if self.interp == "step" or i == len(self.times) - 1:
            return self.values[i]
        t0, t1 = self.times[i], self.times[i + 1]
        w = min(max((t - t0) / (t1 - t0), 0.0), 1.0)
        return self.values[i] + w * (self.values[i + 1] - self.values[i])

    def extremes(self, horizon: float = math.inf) -> tuple[float, float]:
        """Exact (min, max) over [0, horizon]; extremes of step/linear curves sit at knots."""
        pts = [v for t, v in zip(self.times, self.values) if t <= horizon]
        if math.isfinite(horizon):
            pts.append(self(horizon))
        return min(pts), max(pts)

    def integral(self, a: float, b: float) -> float:
        """Exact integral over [a, b]."""
        if b < a:
            return -self.integral(b, a)
        cuts = [a] + [t for t in self.times if a < t < b] + [b]
        total = 0.0
        for lo, hi in zip(cuts, cuts[1:]):
            if hi <= lo:
                continue
            if self.interp == "step":
                total += self.values[self.segment(lo)] * (hi - lo)
            else:
                # linear on [lo, hi]: trapezoid is exact
                total += 0.5 * (self(lo) + self._left_limit(hi, lo)) * (hi - lo)
        return total

    def _left_limit(self, t: float, inside: float) -> float:
        # value approached from the left within the segment holding ``inside``
        i = self.segment(inside)
        if self.interp == "step" or i == len(self.times) - 1:
            return self.values[i]
        t0, t1 = self.times[i], self.times[i + 1]
        return self.values[i] + (t - t0) / (t1 - t0) * (self.values[i + 1] - self.values[i])

    def to_dict(self) -> dict:
        return {
            "interp": self.interp,
            "knots": [{"t": t, "value": v} for t, v in zip(self.times, self.values)],
        }

    @classmethod
    def from_dict(cls, doc) -> "CoefficientCurve":
        if isinstance(doc, (int, float)) and not isinstance(doc, bool):
            return cls.constant(float(doc))
        knots = [(float(k["t"]), float(k["value"])) for k in doc["knots"]]
        return cls.from_knots(knots, doc.get("interp", "step"))


@dataclass(frozen=True)
class CoefficientSet:
    """The triple (r, q, sigma) plus the volatility bounds over the horizon.

    ``sigma_lo`` and ``sigma_hi`` are derived from the sigma curve rather than
    supplied, so they always bracket it.
    """

    r: CoefficientCurve
    q: CoefficientCurve
    sigma: CoefficientCurve
    horizon: float = math.inf
    sigma_lo: float = field(init=False)
    sigma_hi: float = field(init=False)

    def __post_init__(self):
        if not self.horizon > 0:
            raise DomainError(f"horizon must be positive, got {self.horizon!r}")
        lo, hi = self.sigma.extremes(self.horizon)
        if lo <= 0:
            raise DomainError(f"sigma must be positive everywhere, minimum is {lo!r}")
        for name, curve in (("r", self.r), ("q", self.q)):
            low = curve.extremes(self.horizon)[0]
            if low < 0:
                raise DomainError(f"{name}(t) must be nonnegative, minimum is {low!r}")
        object.__setattr__(self, "sigma_lo", lo)
        object.__setattr__(self, "sigma_hi", hi)

    @classmethod
    def constant(cls, r: float, q: float, sigma: float, horizon: float = math.inf) -> "CoefficientSet":
        return cls(
            CoefficientCurve.constant(r),
            CoefficientCurve.constant(q),
            CoefficientCurve.constant(sigma),
            horizon,
        )

    def swapped(self) -> "CoefficientSet":
        """Exchange the roles of r and q."""
        return CoefficientSet(self.q, self.r, self.sigma, self.horizon)

    def with_horizon(self, horizon: float) -> "CoefficientSet":
        return CoefficientSet(self.r, self.q, self.sigma, horizon)

    @property
    def q_identically_zero(self) -> bool:
        return all(v == 0.0 for v in self.q.values)

    def to_dict(self) -> dict:
        return {"r": self.r.to_dict(), "q": self.q.to_dict(), "sigma": self.sigma.to_dict()}


def eval_coefficients(cs: CoefficientSet, t: float) -> tuple[float, float, float]:
    """Return ``(r(t), q(t), sigma(t))``."""
    if not (t >= -_time_tol(0.0) and t <= cs.horizon + _time_tol(cs.horizon)):
        raise DomainError(f"time {t!r} outside [0, {cs.horizon!r}]")
    t = min(max(t, 0.0), cs.horizon)
    return cs.r(t), cs.q(t), cs.sigma(t)


@dataclass
class ConditionReport:
    put_monotone_ok: bool
    call_monotone_ok: bool
    q_positive: bool
    branch_ok: bool
    violations: list[tuple[float, str, float, float]]

    @property
    def all_ok(self) -> bool:
        return self.put_monotone_ok and self.call_monotone_ok and self.q_positive and self.branch_ok

    def first(self, condition: str):
        return next((v for v in self.violations if v[1] == condition), None)

    def to_dict(self) -> dict:
        return {
            "put_monotone_ok": self.put_monotone_ok,
            "call_monotone_ok": self.call_monotone_ok,
            "q_positive": self.q_positive,
            "branch_ok": self.branch_ok,
            "violation_count": len(self.violations),
            "violations": [
                {"t": t, "condition": name, "lhs": lhs, "rhs": rhs}
                for t, name, lhs, rhs in self.violations
            ],
        }


def _decreases(new, old):
    return new < old - RATIO_RTOL * np.maximum(np.abs(new), np.abs(old))


def check_conditions(cs: CoefficientSet, partition, u: float | None = None) -> ConditionReport:
    """Evaluate the structural hypotheses on the nodes of ``partition``.

    Ratios r/sigma^2 and q/sigma^2 are compared between consecutive nodes
    (weak monotonicity); the branching condition ``d*eta < rho < u*eta`` is
    checked at every step. Never raises.
    """
    if u is None:
        u = math.exp(partition.dx)
    d = 1.0 / u
    times = partition.nodes[:-1]
    s2 = partition.sigma ** 2
    r_ratio = partition.r / s2
    q_ratio = partition.q / s2
    rho, eta = partition.rho, partition.eta
    found: list[tuple[int, float, str, float, float]] = []

    def record(mask, name, lhs, rhs, offset=0):
        for i in np.flatnonzero(mask):
            n = int(i) + offset
            found.append((n, float(times[n]), name, float(lhs[i]), float(rhs[i])))

    new_r, old_r = r_ratio[1:], r_ratio[:-1]
    new_q, old_q = q_ratio[1:], q_ratio[:-1]
    r_down = _decreases(new_r, old_r)
    q_up = _decreases(old_q, new_q)
    r_up = _decreases(old_r, new_r)
    q_down = _decreases(new_q, old_q)
    record(r_down, "r/sigma^2 nondecreasing", new_r, old_r, 1)
    record(q_up, "q/sigma^2 nonincreasing", new_q, old_q, 1)
    record(r_up, "r/sigma^2 nonincreasing", new_r, old_r, 1)
    record(q_down, "q/sigma^2 nondecreasing", new_q, old_q, 1)

    q_bad = ~(partition.q > 0)
    record(q_bad, "q > 0", partition.q, np.zeros_like(partition.q))
    lo_bad = ~(d * eta < rho)
    hi_bad = ~(rho < u * eta)
    record(lo_bad, "d*eta < rho", rho, d * eta)
    record(hi_bad, "rho < u*eta", rho, u * eta)

    found.sort(key=lambda v: v[0])
    return ConditionReport(
        put_monotone_ok=not (r_down.any() or q_up.any()),
        call_monotone_ok=not (r_up.any() or q_down.any()),
        q_positive=not q_bad.any(),
        branch_ok=not (lo_bad.any() or hi_bad.any()),
        violations=[v[1:] for v in found],
    )
