"""Approximate optimal exercise boundaries extracted from solved lattices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def scan_exercise_run(values, payoff, tol, kind, min_run=1):
    """Length of the contiguous exercise run on the exercise side of a row.

    A node counts as exercised when its value is within ``tol`` of a strictly
    positive payoff. Puts are scanned from the low end, calls from the high
    end; the scan stops at the first node that is not exercised. Runs shorter
    than ``min_run`` report 0.
    """
    v = values if kind == "put" else values[::-1]
    p = payoff if kind == "put" else payoff[::-1]
    exercised = (v - p <= tol) & (p > tol)
    if exercised.all():
        run = len(v)
    else:
        run = int(np.argmin(exercised))
    return run if run >= min_run else 0


def boundary_index(values, payoff, tol, kind, j_first, min_run=1):
    """Node index j_n bounding the exercise region of one row, or None.

    ``j_first`` is the index of ``values[0]``; rows hold consecutive integers.
    """
    run = scan_exercise_run(values, payoff, tol, kind, min_run)
    if run == 0:
        return None
    if kind == "put":
        return j_first + run - 1
    return j_first + len(values) - run


@dataclass
class ExerciseBoundary:
    """Per-level boundary indices plus their piecewise-linear interpolant.

    ``index[n]`` is NaN where the exercise region does not reach the computed
    part of level n. ``interp`` selects what is interpolated between nodes:
    "x" for the log-price (grid scheme) or "S" for the price (tree).
    """

    kind: str
    exists: bool
    times: np.ndarray
    index: np.ndarray
    dx: float
    c: float
    interp: str = "x"
    reason: str = ""

    @classmethod
    def none(cls, kind, times, dx, c, reason, interp="x"):
        return cls(kind, False, np.asarray(times), np.full(len(times), np.nan), dx, c, interp, reason)

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.index)

    @property
    def x(self) -> np.ndarray:
        return self.index * self.dx + self.c

    @property
    def S(self) -> np.ndarray:
        return np.exp(self.x)

    def levels(self):
        """Yield ``(n, t_n, j_n, x_n, S_n)`` for every level with a boundary."""
        x, S = self.x, self.S
        for n in np.flatnonzero(self.defined):
            yield int(n), float(self.times[n]), int(self.index[n]), float(x[n]), float(S[n])

    def at(self, t: float) -> float:
        """Interpolated log-price boundary at time t (NaN outside defined levels)."""
        if self.interp == "S":
            s = self.S_at(t)
            return math.log(s) if s > 0 else math.nan
        return _interp(self.times, self.x, t)

    def S_at(self, t: float) -> float:
        if self.interp == "S":
            return _interp(self.times, self.S, t)
        return math.exp(self.at(t))

    def monotone(self) -> tuple[bool, float, int | None]:
        """Check the expected direction: nondecreasing for puts, nonincreasing for calls.

        Returns ``(ok, worst_step, level)`` where ``worst_step`` is the largest
        move in the wrong direction, in index units.
        """
        idx = self.index[self.defined]
        levels = np.flatnonzero(self.defined)
        if len(idx) < 2:
            return True, 0.0, None
        steps = np.diff(idx)
        wrong = -steps if self.kind == "put" else steps
        k = int(np.argmax(wrong))
        worst = float(wrong[k])
        return worst <= 0, max(worst, 0.0), (int(levels[k + 1]) if worst > 0 else None)

    def sup_difference(self, other: "ExerciseBoundary") -> float:
        """sup_t |x_self(t) - x_other(t)| over the common range where both are defined."""
        pts = np.union1d(self.times[self.defined], other.times[other.defined])
        vals = [abs(self.at(t) - other.at(t)) for t in pts]
        vals = [v for v in vals if not math.isnan(v)]
        return max(vals) if vals else math.nan

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "exists": self.exists,
            "reason": self.reason,
            "levels": [
                {"n": n, "t": t, "j": j, "x": x, "S": s} for n, t, j, x, s in self.levels()
            ],
        }


def _interp(times, ys, t):
    n = int(np.searchsorted(times, t, side="right")) - 1
    if n < 0 or n >= len(times):
        return math.nan
    if n == len(times) - 1 or times[n] == t:
        return float(ys[n])
    t0, t1 = times[n], times[n + 1]
    w = (t - t0) / (t1 - t0)
    return float(w * ys[n + 1] + (1 - w) * ys[n])
