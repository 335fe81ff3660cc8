"""Monotonicity, bound and boundary-shape audits on solved lattices."""

from __future__ import annotations

import math

import numpy as np

from ..btm import LatticeSolution, price_btm
from ..coefficients import ConditionReport, check_conditions
from ..contract import OptionSpec
from ..eds import GridSolution, solve_eds
from .report import Verdict

STRIKE_BUMP = 0.1
EPS = np.finfo(float).eps


def engine_name(sol) -> str:
    return "btm" if isinstance(sol, LatticeSolution) else "eds"


def audit_tol(spec: OptionSpec) -> float:
    """Absolute slack for value comparisons, on the scale of the contract."""
    return spec.exercise_tol() if spec.E > 0 else 2.0 ** -40 * spec.S0


def _levels(sol):
    """Yield ``(n, j_first, row)`` for every stored level."""
    for n in range(sol.N + 1):
        if isinstance(sol, LatticeSolution):
            yield n, -n, sol.row(n)
        else:
            yield n, -sol.J, sol.row(n)


def _worst(diff, n, j_first):
    k = int(np.argmax(diff))
    return float(diff[k]), (n, j_first + k)


def time_violation(sol) -> tuple[float, tuple | None]:
    """Largest V_j^n - V_j^{n-1} over matched nodes (positive means later exceeds earlier)."""
    worst, loc = -math.inf, None
    prev = None
    for n, j_first, row in _levels(sol):
        if prev is not None:
            if isinstance(sol, LatticeSolution):
                later = row[1:-1]
            else:
                later = row
            w, l = _worst(later - prev, n, j_first + (1 if isinstance(sol, LatticeSolution) else 0))
            if w > worst:
                worst, loc = w, l
        prev = row
    return worst, loc


def space_violation(sol) -> tuple[float, tuple | None]:
    """Largest move against the expected direction in j (puts fall, calls rise)."""
    worst, loc = -math.inf, None
    sign = 1.0 if sol.spec.kind == "put" else -1.0
    for n, j_first, row in _levels(sol):
        if len(row) < 2:
            continue
        w, l = _worst(sign * (row[1:] - row[:-1]), n, j_first + 1)
        if w > worst:
            worst, loc = w, l
    return worst, loc


def bound_violation(sol) -> tuple[float, float, tuple | None, tuple | None]:
    """(worst below 0, worst above the cap, locations); cap is E for puts and S_j for calls.

    The cap is inflated by a few ulps, growing with |x_j| because exp(j*dx)
    inherits the rounding of its argument.
    """
    low, high = -math.inf, -math.inf
    lloc = hloc = None
    spec = sol.spec
    for n, j_first, row in _levels(sol):
        w, l = _worst(-row, n, j_first)
        if w > low:
            low, lloc = w, l
        j = np.arange(j_first, j_first + len(row))
        slack = 1.0 + 16 * EPS * (1.0 + np.abs(j * sol.dx))
        if spec.kind == "put":
            cap = np.full(len(row), spec.E)
        else:
            cap = sol.spec.S0 * np.exp(j * sol.dx)
        w, l = _worst(row - cap * slack, n, j_first)
        if w > high:
            high, hloc = w, l
    return low, high, lloc, hloc


def intrinsic_violation(sol) -> tuple[float, tuple | None]:
    worst, loc = -math.inf, None
    for n, j_first, row in _levels(sol):
        j = np.arange(j_first, j_first + len(row))
        phi = sol.spec.payoff(sol.spec.S0 * np.exp(j * sol.dx))
        w, l = _worst(phi - row, n, j_first)
        if w > worst:
            worst, loc = w, l
    return worst, loc


def _resolve(sol, spec):
    if isinstance(sol, LatticeSolution):
        return price_btm(spec, sol.cs, sol.u, partition=sol.partition)
    return solve_eds(spec, sol.cs, sol.dx, sol.alpha, sol.half_width_k,
                     keep_surface=True, partition=sol.partition, width=sol.J)


def strike_violation(sol, bump=STRIKE_BUMP) -> tuple[float, tuple | None]:
    """Re-solve with E*(1 + bump) on the same lattice; puts must not fall, calls must not rise."""
    spec = sol.spec
    bumped = OptionSpec(spec.kind, spec.style, spec.E * (1 + bump) if spec.E > 0 else bump * spec.S0,
                        spec.S0, spec.T)
    other = _resolve(sol, bumped)
    sign = 1.0 if spec.kind == "put" else -1.0
    worst, loc = -math.inf, None
    for (n, j_first, row), (_, _, row2) in zip(_levels(sol), _levels(other)):
        w, l = _worst(sign * (row - row2), n, j_first)
        if w > worst:
            worst, loc = w, l
    return worst, loc


def call_time_slack(spec, cs, dx, alpha=1.0, half_width_k=6.0) -> float:
    """kappa*dx^delta for the grid call, with kappa fitted on the grids 4dx and 2dx."""
    from ..eds import delta_exponent

    delta = delta_exponent(alpha)
    kappa = 0.0
    for h in (4 * dx, 2 * dx):
        coarse = solve_eds(spec, cs, h, alpha, half_width_k, keep_surface=True)
        worst, _ = time_violation(coarse)
        kappa = max(kappa, max(worst, 0.0) / h ** delta)
    return kappa * dx ** delta


def monotonicity_audit(sol, report: ConditionReport | None = None, *, tol: float | None = None,
                       time_slack: float = 0.0, strike: bool = True) -> list[Verdict]:
    """Scan every adjacent pair of levels and of nodes and return one verdict per property.

    The time-direction claim (earlier level dominates) is asserted only when
    ``report`` says the ratio hypotheses hold; otherwise the verdict records
    whether a counterexample was found. ``time_slack`` widens the grid-call
    comparison by the allowed O(dx^delta) defect.
    """
    spec = sol.spec
    eng = engine_name(sol)
    if report is None:
        report = check_conditions(sol.cs, sol.partition)
    if tol is None:
        tol = audit_tol(spec)
    out = []

    if spec.american:
        hyp = report.put_monotone_ok if spec.kind == "put" else report.call_monotone_ok
        need = "r/sigma^2 nondecreasing, q/sigma^2 nonincreasing" if spec.kind == "put" \
            else "r/sigma^2 nonincreasing, q/sigma^2 nondecreasing"
        slack = time_slack if (eng == "eds" and spec.kind == "call") else 0.0
        worst, loc = time_violation(sol)
        out.append(Verdict.inequality(
            "time monotonicity", f"V_j^(n-1) >= V_j^n given {need}", worst, loc, tol + slack, hyp, eng))
    else:
        out.append(Verdict.skipped("time monotonicity", "V_j^(n-1) >= V_j^n", "european", eng))

    worst, loc = space_violation(sol)
    claim = "V nonincreasing in S" if spec.kind == "put" else "V nondecreasing in S"
    out.append(Verdict.inequality("space monotonicity", claim, worst, loc, tol, True, eng))

    if strike and sol.cs is not None:
        worst, loc = strike_violation(sol)
        claim = "V nondecreasing in E" if spec.kind == "put" else "V nonincreasing in E"
        out.append(Verdict.inequality("strike monotonicity", claim, worst, loc, tol, True, eng))

    low, high, lloc, hloc = bound_violation(sol)
    out.append(Verdict.inequality("lower bound", "V >= 0", low, lloc, tol, True, eng))
    cap = "V <= E" if spec.kind == "put" else "V <= S_j"
    out.append(Verdict.inequality("upper bound", cap, high, hloc, tol, True, eng))

    if spec.american:
        worst, loc = intrinsic_violation(sol)
        out.append(Verdict.inequality("intrinsic value", "V >= payoff", worst, loc, 0.0, True, eng))
        out.append(boundary_verdict(sol, report))
    return out


def boundary_verdict(sol, report: ConditionReport) -> Verdict:
    """Direction of the per-level boundary index: rising for puts, falling for calls."""
    from ..btm import extract_boundary_btm
    from ..eds import extract_boundary_eds

    eng = engine_name(sol)
    b = extract_boundary_btm(sol) if eng == "btm" else extract_boundary_eds(sol)
    if not b.exists:
        return Verdict.skipped("boundary shape", "exercise boundary", b.reason, eng)
    ok, worst, level = b.monotone()
    if sol.spec.kind == "put":
        hyp, claim = report.put_monotone_ok, "j_(n-1) <= j_n"
    else:
        hyp, claim = report.call_monotone_ok and report.q_positive, "j_(n-1) >= j_n"
    loc = (level, int(b.index[level])) if level is not None else None
    return Verdict.inequality("boundary shape", claim, worst, loc, 0.0, hyp, eng)
