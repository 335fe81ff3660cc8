"""Canonical parameter sets and the audit run over each of them."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..btm import LatticeSolution, extract_boundary_btm, price_btm
from ..coefficients import CoefficientCurve, CoefficientSet, check_conditions
from ..contract import OptionSpec
from ..eds import GridSolution, extract_boundary_eds, solve_eds
from .audit import call_time_slack, engine_name, monotonicity_audit
from .report import FOUND, StudyReport, Verdict
from .symmetry import btm_symmetry, BTM_RTOL

DEFAULT_DX = 0.1


@dataclass(frozen=True)
class Scenario:
    name: str
    cs: CoefficientSet
    specs: tuple
    description: str = ""
    expect_counterexample: bool = False
    expect_no_boundary: bool = False


def _put(T=5.0):
    return OptionSpec("put", "american", E=1.0, S0=1.0, T=T)


def _call(T=5.0):
    return OptionSpec("call", "american", E=1.0, S0=1.0, T=T)


def scenario_suite() -> list[Scenario]:
    flat = CoefficientSet.constant(0.1, 0.0, 1.0)
    stepped_r = CoefficientSet(
        CoefficientCurve.from_knots([(0.0, 0.2), (2.0, 0.1)]),
        CoefficientCurve.constant(0.0),
        CoefficientCurve.constant(1.0),
    )
    sym = CoefficientSet.constant(0.1, 0.2, 1.0)
    return [
        Scenario("FIG12", flat, (_put(),), "constant r = 0.1, q = 0, sigma = 1"),
        Scenario("FIG34", stepped_r, (_put(),), "r drops from 0.2 to 0.1 at t = 2",
                 expect_counterexample=True),
        Scenario("SYM", sym, (_call(), _put()), "r = 0.1, q = 0.2"),
        Scenario("SYM-SWAP", sym.swapped(), (_call(), _put()), "r = 0.2, q = 0.1 (swap of SYM)"),
        Scenario("CALL-Q0", flat, (_call(),), "call with q = 0", expect_no_boundary=True),
    ]


def get_scenario(name: str) -> Scenario:
    for s in scenario_suite():
        if s.name == name.upper():
            return s
    raise KeyError(f"unknown scenario {name!r}; known: {[s.name for s in scenario_suite()]}")


def run_scenario(scn: Scenario, dx: float = DEFAULT_DX, engines=("btm", "eds"), alpha: float = 1.0,
                 half_width_k: float = 6.0) -> StudyReport:
    """Audit every spec of the scenario on each engine and add its scenario-level expectations."""
    report = StudyReport(
        scenario=scn.name,
        params={"coefficients": scn.cs.to_dict(), "specs": [s.to_dict() for s in scn.specs],
                "dx": dx, "alpha": alpha, "engines": list(engines)},
    )
    found_counter = False
    for spec in scn.specs:
        sols = []
        if "btm" in engines:
            sols.append(price_btm(spec, scn.cs, math.exp(dx)))
        if "eds" in engines:
            sols.append(solve_eds(spec, scn.cs, dx, alpha, half_width_k, keep_surface=True))
        cond = check_conditions(scn.cs, sols[0].partition)
        for sol in sols:
            slack = 0.0
            if spec.kind == "call" and isinstance(sol, GridSolution) and cond.call_monotone_ok:
                slack = call_time_slack(spec, scn.cs, dx, alpha, half_width_k)
            verdicts = monotonicity_audit(sol, cond, time_slack=slack)
            for v in verdicts:
                v.check = f"{spec.kind} {v.check}"
            report.add(*verdicts)
            found_counter |= any(v.status == FOUND and "time" in v.check for v in verdicts)
            eng = engine_name(sol)
            report.extra[f"{spec.kind}_{eng}_price"] = sol.root
            if scn.expect_no_boundary and spec.kind == "call":
                b = extract_boundary_btm(sol) if isinstance(sol, LatticeSolution) else extract_boundary_eds(sol)
                report.add(Verdict.flag(f"{spec.kind} no boundary", "q = 0 call has no exercise boundary",
                                        not b.exists, engine=eng))
        if "btm" in engines and spec.kind == "call":
            row = btm_symmetry(spec, scn.cs, math.exp(dx))
            report.add(Verdict.flag("call-put symmetry", f"tree identity holds to {BTM_RTOL} relative",
                                    row["symmetry_rel"] <= BTM_RTOL, row["symmetry_rel"], engine="btm"))
    if scn.expect_counterexample:
        report.add(Verdict.flag("counterexample reproduced",
                                "dropping the ratio hypothesis yields a time-monotonicity violation",
                                found_counter))
    return report
