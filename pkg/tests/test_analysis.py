import json
import math

import numpy as np
import pytest

from oracles import black_scholes
from tdlattice import CoefficientCurve, CoefficientSet, DomainError, OptionSpec, price_btm, solve_eds
from tdlattice.analysis import (
    StudyReport,
    Verdict,
    averaged_black_scholes,
    btm_eds_gap_study,
    convergence_study,
    get_scenario,
    loglog_slope,
    monotonicity_audit,
    richardson,
    run_scenario,
    scenario_suite,
    symmetry_study,
)
from tdlattice.analysis.audit import bound_violation, time_violation
from tdlattice.analysis.convergence import check_geometric
from tdlattice.analysis.report import FOUND, NOT_FOUND, PASS, SKIPPED

flat = CoefficientSet.constant(0.1, 0.0, 1.0)


def test_verdict_statuses():
    assert Verdict.inequality("c", "x", 0.5, (1, 2), 1.0).status == PASS
    v = Verdict.inequality("c", "x", 2.0, (1, 2), 1.0)
    assert not v.passed and v.location == (1, 2)
    found = Verdict.inequality("c", "x", 2.0, (1, 2), 1.0, hypotheses=False)
    assert found.passed and found.status == FOUND
    assert Verdict.inequality("c", "x", 0.0, None, 1.0, hypotheses=False).status == NOT_FOUND
    assert Verdict.skipped("c", "x", "why").status == SKIPPED


def test_report_json_is_strict():
    rep = StudyReport("s", params={"a": math.inf}, extra={"b": np.float64(math.nan)})
    rep.add(Verdict.flag("c", "x", True, worst=-math.inf))
    text = json.dumps(rep.to_dict(), allow_nan=False)
    assert json.loads(text)["params"]["a"] is None
    assert "== s (ok)" in rep.to_text()


def test_loglog_slope_recovers_power():
    xs = [0.1, 0.05, 0.025, 0.0125]
    assert loglog_slope(xs, [3 * x ** 2 for x in xs]) == pytest.approx(2.0)


def test_geometric_ladder_checks():
    assert check_geometric([0.1, 0.05, 0.025]) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        check_geometric([0.1, 0.05])
    with pytest.raises(DomainError):
        check_geometric([0.1, 0.05, 0.03])


def test_richardson_on_exact_sequence():
    vals = [1 + 0.1 ** 2, 1 + 0.05 ** 2, 1 + 0.025 ** 2]
    est, p = richardson(vals, 2.0)
    assert p == pytest.approx(2.0) and est == pytest.approx(1.0, abs=1e-14)


def test_averaged_closed_form_reduces_to_constant_case():
    spec = OptionSpec("put", "european", 1.1, 1.0, 2.0)
    cs = CoefficientSet.constant(0.05, 0.01, 0.4)
    assert averaged_black_scholes(spec, cs, 2.0) == pytest.approx(
        black_scholes("put", 1.0, 1.1, 2.0, 0.05, 0.01, 0.4), rel=1e-14)


def test_averaged_closed_form_uses_mean_variance():
    spec = OptionSpec("call", "european", 1.0, 1.0, 1.0)
    cs = CoefficientSet(CoefficientCurve.from_knots([(0.0, 0.2), (0.5, 0.0)]), CoefficientCurve.constant(0.0),
                        CoefficientCurve.from_knots([(0.0, 0.2), (0.5, 0.4)]))
    sbar = math.sqrt((0.04 * 0.5 + 0.16 * 0.5))
    assert averaged_black_scholes(spec, cs, 1.0) == pytest.approx(
        black_scholes("call", 1.0, 1.0, 1.0, 0.1, 0.0, sbar), rel=1e-14)


def test_fig12_audit_all_pass():
    sol = price_btm(OptionSpec("put", "american", 1.0, 1.0, 1.0), flat, math.exp(0.1))
    verdicts = monotonicity_audit(sol)
    assert all(v.status == PASS for v in verdicts), [v.line() for v in verdicts]


def test_time_violation_on_european_call_with_yield_is_positive():
    # without early exercise a deep in-the-money call with q > 0 can gain value with time
    cs = CoefficientSet.constant(0.0, 0.3, 1.0)
    sol = price_btm(OptionSpec("call", "european", 1.0, 1.0, 1.0), cs, math.exp(0.1))
    worst, loc = time_violation(sol)
    assert worst > 0 and loc is not None


def test_bounds_on_grid():
    sol = solve_eds(OptionSpec("put", "american", 1.0, 1.0, 1.0), flat, 0.1, keep_surface=True)
    low, high, _, _ = bound_violation(sol)
    assert low <= 0 and high <= 0


def test_scenarios_are_named():
    names = [s.name for s in scenario_suite()]
    assert names == ["FIG12", "FIG34", "SYM", "SYM-SWAP", "CALL-Q0"]
    assert get_scenario("fig12").name == "FIG12"
    with pytest.raises(KeyError):
        get_scenario("nope")


def test_fig34_reports_counterexample():
    rep = run_scenario(get_scenario("FIG34"), engines=("btm",))
    assert rep.ok
    v = rep.verdict("put time monotonicity", "btm")
    assert v.status == FOUND and v.worst > 0
    assert rep.verdict("counterexample reproduced").passed


def test_gap_study_needs_two_levels():
    spec = OptionSpec("put", "american", 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        btm_eds_gap_study(spec, flat, [0.1])


def test_gap_study_small():
    spec = OptionSpec("put", "american", 1.0, 1.0, 0.5)
    rep = btm_eds_gap_study(spec, flat, [0.1, 0.05])
    assert rep.ok
    assert rep.table[0]["sup_node_gap"] > rep.table[1]["sup_node_gap"]


def test_convergence_european_matches_closed_form():
    spec = OptionSpec("put", "european", 1.0, 1.0, 1.0)
    cs = CoefficientSet.constant(0.1, 0.0, 0.4)
    rep = convergence_study(spec, cs, [0.1, 0.05, 0.025], engine="btm")
    assert rep.verdict("closed form").passed


def test_symmetry_study_small():
    spec = OptionSpec("call", "american", 1.0, 1.0, 1.0)
    cs = CoefficientSet.constant(0.1, 0.2, 1.0)
    rep = symmetry_study(spec, cs, [0.1, 0.05])
    assert rep.ok, rep.to_text()
    rep = symmetry_study(spec, cs, [0.1, 0.05], alpha=0.5, engines=("eds",))
    assert rep.verdict("grid symmetry residual").status == SKIPPED
