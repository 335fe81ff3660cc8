"""Experiment harness: audits, refinement studies and canonical scenarios."""

from .audit import call_time_slack, monotonicity_audit
from .convergence import averaged_black_scholes, convergence_study, richardson
from .gap import btm_eds_gap_study, loglog_slope, matched_gap
from .report import StudyReport, Verdict
from .scenarios import Scenario, get_scenario, run_scenario, scenario_suite
from .symmetry import btm_symmetry, symmetry_study

__all__ = [
    "StudyReport",
    "Verdict",
    "Scenario",
    "averaged_black_scholes",
    "btm_eds_gap_study",
    "btm_symmetry",
    "call_time_slack",
    "convergence_study",
    "get_scenario",
    "loglog_slope",
    "matched_gap",
    "monotonicity_audit",
    "richardson",
    "run_scenario",
    "scenario_suite",
    "symmetry_study",
]
