import io
import json

import pytest

from tdlattice.cli import main
from tdlattice.config import RunConfig, parse_config
from tdlattice.errors import ConfigError


def run(tmp_path, doc, *args):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(doc) if isinstance(doc, dict) else doc)
    out, err = io.StringIO(), io.StringIO()
    code = main([args[0], "--config", str(cfg), *args[1:]], out, err)
    return code, out.getvalue(), err.getvalue()


FIG12 = {
    "option": {"kind": "put", "style": "american", "S0": 1.0, "E": 1.0, "T": 1.0},
    "coefficients": {"r": 0.1, "q": 0.0, "sigma": 1.0},
    "numerics": {"dx": 0.1},
}


def test_price_both_engines(tmp_path):
    code, out, _ = run(tmp_path, FIG12, "price", "--engine", "both")
    assert code == 0
    assert out.startswith("btm: price ") and "\neds: price " in out


def test_price_writes_json(tmp_path):
    code, _, _ = run(tmp_path, FIG12, "price", "--out", str(tmp_path / "o"))
    doc = json.loads((tmp_path / "o" / "price.json").read_text())
    assert code == 0 and doc["results"][0]["engine"] == "btm"
    assert doc["results"][0]["metadata"]["N"] == 100


def test_outputs_are_deterministic(tmp_path):
    for d in ("a", "b"):
        assert run(tmp_path, FIG12, "surface", "--engine", "both", "--out", str(tmp_path / d))[0] == 0
    for name in ("lattice_btm.csv", "surface_eds.csv", "partition_btm.csv", "metadata_eds.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_zero_strike_put_prices_to_zero(tmp_path):
    doc = json.loads(json.dumps(FIG12))
    doc["option"]["E"] = 0.0
    code, out, _ = run(tmp_path, doc, "price")
    assert code == 0 and "price 0.0 " in out


def test_boundary_for_q_zero_call(tmp_path):
    doc = json.loads(json.dumps(FIG12))
    doc["option"]["kind"] = "call"
    code, out, _ = run(tmp_path, doc, "boundary")
    assert code == 0
    assert out.splitlines()[:2] == ["# no boundary (q = 0)", "t,S_boundary"]


def test_boundary_needs_american(tmp_path):
    doc = json.loads(json.dumps(FIG12))
    doc["option"]["style"] = "european"
    code, _, err = run(tmp_path, doc, "boundary")
    assert code == 2 and "option.style" in err


def test_bad_alpha_is_config_error(tmp_path):
    doc = json.loads(json.dumps(FIG12))
    doc["numerics"]["alpha"] = 1.5
    code, _, err = run(tmp_path, doc, "price")
    assert code == 2 and "numerics.alpha" in err


def test_malformed_json_reports_position(tmp_path):
    code, _, err = run(tmp_path, '{"option": {', "price")
    assert code == 2 and "line 1" in err


def test_unknown_key_named(tmp_path):
    code, _, err = run(tmp_path, {"optoin": {}}, "price")
    assert code == 2 and "optoin" in err


def test_one_level_gap_study_is_rejected(tmp_path):
    doc = dict(FIG12, study="gap", numerics={"dx": 0.1, "dx_list": [0.1]})
    code, _, err = run(tmp_path, doc, "study")
    assert code == 2 and "at least 2" in err


def test_branching_failure_exit_code(tmp_path):
    doc = json.loads(json.dumps(FIG12))
    doc["coefficients"]["r"] = {"knots": [{"t": 0, "value": 0.1}, {"t": 0.05, "value": 20.0}]}
    doc["option"]["T"] = 0.1
    code, _, err = run(tmp_path, doc, "price")
    assert code == 3 and "step 5" in err


def test_resource_cap_exit_code(tmp_path):
    doc = json.loads(json.dumps(FIG12))
    doc["numerics"] = {"dx": 0.001, "max_steps": 1000}
    code, _, err = run(tmp_path, doc, "price")
    assert code == 3 and "resource" in err


def test_fig34_study_reports_counterexample(tmp_path):
    code, out, _ = run(tmp_path, {"scenario": "FIG34", "study": "audit"}, "study")
    assert code == 0
    assert "EXPECTED-COUNTEREXAMPLE: FOUND" in out


def test_symmetry_study_from_put_config(tmp_path):
    doc = {"scenario": "SYM", "study": "symmetry", "engine": "both", "numerics": {"dx_list": [0.1, 0.05]}}
    code, out, _ = run(tmp_path, doc, "study", "--out", str(tmp_path / "s"))
    assert code == 0, out
    rep = json.loads((tmp_path / "s" / "report.json").read_text())
    assert rep["ok"] and (tmp_path / "s" / "table.csv").exists()


def test_verify_prints_conditions(tmp_path):
    doc = {"scenario": "FIG34", "numerics": {"dx": 0.1}}
    code, out, _ = run(tmp_path, doc, "verify")
    rep = json.loads(out)
    assert code == 0 and rep["conditions"]["put_monotone_ok"] is False


def test_echo_config_roundtrip(tmp_path):
    doc = json.loads(json.dumps(FIG12))
    doc["coefficients"]["sigma"] = {"interp": "linear", "knots": [{"t": 0, "value": 0.5}, {"t": 1, "value": 1.0}]}
    code, out, _ = run(tmp_path, doc, "price", "--echo-config", "--snap-last-step")
    assert code == 0
    cfg = parse_config(out)
    assert cfg.snap_last_step and cfg.sigma(0.5) == 0.75
    assert parse_config(cfg.dumps()).to_dict() == cfg.to_dict()


def test_log_u_alias():
    cfg = RunConfig.from_dict({"numerics": {"log_u": 0.05}})
    assert cfg.dx == 0.05
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"numerics": {"log_u": 0.05, "dx": 0.05}})


def test_negative_rate_rejected():
    with pytest.raises(ConfigError, match="coefficients"):
        RunConfig.from_dict({"coefficients": {"r": -0.1}})
