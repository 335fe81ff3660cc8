"""Run configuration: a single JSON document describing contract, curves and numerics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .coefficients import CoefficientCurve, CoefficientSet
from .contract import KINDS, STYLES, OptionSpec
from .errors import ConfigError, DomainError
from .partition import DEFAULT_MAX_STEPS

ENGINES = ("btm", "eds", "both")
STUDIES = ("audit", "gap", "convergence", "symmetry", "suite")


@dataclass
class RunConfig:
    kind: str = "put"
    style: str = "american"
    S0: float = 1.0
    E: float = 1.0
    T: float = 1.0
    r: CoefficientCurve = field(default_factory=lambda: CoefficientCurve.constant(0.0))
    q: CoefficientCurve = field(default_factory=lambda: CoefficientCurve.constant(0.0))
    sigma: CoefficientCurve = field(default_factory=lambda: CoefficientCurve.constant(1.0))
    engine: str = "btm"
    dx: float = 0.1
    alpha: float = 1.0
    half_width_k: float = 6.0
    snap_last_step: bool = False
    max_steps: int = DEFAULT_MAX_STEPS
    dx_list: list = field(default_factory=list)
    reference_dx: float | None = None
    study: str = "audit"
    out_dir: str | None = None

    @property
    def option(self) -> OptionSpec:
        return OptionSpec(self.kind, self.style, E=self.E, S0=self.S0, T=self.T)

    @property
    def coefficients(self) -> CoefficientSet:
        return CoefficientSet(self.r, self.q, self.sigma, self.T)

    @property
    def engines(self) -> tuple:
        return ("btm", "eds") if self.engine == "both" else (self.engine,)

    def to_dict(self) -> dict:
        return {
            "option": {"kind": self.kind, "style": self.style, "S0": self.S0, "E": self.E, "T": self.T},
            "coefficients": {"r": self.r.to_dict(), "q": self.q.to_dict(), "sigma": self.sigma.to_dict()},
            "engine": self.engine,
            "numerics": {
                "dx": self.dx,
                "alpha": self.alpha,
                "half_width_k": self.half_width_k,
                "snap_last_step": self.snap_last_step,
                "max_steps": self.max_steps,
                "dx_list": list(self.dx_list),
                "reference_dx": self.reference_dx,
            },
            "study": self.study,
            "output": {"dir": self.out_dir},
        }

    @classmethod
    def from_dict(cls, doc) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("top level must be a JSON object")
        known = {"option", "coefficients", "engine", "numerics", "study", "output", "scenario"}
        for k in doc:
            if k not in known:
                raise ConfigError(f"unknown key (expected one of {sorted(known)})", k)
        cfg = cls()
        if "scenario" in doc:
            _apply_scenario(cfg, doc["scenario"])

        opt = _section(doc, "option")
        cfg.kind = _choice(opt, "kind", KINDS, "option", cfg.kind)
        cfg.style = _choice(opt, "style", STYLES, "option", cfg.style)
        cfg.S0 = _number(opt, "S0", "option", cfg.S0)
        cfg.E = _number(opt, "E", "option", cfg.E)
        cfg.T = _number(opt, "T", "option", cfg.T)

        coef = _section(doc, "coefficients")
        for name in ("r", "q", "sigma"):
            if name in coef:
                setattr(cfg, name, _curve(coef[name], f"coefficients.{name}"))

        if "engine" in doc:
            cfg.engine = _choice(doc, "engine", ENGINES, "", cfg.engine)
        num = _section(doc, "numerics")
        if "log_u" in num and "dx" in num:
            raise ConfigError("give dx or log_u, not both", "numerics.log_u")
        cfg.dx = _number(num, "log_u" if "log_u" in num else "dx", "numerics", cfg.dx)
        cfg.alpha = _number(num, "alpha", "numerics", cfg.alpha)
        cfg.half_width_k = _number(num, "half_width_k", "numerics", cfg.half_width_k)
        if "snap_last_step" in num:
            if not isinstance(num["snap_last_step"], bool):
                raise ConfigError("must be true or false", "numerics.snap_last_step")
            cfg.snap_last_step = num["snap_last_step"]
        if "max_steps" in num:
            v = num["max_steps"]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v) or v < 1:
                raise ConfigError("must be a positive integer", "numerics.max_steps")
            cfg.max_steps = int(v)
        if "dx_list" in num:
            v = num["dx_list"]
            if not isinstance(v, list):
                raise ConfigError("must be a list of numbers", "numerics.dx_list")
            cfg.dx_list = [_number({"x": x}, "x", f"numerics.dx_list[{i}]", None) for i, x in enumerate(v)]
        if num.get("reference_dx") is not None:
            cfg.reference_dx = _number(num, "reference_dx", "numerics", None)
        if "study" in doc:
            cfg.study = _choice(doc, "study", STUDIES, "", cfg.study)
        out = _section(doc, "output")
        if out.get("dir") is not None:
            if not isinstance(out["dir"], str):
                raise ConfigError("must be a string", "output.dir")
            cfg.out_dir = out["dir"]
        cfg.validate()
        return cfg

    def validate(self):
        if not self.dx > 0:
            raise ConfigError(f"must be positive, got {self.dx!r}", "numerics.dx")
        if not 0 < self.alpha <= 1:
            raise ConfigError(f"must lie in (0, 1], got {self.alpha!r}", "numerics.alpha")
        if not self.half_width_k >= 4:
            raise ConfigError(f"must be at least 4, got {self.half_width_k!r}", "numerics.half_width_k")
        for i, d in enumerate(self.dx_list):
            if not d > 0:
                raise ConfigError(f"must be positive, got {d!r}", f"numerics.dx_list[{i}]")
        if self.reference_dx is not None and not self.reference_dx > 0:
            raise ConfigError("must be positive", "numerics.reference_dx")
        try:
            self.option
        except DomainError as exc:
            raise ConfigError(str(exc), "option") from None
        try:
            self.coefficients
        except DomainError as exc:
            raise ConfigError(str(exc), "coefficients") from None

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    return parse_config(text)


def parse_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return RunConfig.from_dict(doc)


def _apply_scenario(cfg: RunConfig, name):
    from .analysis.scenarios import get_scenario

    if not isinstance(name, str):
        raise ConfigError("must be a scenario name", "scenario")
    try:
        scn = get_scenario(name)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]), "scenario") from None
    spec = scn.specs[0]
    cfg.kind, cfg.style, cfg.S0, cfg.E, cfg.T = spec.kind, spec.style, spec.S0, spec.E, spec.T
    cfg.r, cfg.q, cfg.sigma = scn.cs.r, scn.cs.q, scn.cs.sigma


def _section(doc, name) -> dict:
    sec = doc.get(name, {})
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        raise ConfigError("must be an object", name)
    return sec


def _where(prefix, key):
    return f"{prefix}.{key}" if prefix else key


def _number(sec, key, prefix, default):
    if key not in sec:
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"must be a finite number, got {v!r}", _where(prefix, key))
    return float(v)


def _choice(sec, key, options, prefix, default):
    if key not in sec:
        return default
    v = sec[key]
    if v not in options:
        raise ConfigError(f"must be one of {list(options)}, got {v!r}", _where(prefix, key))
    return v


def _curve(doc, where) -> CoefficientCurve:
    if isinstance(doc, bool):
        raise ConfigError("must be a number or a knot list", where)
    if isinstance(doc, (int, float)):
        return _build_curve([(0.0, float(doc))], "step", where)
    if not isinstance(doc, dict) or "knots" not in doc:
        raise ConfigError("must be a number or an object with 'knots'", where)
    interp = doc.get("interp", "step")
    knots = doc["knots"]
    if not isinstance(knots, list) or not knots:
        raise ConfigError("must be a non-empty list", f"{where}.knots")
    pairs = []
    for i, k in enumerate(knots):
        kw = f"{where}.knots[{i}]"
        if not isinstance(k, dict) or "t" not in k or "value" not in k:
            raise ConfigError("each knot needs 't' and 'value'", kw)
        pairs.append((_number(k, "t", kw, None), _number(k, "value", kw, None)))
    return _build_curve(pairs, interp, where)


def _build_curve(pairs, interp, where):
    try:
        return CoefficientCurve.from_knots(pairs, interp)
    except DomainError as exc:
        raise ConfigError(str(exc), where) from None
