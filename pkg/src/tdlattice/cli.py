"""Command-line front end.

Exit codes: 0 ok, 2 configuration error, 3 numerical precondition failure
(branching, stability, size cap), 4 a check failed although its hypotheses hold.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import io as tio
from .analysis import (
    StudyReport,
    btm_eds_gap_study,
    convergence_study,
    monotonicity_audit,
    run_scenario,
    scenario_suite,
    symmetry_study,
)
from .analysis.audit import call_time_slack
from .btm import extract_boundary_btm, price_btm, symmetry_transform
from .coefficients import check_conditions
from .config import RunConfig, load_config
from .eds import extract_boundary_eds, solve_eds
from .errors import ConfigError, DomainError, ModelError, ResourceError, StabilityError
from .partition import build_partition

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4


def _solve(cfg: RunConfig, engine: str, keep_surface=False):
    spec, cs = cfg.option, cfg.coefficients
    if engine == "btm":
        return price_btm(spec, cs, math.exp(cfg.dx), keep_surface=keep_surface,
                         snap=cfg.snap_last_step, max_steps=cfg.max_steps)
    return solve_eds(spec, cs, cfg.dx, cfg.alpha, cfg.half_width_k, keep_surface=keep_surface,
                     snap=cfg.snap_last_step, max_steps=cfg.max_steps)


def _emit(out_dir, name, text, stdout):
    if out_dir is None:
        stdout.write(text)
    else:
        tio.write_text(Path(out_dir) / name, text)


def cmd_price(cfg: RunConfig, stdout) -> int:
    results = []
    for engine in cfg.engines:
        sol = _solve(cfg, engine)
        cond = check_conditions(cfg.coefficients, sol.partition)
        meta = sol.metadata()
        if engine == "eds":
            delta = sol.delta
        else:
            delta = None
        stdout.write(
            f"{engine}: price {sol.root!r}  N {sol.N}  gap {sol.gap!r}"
            + (f"  delta {delta}" if delta is not None else "")
            + f"  put_monotone_ok {cond.put_monotone_ok}  call_monotone_ok {cond.call_monotone_ok}"
            + f"  q_positive {cond.q_positive}  branch_ok {cond.branch_ok}\n"
        )
        results.append({"engine": engine, "price": sol.root, "metadata": meta,
                        "conditions": {k: v for k, v in cond.to_dict().items() if k != "violations"}})
    if cfg.out_dir is not None:
        tio.write_text(Path(cfg.out_dir) / "price.json",
                       tio.json_text({"config": cfg.to_dict(), "results": results}))
    return EXIT_OK


def cmd_boundary(cfg: RunConfig, stdout) -> int:
    if cfg.style != "american":
        raise ConfigError("boundary output needs an american option", "option.style")
    for engine in cfg.engines:
        sol = _solve(cfg, engine)
        b = extract_boundary_btm(sol) if engine == "btm" else extract_boundary_eds(sol)
        _emit(cfg.out_dir, f"boundary_{engine}.csv", tio.boundary_csv(b), stdout)
    return EXIT_OK


def cmd_surface(cfg: RunConfig, stdout) -> int:
    for engine in cfg.engines:
        sol = _solve(cfg, engine, keep_surface=True)
        text = tio.lattice_csv(sol) if engine == "btm" else tio.surface_csv(sol)
        name = "lattice_btm.csv" if engine == "btm" else "surface_eds.csv"
        _emit(cfg.out_dir, name, text, stdout)
        if cfg.out_dir is not None:
            out = Path(cfg.out_dir)
            tio.write_text(out / f"partition_{engine}.csv", tio.partition_csv(sol.partition))
            tio.write_text(out / f"metadata_{engine}.json", tio.json_text(sol.metadata()))
    return EXIT_OK


def _audit_report(cfg: RunConfig) -> StudyReport:
    spec, cs = cfg.option, cfg.coefficients
    report = StudyReport(scenario="audit", params=cfg.to_dict())
    for engine in cfg.engines:
        sol = _solve(cfg, engine, keep_surface=True)
        cond = check_conditions(cs, sol.partition)
        slack = 0.0
        if engine == "eds" and spec.kind == "call" and spec.american and cond.call_monotone_ok:
            slack = call_time_slack(spec, cs, cfg.dx, cfg.alpha, cfg.half_width_k)
        report.add(*monotonicity_audit(sol, cond, time_slack=slack))
        report.extra[f"{engine}_price"] = sol.root
    return report


def _study_reports(cfg: RunConfig) -> list:
    spec, cs = cfg.option, cfg.coefficients
    if cfg.study == "audit":
        return [_audit_report(cfg)]
    if cfg.study == "gap":
        return [btm_eds_gap_study(spec, cs, cfg.dx_list)]
    if cfg.study == "convergence":
        return [convergence_study(spec, cs, cfg.dx_list, engine=e, alpha=cfg.alpha if e == "eds" else 1.0,
                                  half_width_k=cfg.half_width_k, reference_dx=cfg.reference_dx)
                for e in cfg.engines]
    if cfg.study == "symmetry":
        if spec.kind == "put":
            spec, cs = symmetry_transform(spec, cs)
        dxs = cfg.dx_list or [cfg.dx]
        return [symmetry_study(spec, cs, dxs, alpha=cfg.alpha, half_width_k=cfg.half_width_k,
                               engines=cfg.engines)]
    return [run_scenario(s, cfg.dx, cfg.engines, cfg.alpha, cfg.half_width_k) for s in scenario_suite()]


def cmd_study(cfg: RunConfig, stdout) -> int:
    reports = _study_reports(cfg)
    for rep in reports:
        stdout.write(rep.to_text() + "\n")
    if cfg.out_dir is not None:
        out = Path(cfg.out_dir)
        tio.write_text(out / "report.json", tio.json_text({
            "study": cfg.study,
            "ok": all(r.ok for r in reports),
            "reports": [r.to_dict() for r in reports],
        }))
        for i, rep in enumerate(reports):
            if rep.table:
                suffix = "" if len(reports) == 1 else f"_{i}"
                tio.write_text(out / f"table{suffix}.csv", tio.table_csv(rep.table))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_CHECK


def cmd_verify(cfg: RunConfig, stdout) -> int:
    cs = cfg.coefficients
    p = build_partition(cs, cfg.T, cfg.dx, cfg.alpha, snap=cfg.snap_last_step, max_steps=cfg.max_steps)
    report = check_conditions(cs, p, math.exp(cfg.dx))
    doc = {"partition": p.metadata(), "conditions": report.to_dict()}
    text = tio.json_text(doc)
    stdout.write(text)
    if cfg.out_dir is not None:
        tio.write_text(Path(cfg.out_dir) / "conditions.json", text)
        tio.write_text(Path(cfg.out_dir) / "partition.csv", tio.partition_csv(p))
    return EXIT_OK


COMMANDS = {
    "price": cmd_price,
    "boundary": cmd_boundary,
    "surface": cmd_surface,
    "study": cmd_study,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdlattice", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or name).strip().splitlines()[0] if fn.__doc__ else name)
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--engine", choices=("btm", "eds", "both"), help="override the configured engine")
        p.add_argument("--out", help="directory for output files (stdout if omitted)")
        p.add_argument("--snap-last-step", action="store_true",
                       help="append a shortened final step so the last node is exactly T")
        p.add_argument("--echo-config", action="store_true",
                       help="print the parsed configuration as JSON and exit")
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.engine:
            cfg.engine = args.engine
        if args.out:
            cfg.out_dir = args.out
        if args.snap_last_step:
            cfg.snap_last_step = True
        if args.echo_config:
            stdout.write(cfg.dumps())
            return EXIT_OK
        return COMMANDS[args.command](cfg, stdout)
    except ConfigError as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except DomainError as exc:
        stderr.write(f"invalid input: {exc}\n")
        return EXIT_CONFIG
    except (ModelError, StabilityError) as exc:
        stderr.write(f"numerical precondition failed at step {exc.step}: {exc}\n")
        return EXIT_NUMERIC
    except ResourceError as exc:
        stderr.write(f"resource limit: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
