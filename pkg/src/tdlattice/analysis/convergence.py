"""Self-convergence under dx refinement, plus a closed-form European anchor."""

from __future__ import annotations

import math

import numpy as np

from ..btm import extract_boundary_btm, price_btm
from ..coefficients import CoefficientSet
from ..contract import OptionSpec
from ..eds import DEFAULT_HALF_WIDTH_K, extract_boundary_eds, near_maturity_bounds, solve_eds
from ..errors import DomainError
from .report import StudyReport, Verdict

GEOMETRIC_RTOL = 1e-9
ORDER_CLIP = (0.5, 4.0)


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def averaged_black_scholes(spec: OptionSpec, cs: CoefficientSet, horizon: float) -> float:
    """European value at t = 0 for payoff paid at ``horizon``, using the exact
    integrals of r, q and sigma^2 over [0, horizon]."""
    R = cs.r.integral(0.0, horizon)
    Q = cs.q.integral(0.0, horizon)
    var = _sigma2_integral(cs, horizon)
    S, E = spec.S0, spec.E
    if E == 0:
        return S * math.exp(-Q) if spec.kind == "call" else 0.0
    vol = math.sqrt(var)
    d1 = (math.log(S / E) + R - Q + 0.5 * var) / vol
    d2 = d1 - vol
    if spec.kind == "call":
        return S * math.exp(-Q) * _norm_cdf(d1) - E * math.exp(-R) * _norm_cdf(d2)
    return E * math.exp(-R) * _norm_cdf(-d2) - S * math.exp(-Q) * _norm_cdf(-d1)


def _sigma2_integral(cs: CoefficientSet, horizon: float) -> float:
    curve = cs.sigma
    if curve.interp == "step":
        cuts = [0.0] + [t for t in curve.times if 0.0 < t < horizon] + [horizon]
        return sum(curve(a) ** 2 * (b - a) for a, b in zip(cuts, cuts[1:]))
    # piecewise linear sigma: Simpson is exact for the quadratic sigma^2 on each piece
    cuts = [0.0] + [t for t in curve.times if 0.0 < t < horizon] + [horizon]
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        fa = curve(a)
        fb = curve._left_limit(b, a)
        fm = 0.5 * (fa + fb)
        total += (b - a) / 6.0 * (fa * fa + 4 * fm * fm + fb * fb)
    return total


def check_geometric(dx_list) -> float:
    """Common ratio of a strictly decreasing geometric dx list; raises otherwise."""
    dx = [float(d) for d in dx_list]
    if len(dx) < 3:
        raise DomainError(f"convergence needs at least 3 dx values, got {len(dx)}")
    ratios = [a / b for a, b in zip(dx, dx[1:])]
    q = ratios[0]
    if not q > 1 or any(abs(r - q) > GEOMETRIC_RTOL * q for r in ratios):
        raise DomainError(f"dx list must decrease geometrically, ratios are {ratios}")
    return q


def richardson(values, ratio: float) -> tuple[float, float]:
    """Extrapolate the last three values; the order is fitted from them and clipped."""
    a, b, c = values[-3:]
    d1, d2 = a - b, b - c
    if d2 == 0 or d1 == 0 or d1 / d2 <= 0:
        return c, math.nan
    p = math.log(abs(d1 / d2)) / math.log(ratio)
    p = min(max(p, ORDER_CLIP[0]), ORDER_CLIP[1])
    return c + (c - b) / (ratio ** p - 1.0), p


def _solve(engine, spec, cs, dx, alpha, half_width_k):
    if engine == "btm":
        sol = price_btm(spec, cs, math.exp(dx), keep_surface=False)
        b = extract_boundary_btm(sol) if spec.american else None
    else:
        sol = solve_eds(spec, cs, dx, alpha, half_width_k)
        b = extract_boundary_eds(sol) if spec.american else None
    return sol, b


def convergence_study(
    spec: OptionSpec,
    cs: CoefficientSet,
    dx_list,
    *,
    engine: str = "eds",
    alpha: float = 1.0,
    half_width_k: float = DEFAULT_HALF_WIDTH_K,
    reference_dx: float | None = None,
    tol_factor: float = 1e-3,
) -> StudyReport:
    """Prices and boundaries across a geometric dx ladder.

    Verdicts: successive price differences and boundary sup-differences
    strictly decrease; the level N-1 boundary node stays in its bracket;
    against a dense reference (if given) the extrapolated price agrees to
    ``tol_factor*E``; a European run matches the averaged closed form.
    """
    ratio = check_geometric(dx_list)
    if engine == "btm" and alpha != 1.0:
        raise DomainError("the tree works on alpha = 1 only")
    scale = spec.E if spec.E > 0 else spec.S0
    table, prices, bounds = [], [], []
    for dx in dx_list:
        sol, b = _solve(engine, spec, cs, dx, alpha, half_width_k)
        row = {"dx": float(dx), "N": sol.N, "gap": sol.gap, "price": sol.root}
        if b is not None and b.exists:
            lo_hi = near_maturity_bounds(spec, cs, dx, alpha, partition=sol.partition)
            x_last = float(b.x[-1])
            row.update({"x_last": x_last, "bracket_lo": lo_hi[0], "bracket_hi": lo_hi[1]})
        if not spec.american:
            exact = averaged_black_scholes(spec, cs, float(sol.partition.nodes[-1]))
            row.update({"closed_form": exact, "closed_form_error": abs(sol.root - exact)})
        table.append(row)
        prices.append(sol.root)
        bounds.append(b)

    price_diffs = [abs(a - b) for a, b in zip(prices, prices[1:])]
    for row, d in zip(table[1:], price_diffs):
        row["price_diff"] = d
    report = StudyReport(
        scenario=f"convergence ({engine})",
        params={"option": spec.to_dict(), "coefficients": cs.to_dict(), "dx_list": list(dx_list),
                "engine": engine, "alpha": alpha},
        table=table,
    )
    report.add(Verdict.flag(
        "price self-convergence", "successive root-price differences strictly decrease",
        all(b < a for a, b in zip(price_diffs, price_diffs[1:])),
        max((b - a for a, b in zip(price_diffs, price_diffs[1:])), default=0.0)))

    if spec.american and all(b is not None and b.exists for b in bounds):
        bdiffs = [a.sup_difference(b) for a, b in zip(bounds, bounds[1:])]
        for row, d in zip(table[1:], bdiffs):
            row["boundary_sup_diff"] = d
        report.add(Verdict.flag(
            "boundary self-convergence", "successive boundary sup-differences strictly decrease",
            all(b < a for a, b in zip(bdiffs, bdiffs[1:])),
            max((b - a for a, b in zip(bdiffs, bdiffs[1:])), default=0.0)))
        outside = [
            max(r["bracket_lo"] - r["x_last"], r["x_last"] - r["bracket_hi"], 0.0) for r in table
        ]
        k = int(np.argmax(outside))
        report.add(Verdict.flag(
            "near-maturity bracket", "boundary at t_(N-1) lies inside its bracket at every level",
            max(outside) <= 1e-12, max(outside), (k, None)))

    extrap, order = richardson(prices, ratio)
    report.extra.update({"extrapolated": extrap, "fitted_order": order, "ratio": ratio})
    if reference_dx is not None:
        ref, _ = _solve(engine, spec, cs, reference_dx, alpha, half_width_k)
        err = abs(extrap - ref.root)
        report.extra.update({"reference_dx": reference_dx, "reference_price": ref.root,
                             "extrapolation_error": err})
        report.add(Verdict.flag("extrapolation", f"extrapolated price within {tol_factor}*E of the dense run",
                                err <= tol_factor * scale, err))
    if not spec.american:
        err = table[-1]["closed_form_error"]
        report.add(Verdict.flag("closed form", f"finest european price within {tol_factor}*E of the closed form",
                                err <= tol_factor * scale, err))
    return report
