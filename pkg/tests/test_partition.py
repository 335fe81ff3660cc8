import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import partition_by_hand
from tdlattice import CoefficientCurve, CoefficientSet, DomainError, ResourceError, build_partition, interpolated_dt


def sigma_set(times, values, interp="step", horizon=math.inf):
    return CoefficientSet(
        CoefficientCurve.constant(0.05),
        CoefficientCurve.constant(0.0),
        CoefficientCurve(tuple(times), tuple(values), interp),
        horizon,
    )


stepped = sigma_set((0.0, 0.02), (1.0, 2.0))


def test_uniform_steps_for_constant_sigma():
    p = build_partition(CoefficientSet.constant(0.1, 0.0, 1.0), 0.05, 0.1)
    assert p.N == 5
    assert np.allclose(p.dt, 0.01, rtol=0, atol=1e-17)
    assert p.gap == 0.0
    assert p.nodes[-1] == 0.05


def test_sigma_jump_matches_rational_recursion():
    p = build_partition(stepped, 0.05, 0.1)
    exact = partition_by_hand(lambda t: 1 if t < Fraction(2, 100) else 2, Fraction(5, 100), Fraction(1, 10))
    assert p.N == len(exact) - 1 == 14
    assert np.allclose(p.nodes, [float(x) for x in exact], rtol=0, atol=1e-15)
    assert p.dt[:2] == pytest.approx([0.01, 0.01])
    assert np.allclose(p.dt[2:], 0.0025)


def test_step_and_count_bounds():
    cs = sigma_set((0.0, 1.0), (0.5, 2.0), "linear")
    p = build_partition(cs, 1.0, 0.1)
    assert (cs.sigma_lo, cs.sigma_hi) == (0.5, 2.0)
    assert np.all(p.dt >= 0.0025 * (1 - 1e-12)) and np.all(p.dt <= 0.04 * (1 + 1e-12))
    assert 24 < p.N <= 400


def test_interpolated_dt_examples():
    p = build_partition(stepped, 0.05, 0.1)
    assert interpolated_dt(p, float(p.nodes[3])) == p.dt[3]
    assert interpolated_dt(p, 0.015) == pytest.approx(0.00625, rel=1e-12)
    flat = build_partition(CoefficientSet.constant(0.1, 0.0, 1.0), 0.05, 0.1)
    for t in np.linspace(0.0, 0.0499, 17):
        assert interpolated_dt(flat, t) == pytest.approx(0.01, rel=1e-12)
    with pytest.raises(DomainError):
        interpolated_dt(p, 0.06)
    with pytest.raises(DomainError):
        interpolated_dt(p, -0.001)


def test_interpolated_dt_uses_sigma_at_last_node():
    p = build_partition(stepped, 0.05, 0.1)
    t = 0.5 * (p.nodes[-2] + p.nodes[-1])
    assert interpolated_dt(p, t) == pytest.approx(0.0025, rel=1e-12)
    assert p.next_dt == pytest.approx(0.0025)


def test_cap_raises_resource_error():
    cs = CoefficientSet.constant(0.0, 0.0, 1.0)
    with pytest.raises(ResourceError, match="dx=0.0001"):
        build_partition(cs, 1.0, 1e-4, max_steps=1000)


@pytest.mark.parametrize("kwargs", [dict(dx=0.0), dict(alpha=1.5), dict(alpha=0.0), dict(T=0.0)])
def test_bad_arguments(kwargs):
    args = dict(T=1.0, dx=0.1, alpha=1.0)
    args.update(kwargs)
    with pytest.raises(DomainError):
        build_partition(CoefficientSet.constant(0.1, 0.0, 1.0), args["T"], args["dx"], args["alpha"])


def test_snap_lands_on_maturity():
    cs = CoefficientSet.constant(0.1, 0.0, 1.0)
    p = build_partition(cs, 0.055, 0.1)
    assert p.N == 5 and p.gap == pytest.approx(0.005)
    s = build_partition(cs, 0.055, 0.1, snap=True)
    assert s.N == 6 and s.gap == 0.0 and s.snapped
    assert s.alpha_n[-1] == pytest.approx(0.5)
    assert np.all(s.alpha_n[:-1] == 1.0)


def test_gap_shrinks_with_dx():
    cs = sigma_set((0.0, 0.3), (0.7, 1.3))
    for dx in (0.2, 0.1, 0.05, 0.025, 0.0125):
        p = build_partition(cs, 1.0, dx)
        assert 0.0 <= p.gap < dx * dx / cs.sigma_lo ** 2


def step_sets():
    knot_t = st.lists(st.floats(0.01, 1.9), min_size=0, max_size=3, unique=True).map(sorted)
    return st.builds(
        lambda ts, vals, interp: sigma_set((0.0, *ts), vals[: len(ts) + 1], interp),
        knot_t,
        st.lists(st.floats(0.2, 1.5), min_size=4, max_size=4),
        st.sampled_from(["step", "linear"]),
    )


@settings(max_examples=60, deadline=None)
@given(cs=step_sets(), dx=st.floats(0.03, 0.3), alpha=st.floats(0.1, 1.0), T=st.floats(0.1, 2.0))
def test_partition_invariants(cs, dx, alpha, T):
    p = build_partition(cs, T, dx, alpha)
    c = alpha * dx * dx
    s2 = p.sigma * p.sigma
    assert np.all(np.abs(s2 * p.dt - c) <= np.spacing(c))
    assert np.all(np.diff(p.nodes) > 0) and p.nodes[0] == 0.0
    assert p.nodes[-1] <= T < p.nodes[-1] + p.next_dt
    assert np.all(p.dt >= c / cs.sigma_hi ** 2 * (1 - 1e-15))
    assert np.all(p.dt <= c / cs.sigma_lo ** 2 * (1 + 1e-15))
    assert T * cs.sigma_lo ** 2 / c - 1 < p.N <= T * cs.sigma_hi ** 2 / c * (1 + 1e-12)
    assert np.all(p.rho >= 1.0) and np.all(p.eta >= 1.0)


@settings(max_examples=60, deadline=None)
@given(cs=step_sets(), dx=st.floats(0.03, 0.3), frac=st.floats(0.0, 0.999))
def test_interpolated_dt_lands_in_next_interval(cs, dx, frac):
    p = build_partition(cs, 2.0, dx)
    if p.N < 2:
        return
    n = min(int(frac * (p.N - 1)), p.N - 2)
    t = p.nodes[n] + frac * (p.nodes[n + 1] - p.nodes[n])
    t = min(t, np.nextafter(p.nodes[n + 1], 0))
    h = interpolated_dt(p, t)
    assert p.nodes[n + 1] * (1 - 1e-14) <= t + h < p.nodes[n + 2] * (1 + 1e-14)
    ratio = h / p.dt[n]
    lo, hi = sorted((1.0, p.dt[n + 1] / p.dt[n]))
    assert lo * (1 - 1e-12) <= ratio <= hi * (1 + 1e-12)


def test_interpolated_ratio_tends_to_one_for_continuous_sigma():
    cs = sigma_set((0.0, 1.0), (0.5, 1.5), "linear")
    worst = []
    for dx in (0.1, 0.05, 0.025):
        p = build_partition(cs, 1.0, dx)
        worst.append(np.max(np.abs(p.dt[1:] / p.dt[:-1] - 1)))
    assert worst[0] > worst[1] > worst[2]
