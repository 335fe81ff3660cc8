"""Volatility-adapted time partition.

Every step satisfies ``sigma_n**2 * dt_n == alpha * dx**2`` so that the
log-price moves by exactly one grid spacing per step whatever sigma(t) does.
With ``alpha = 1`` and ``dx = ln u`` this is the recombining binomial tree.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .coefficients import CoefficientSet, eval_coefficients
from .errors import DomainError, ResourceError

DEFAULT_MAX_STEPS = 10_000_000

# Relative tolerance for deciding that an accumulated node sits on the maturity.
MATURITY_RTOL = 1e-12


class Step(NamedTuple):
    dt: float
    sigma: float
    r: float
    q: float
    rho: float
    eta: float
    alpha: float


@dataclass(frozen=True, eq=False)
class TimePartition:
    T: float
    dx: float
    alpha: float
    nodes: np.ndarray
    dt: np.ndarray
    sigma: np.ndarray
    r: np.ndarray
    q: np.ndarray
    alpha_n: np.ndarray
    next_dt: float
    snapped: bool = False

    @property
    def N(self) -> int:
        return len(self.dt)

    @property
    def rho(self) -> np.ndarray:
        return 1.0 + self.r * self.dt

    @property
    def eta(self) -> np.ndarray:
        return 1.0 + self.q * self.dt

    @property
    def gap(self) -> float:
        return self.T - float(self.nodes[-1])

    def step(self, n: int) -> Step:
        dt, r, q = float(self.dt[n]), float(self.r[n]), float(self.q[n])
        return Step(dt, float(self.sigma[n]), r, q, 1.0 + r * dt, 1.0 + q * dt, float(self.alpha_n[n]))

    @property
    def steps(self) -> list[Step]:
        return [self.step(n) for n in range(self.N)]

    def rows(self):
        """Yield ``(n, t_n, dt_n, sigma_n, r_n, q_n, rho_n, eta_n)`` for the CSV dump."""
        rho, eta = self.rho, self.eta
        for n in range(self.N):
            yield (n, float(self.nodes[n]), float(self.dt[n]), float(self.sigma[n]),
                   float(self.r[n]), float(self.q[n]), float(rho[n]), float(eta[n]))

    def metadata(self) -> dict:
        return {
            "T": self.T,
            "dx": self.dx,
            "alpha": self.alpha,
            "N": self.N,
            "t_N": float(self.nodes[-1]),
            "gap": self.gap,
            "snapped": self.snapped,
        }


class _Accumulator:
    """Neumaier compensated running sum; keeps node times within an ulp or two of exact."""

    def __init__(self):
        self.s = 0.0
        self.c = 0.0

    def add(self, x: float) -> float:
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t
        return self.s + self.c

    def reset(self, value: float):
        self.s, self.c = value, 0.0


def build_partition(
    cs: CoefficientSet,
    T: float,
    dx: float,
    alpha: float = 1.0,
    *,
    snap: bool = False,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> TimePartition:
    """Construct t_0 = 0 < t_1 < ... < t_N <= T with dt_n = alpha*dx^2/sigma(t_n)^2.

    The last node stops short of T by less than one step; that gap is kept
    unless ``snap`` is set, in which case one shortened final step ending
    exactly at T is appended (its effective alpha is below ``alpha``).
    """
    if not dx > 0:
        raise DomainError(f"dx must be positive, got {dx!r}")
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not T > 0:
        raise DomainError(f"T must be positive, got {T!r}")
    if T > cs.horizon * (1 + MATURITY_RTOL):
        raise DomainError(f"T = {T!r} exceeds the coefficient horizon {cs.horizon!r}")

    c = alpha * dx * dx
    bound = T * cs.sigma_hi ** 2 / c
    if bound > max_steps:
        raise ResourceError(
            f"partition would need up to {bound:.3g} steps (> cap {max_steps}) "
            f"for dx={dx!r}, sigma_lo={cs.sigma_lo!r}, sigma_hi={cs.sigma_hi!r}, T={T!r}"
        )

    tol = MATURITY_RTOL * max(1.0, T)
    nodes = [0.0]
    dts, sigmas, rs, qs = [], [], [], []
    acc = _Accumulator()
    t = 0.0
    while True:
        r, q, sig = eval_coefficients(cs, t)
        dt = c / (sig * sig)
        t_next = acc.add(dt)
        if t_next > T + tol:
            break
        if abs(t_next - T) <= tol:
            t_next = T
            acc.reset(T)
        dts.append(dt)
        sigmas.append(sig)
        rs.append(r)
        qs.append(q)
        nodes.append(t_next)
        t = t_next
        if len(dts) > max_steps:
            raise ResourceError(f"partition exceeded the cap of {max_steps} steps")

    alpha_n = [alpha] * len(dts)
    snapped = False
    if snap and T - t > tol:
        # t is t_N; (r, q, sig) already hold the coefficients there
        dt = T - t
        dts.append(dt)
        sigmas.append(sig)
        rs.append(r)
        qs.append(q)
        alpha_n.append(sig * sig * dt / (dx * dx))
        nodes.append(T)
        snapped = True
        next_dt = c / (sig * sig)
    else:
        next_dt = dt

    return TimePartition(
        T=float(T),
        dx=float(dx),
        alpha=float(alpha),
        nodes=np.array(nodes),
        dt=np.array(dts),
        sigma=np.array(sigmas),
        r=np.array(rs),
        q=np.array(qs),
        alpha_n=np.array(alpha_n),
        next_dt=float(next_dt),
        snapped=snapped,
    )


def interpolated_dt(p: TimePartition, t: float) -> float:
    """Step length seen from an arbitrary time, blending dt_n and dt_{n+1}.

    For t in [t_n, t_{n+1}) the result is the convex combination weighted by
    the position of t inside the interval, which guarantees
    ``t + interpolated_dt(p, t)`` lands in [t_{n+1}, t_{n+2}). For n = N-1 the
    step after t_N is alpha*dx^2/sigma(t_N)^2.
    """
    nodes = p.nodes
    if not (nodes[0] <= t < nodes[-1]):
        raise DomainError(f"t = {t!r} outside [{nodes[0]!r}, {nodes[-1]!r})")
    n = bisect.bisect_right(nodes, t) - 1
    t0, t1 = float(nodes[n]), float(nodes[n + 1])
    dt_n = float(p.dt[n])
    dt_next = float(p.dt[n + 1]) if n + 1 < p.N else p.next_dt
    w = (t - t0) / (t1 - t0)
    return w * dt_next + (1.0 - w) * dt_n
