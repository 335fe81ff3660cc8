"""Binomial tree pricing on the volatility-adapted partition.

Level n of the lattice holds every integer node j in [-n, n], i.e. both
parities. The nodes with j = n (mod 2) form the recombining tree rooted at
S0; the other parity is the tree rooted at S0*u, which shares the rollback
and is what makes the exercise index j_n well defined on consecutive
integers. Prices at the root only depend on the first parity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import ExerciseBoundary, boundary_index
from .coefficients import CoefficientSet
from .contract import OptionSpec
from .errors import DomainError, ModelError
from .partition import DEFAULT_MAX_STEPS, TimePartition, build_partition


# The rollback runs in extended precision where the platform has it; with
# double weights the systematic rounding in the branch weights compounds
# linearly in N and the call-put identity drifts to ~1e-12 at N = 1e4.
WORK_DTYPE = np.longdouble


def theta(rho_n: float, eta_n: float, u: float, step: int | None = None) -> float:
    """Risk-neutral up weight (rho/eta - d)/(u - d); raises if it leaves (0, 1)."""
    if not u > 1:
        raise DomainError(f"u must exceed 1, got {u!r}")
    if not eta_n > 0:
        raise DomainError(f"eta must be positive, got {eta_n!r}")
    d = 1.0 / u
    th = (rho_n / eta_n - d) / (u - d)
    if not 0.0 < th < 1.0:
        where = f" at step {step}" if step is not None else ""
        raise ModelError(
            f"branching condition d*eta < rho < u*eta fails{where}: theta = {th!r}", step=step
        )
    return th


def theta_dual(rho_n: float, eta_n: float, u: float) -> float:
    """The weight with rho and eta exchanged, (eta/rho - d)/(u - d)."""
    d = 1.0 / u
    return (eta_n / rho_n - d) / (u - d)


def _numerators(partition: TimePartition, u: float):
    # u*rho - eta and u*eta - rho without cancelling the leading ones
    U = WORK_DTYPE(u)
    dt = partition.dt.astype(WORK_DTYPE)
    r = partition.r.astype(WORK_DTYPE)
    q = partition.q.astype(WORK_DTYPE)
    um1 = U - 1
    up = um1 + (U * r - q) * dt
    down = um1 + (U * q - r) * dt
    return U, up, down


def _check_branching(partition: TimePartition, up, down):
    bad = np.flatnonzero(~((up > 0) & (down > 0)))
    if len(bad):
        n = int(bad[0])
        raise ModelError(
            f"branching condition d*eta < rho < u*eta fails at step {n} "
            f"(t = {partition.nodes[n]!r}, rho = {partition.rho[n]!r}, eta = {partition.eta[n]!r})",
            step=n,
        )


def thetas(partition: TimePartition, u: float) -> np.ndarray:
    """theta_n for every step, as (u*rho - eta)/(eta*(u^2 - 1))."""
    U, up, down = _numerators(partition, u)
    _check_branching(partition, up, down)
    eta = partition.eta.astype(WORK_DTYPE)
    return (up / (eta * (U * U - 1))).astype(float)


def branch_weights(partition: TimePartition, u: float):
    """Discounted weights (theta/rho, (1 - theta)/rho) per step, in extended precision.

    Both come from the same two numerators, and exchanging r and q swaps
    them, so the call and put rollbacks use mirror-image expressions.
    """
    U, up, down = _numerators(partition, u)
    _check_branching(partition, up, down)
    rho = partition.rho.astype(WORK_DTYPE)
    eta = partition.eta.astype(WORK_DTYPE)
    D = rho * eta * (U * U - 1)
    return up / D, U * down / D


def rollback_step(next_row, w_up, w_down, payoff_row=None):
    """One backward step: rows shrink by one node at each end.

    ``next_row`` covers j in [-(n+1), n+1]; the result covers [-n, n]. With
    ``payoff_row`` the early-exercise max is applied.
    """
    cont = w_up * next_row[2:] + w_down * next_row[:-2]
    if payoff_row is None:
        return cont
    return np.maximum(cont, payoff_row)


@dataclass(eq=False)
class LatticeSolution:
    spec: OptionSpec
    partition: TimePartition
    u: float
    thetas: np.ndarray
    root: float
    boundary_index: np.ndarray
    no_boundary_reason: str = ""
    rows: list | None = field(default=None, repr=False)
    cs: CoefficientSet | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.partition.N

    @property
    def dx(self) -> float:
        return math.log(self.u)

    @property
    def gap(self) -> float:
        return self.partition.gap

    @property
    def price(self) -> float:
        return self.root

    def _need_rows(self):
        if self.rows is None:
            raise DomainError("surface was not kept; price with keep_surface=True")
        return self.rows

    def row(self, n: int) -> np.ndarray:
        """All nodes of level n, j = -n..n."""
        return self._need_rows()[n]

    def tree_values(self, n: int) -> np.ndarray:
        """Nodes reachable from S0 at level n, j = -n, -n+2, ..., n."""
        return self.row(n)[::2]

    def value(self, n: int, j: int) -> float:
        if abs(j) > n:
            raise DomainError(f"node j={j} is outside level {n}")
        return float(self.row(n)[j + n])

    def S(self, j) -> np.ndarray:
        return self.spec.S0 * np.exp(np.asarray(j, dtype=float) * self.dx)

    def payoff_row(self, n: int) -> np.ndarray:
        return self.spec.payoff(self.S(np.arange(-n, n + 1)))

    def lattice_rows(self):
        """Yield ``(n, t_n, j, S_j, V, is_exercise)`` for every reachable tree node."""
        tol = self.spec.exercise_tol()
        nodes = self.partition.nodes
        for n in range(self.N + 1):
            j = np.arange(-n, n + 1, 2)
            S = self.S(j)
            V = self.tree_values(n)
            phi = self.spec.payoff(S)
            ex = (V - phi <= tol) & (phi > tol) & self.spec.american
            for k in range(len(j)):
                yield n, float(nodes[n]), int(j[k]), float(S[k]), float(V[k]), bool(ex[k])

    def metadata(self) -> dict:
        meta = self.partition.metadata()
        meta.update({"engine": "btm", "u": self.u, "price": self.root})
        return meta


def price_btm(
    spec: OptionSpec,
    cs: CoefficientSet,
    u: float,
    *,
    keep_surface: bool = True,
    snap: bool = False,
    max_steps: int = DEFAULT_MAX_STEPS,
    partition: TimePartition | None = None,
) -> LatticeSolution:
    """Roll the payoff back through the tree built with ln u as the log step."""
    if not u > 1:
        raise DomainError(f"u must exceed 1, got {u!r}")
    dx = math.log(u)
    if partition is None:
        partition = build_partition(cs, spec.T, dx, 1.0, snap=snap, max_steps=max_steps)
    th = thetas(partition, u)
    w_up, w_down = branch_weights(partition, u)
    N = partition.N

    j = np.arange(-N, N + 1)
    payoff = spec.payoff(spec.S0 * np.exp(j * dx))
    work_payoff = payoff.astype(WORK_DTYPE)
    american = spec.american
    tol = spec.exercise_tol()

    reason = ""
    track = american
    if american and spec.kind == "call" and not np.any(partition.q > 0):
        reason = "no boundary (q = 0)"
        track = False
    index = np.full(N, np.nan)

    V = work_payoff.copy()
    rows = [None] * (N + 1) if keep_surface else None
    if keep_surface:
        rows[N] = payoff.copy()
    for n in range(N - 1, -1, -1):
        phi = work_payoff[N - n : N + n + 1]
        V = rollback_step(V, w_up[n], w_down[n], phi if american else None)
        if keep_surface:
            rows[n] = V.astype(float)
        if track:
            jn = boundary_index(V, phi, tol, spec.kind, -n)
            if jn is not None:
                index[n] = jn

    return LatticeSolution(
        spec=spec,
        partition=partition,
        u=float(u),
        thetas=th,
        root=float(V[0]),
        boundary_index=index,
        no_boundary_reason=reason,
        rows=rows,
        cs=cs,
    )


def extract_boundary_btm(sol: LatticeSolution) -> ExerciseBoundary:
    """Exercise boundary S_Delta(t): node levels S0*u^{j_n}, linear in S between levels."""
    times = sol.partition.nodes[:-1]
    c = math.log(sol.spec.S0)
    if not sol.spec.american:
        raise DomainError("boundary extraction needs an american solution")
    if sol.no_boundary_reason:
        return ExerciseBoundary.none(sol.spec.kind, times, sol.dx, c, sol.no_boundary_reason, "S")
    return ExerciseBoundary(sol.spec.kind, True, times, sol.boundary_index.copy(), sol.dx, c, "S")


def symmetry_transform(spec: OptionSpec, cs: CoefficientSet) -> tuple[OptionSpec, CoefficientSet]:
    """Map (call, S, E, r, q) to (put, E, S, q, r) and vice versa."""
    kind = "put" if spec.kind == "call" else "call"
    image = OptionSpec(kind, spec.style, E=spec.S0, S0=spec.E, T=spec.T)
    return image, cs.swapped()
