"""Explicit difference scheme in log-price on the volatility-adapted partition.

The grid is x_j = j*dx + c with c = ln S0, truncated to |j| <= J where
J = ceil(W/dx). The two cut columns carry the payoff as Dirichlet data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import ExerciseBoundary, boundary_index
from .coefficients import CoefficientSet
from .contract import OptionSpec
from .errors import DomainError, StabilityError
from .partition import DEFAULT_MAX_STEPS, TimePartition, build_partition

DEFAULT_HALF_WIDTH_K = 6.0
MIN_HALF_WIDTH_K = 4.0


def a_coeff(r_n: float, q_n: float, sigma_n: float, dx: float, step: int | None = None) -> float:
    """Up weight a_n = 1/2 + dx/(2 sigma^2) * (r - q - sigma^2/2)."""
    if not sigma_n > 0:
        raise DomainError(f"sigma must be positive, got {sigma_n!r}")
    s2 = sigma_n * sigma_n
    a = 0.5 + dx / (2.0 * s2) * (r_n - q_n - 0.5 * s2)
    if not 0.0 < a < 1.0:
        where = f" at step {step}" if step is not None else ""
        raise StabilityError(
            f"scheme weight a = {a!r} leaves (0, 1){where}; use a smaller dx", step=step
        )
    return a


def a_coeff_swapped(r_n: float, q_n: float, sigma_n: float, dx: float) -> float:
    """The weight a'_n with r and q exchanged."""
    return a_coeff(q_n, r_n, sigma_n, dx)


def a_coeffs(partition: TimePartition) -> np.ndarray:
    s2 = partition.sigma ** 2
    a = 0.5 + partition.dx / (2.0 * s2) * (partition.r - partition.q - 0.5 * s2)
    bad = np.flatnonzero(~((a > 0.0) & (a < 1.0)))
    if len(bad):
        n = int(bad[0])
        raise StabilityError(
            f"scheme weight a = {a[n]!r} leaves (0, 1) at step {n} "
            f"(t = {partition.nodes[n]!r}); use a smaller dx",
            step=n,
        )
    return a


def delta_exponent(alpha: float) -> int:
    """Per-step order of the call-put symmetry defect: 3 on the tree-matched grid, else 2."""
    return 3 if alpha == 1.0 else 2


def step_operator(row, phi, rho, alpha, a, american=True):
    """Apply one backward step to ``row``.

    Interior nodes get ``max{[(1-alpha)U_j + alpha(a U_{j+1} + (1-a) U_{j-1})]/rho, phi_j}``
    (no max when ``american`` is false); the end nodes are reset to ``phi``.
    """
    row = np.asarray(row, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if row.shape != phi.shape or row.ndim != 1 or len(row) < 3:
        raise ValueError(f"row/payoff shape mismatch: {row.shape} vs {phi.shape}")
    out = np.empty_like(row)
    if alpha == 1.0:
        inner = a * row[2:] + (1.0 - a) * row[:-2]
    else:
        inner = (1.0 - alpha) * row[1:-1] + alpha * (a * row[2:] + (1.0 - a) * row[:-2])
    inner = inner / rho
    if american:
        np.maximum(inner, phi[1:-1], out=out[1:-1])
    else:
        out[1:-1] = inner
    out[0] = phi[0]
    out[-1] = phi[-1]
    return out


def truncation_width(spec: OptionSpec, cs: CoefficientSet, half_width_k: float) -> float:
    W = half_width_k * cs.sigma_hi * math.sqrt(spec.T)
    if spec.E > 0:
        W += abs(math.log(spec.E / spec.S0))
    return W


@dataclass(eq=False)
class GridSolution:
    spec: OptionSpec
    partition: TimePartition
    dx: float
    c: float
    alpha: float
    J: int
    a_coeffs: np.ndarray
    root: float
    boundary_index: np.ndarray
    delta: int
    W: float
    half_width_k: float
    no_boundary_reason: str = ""
    rows: list | None = field(default=None, repr=False)
    cs: CoefficientSet | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.partition.N

    @property
    def j_min(self) -> int:
        return -self.J

    @property
    def j_max(self) -> int:
        return self.J

    @property
    def gap(self) -> float:
        return self.partition.gap

    @property
    def price(self) -> float:
        return self.root

    @property
    def j(self) -> np.ndarray:
        return np.arange(-self.J, self.J + 1)

    @property
    def x(self) -> np.ndarray:
        return self.j * self.dx + self.c

    @property
    def S(self) -> np.ndarray:
        return np.exp(self.x)

    @property
    def payoff(self) -> np.ndarray:
        return self.spec.payoff(self.S)

    def row(self, n: int) -> np.ndarray:
        if self.rows is None:
            raise DomainError("surface was not kept; solve with keep_surface=True")
        return self.rows[n]

    def value(self, n: int, j: int) -> float:
        if abs(j) > self.J:
            raise DomainError(f"node j={j} is outside the truncated grid |j| <= {self.J}")
        return float(self.row(n)[j + self.J])

    def surface_rows(self):
        """Yield ``(n, t_n, j, x_j, S_j, U, is_exercise)`` over the stored surface."""
        tol = self.spec.exercise_tol()
        j, x, S, phi = self.j, self.x, self.S, self.payoff
        nodes = self.partition.nodes
        for n in range(self.N + 1):
            U = self.row(n)
            ex = (U - phi <= tol) & (phi > tol) & self.spec.american
            for k in range(len(j)):
                yield (n, float(nodes[n]), int(j[k]), float(x[k]), float(S[k]),
                       float(U[k]), bool(ex[k]))

    def metadata(self) -> dict:
        meta = self.partition.metadata()
        meta.update({
            "engine": "eds",
            "delta": self.delta,
            "W": self.W,
            "half_width_k": self.half_width_k,
            "J": self.J,
            "c": self.c,
            "price": self.root,
        })
        return meta


def solve_eds(
    spec: OptionSpec,
    cs: CoefficientSet,
    dx: float,
    alpha: float = 1.0,
    half_width_k: float = DEFAULT_HALF_WIDTH_K,
    *,
    keep_surface: bool = False,
    snap: bool = False,
    max_steps: int = DEFAULT_MAX_STEPS,
    partition: TimePartition | None = None,
    width: int | None = None,
) -> GridSolution:
    """Backward sweep from t_N to t_0; the price is read at j = 0 (x = ln S0).

    ``width`` overrides the half-width J in nodes, which lets callers put two
    solves on the same grid or cover a whole tree of the same depth.
    """
    if not half_width_k >= MIN_HALF_WIDTH_K:
        raise DomainError(f"half_width_k must be at least {MIN_HALF_WIDTH_K}, got {half_width_k!r}")
    if partition is None:
        partition = build_partition(cs, spec.T, dx, alpha, snap=snap, max_steps=max_steps)
    dx = partition.dx
    a = a_coeffs(partition)
    rho = partition.rho
    alpha_n = partition.alpha_n
    N = partition.N

    W = truncation_width(spec, cs, half_width_k)
    if width is None:
        J = max(int(math.ceil(W / dx)), 1)
    else:
        if width < 1:
            raise DomainError(f"grid half-width must be at least one node, got {width!r}")
        J = int(width)
        W = J * dx
    c = math.log(spec.S0)
    x = np.arange(-J, J + 1) * dx + c
    phi = spec.payoff(np.exp(x))
    american = spec.american
    tol = spec.exercise_tol()

    reason = ""
    track = american
    if american and spec.kind == "call" and not np.any(partition.q > 0):
        reason = "no boundary (q = 0)"
        track = False
    index = np.full(N, np.nan)

    U = phi.copy()
    rows = [None] * (N + 1) if keep_surface else None
    if keep_surface:
        rows[N] = U
    for n in range(N - 1, -1, -1):
        U = step_operator(U, phi, rho[n], alpha_n[n], a[n], american)
        if keep_surface:
            rows[n] = U
        if track:
            jn = boundary_index(U, phi, tol, spec.kind, -J, min_run=2)
            if jn is not None:
                index[n] = jn

    return GridSolution(
        spec=spec,
        partition=partition,
        dx=float(dx),
        c=c,
        alpha=float(partition.alpha),
        J=J,
        a_coeffs=a,
        root=float(U[J]),
        boundary_index=index,
        delta=delta_exponent(partition.alpha),
        W=W,
        half_width_k=float(half_width_k),
        no_boundary_reason=reason,
        rows=rows,
        cs=cs,
    )


def extract_boundary_eds(sol: GridSolution) -> ExerciseBoundary:
    """Boundary x = j_n*dx + c per level, linear in x between levels."""
    times = sol.partition.nodes[:-1]
    if not sol.spec.american:
        raise DomainError("boundary extraction needs an american solution")
    if sol.no_boundary_reason:
        return ExerciseBoundary.none(sol.spec.kind, times, sol.dx, sol.c, sol.no_boundary_reason, "x")
    return ExerciseBoundary(sol.spec.kind, True, times, sol.boundary_index.copy(), sol.dx, sol.c, "x")


def near_maturity_bounds(spec: OptionSpec, cs: CoefficientSet, dx: float, alpha: float = 1.0,
                         partition: TimePartition | None = None):
    """Log-price bracket for the boundary node at level N-1.

    Put: [ln m - 2dx, ln m] with m = min(E, r E/q); call: [ln M, ln M + 2dx]
    with M = max(E, r E/q). Coefficients are those of the last step. Returns
    None for a call with q = 0 on that step (there is no boundary).
    """
    if partition is None:
        partition = build_partition(cs, spec.T, dx, alpha)
    dx = partition.dx
    r, q = float(partition.r[-1]), float(partition.q[-1])
    E = spec.E
    if spec.kind == "put":
        m = E if q == 0 else min(E, r * E / q)
        hi = math.log(m) if m > 0 else -math.inf
        return hi - 2 * dx, hi
    if q == 0:
        return None
    M = max(E, r * E / q)
    lo = math.log(M)
    return lo, lo + 2 * dx


@dataclass
class SymmetryResidual:
    residual: float
    call_price: float
    put_price: float
    homogeneity_error: float
    delta: int
    dx: float
    alpha: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def eds_symmetry_residual(
    spec: OptionSpec,
    cs: CoefficientSet,
    dx: float,
    alpha: float = 1.0,
    half_width_k: float = DEFAULT_HALF_WIDTH_K,
    mu: float = 3.0,
) -> SymmetryResidual:
    """|c(S, E; r, q) - p(E, S; q, r)| at t = 0, plus the relative homogeneity error for scale mu."""
    if spec.kind != "call":
        raise DomainError("symmetry residual is defined for a call spec")
    call = solve_eds(spec, cs, dx, alpha, half_width_k)
    image = OptionSpec("put", spec.style, E=spec.S0, S0=spec.E, T=spec.T)
    put = solve_eds(image, cs.swapped(), dx, alpha, half_width_k)
    scaled = solve_eds(spec.scaled(mu), cs, dx, alpha, half_width_k)
    ref = abs(mu * call.root)
    herr = abs(scaled.root - mu * call.root) / ref if ref > 0 else abs(scaled.root)
    return SymmetryResidual(
        residual=abs(call.root - put.root),
        call_price=call.root,
        put_price=put.root,
        homogeneity_error=herr,
        delta=call.delta,
        dx=float(call.dx),
        alpha=float(alpha),
    )
