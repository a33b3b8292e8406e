"""Semi-Lagrangian value iteration ``V <- G(V)`` with local optimisation at every node."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange

from . import _kernels as K
from .controls import AffineControlDynamics, ControlSet, max_timestep, sector_table
from .grid import Grid, ScalarField, VectorField
from .local import RunningCost
from .minimizers import METHODS, MinimizerConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TargetSet:
    """Closed ball (``center``, ``radius``) or box (``lower``, ``upper``) in state space."""

    kind: str = "ball"
    center: tuple[float, ...] = ()
    radius: float = 0.0
    lower: tuple[float, ...] = ()
    upper: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("ball", "box"):
            raise ValueError("target kind must be 'ball' or 'box'")
        if self.kind == "ball" and self.radius < 0:
            raise ValueError("target radius must be nonnegative")

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "ball":
            c = np.zeros(x.shape[1]) if not self.center else np.asarray(self.center, dtype=float)
            return np.linalg.norm(x - c, axis=1) <= self.radius + 1e-12
        lo, hi = np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)
        return np.all((x >= lo - 1e-12) & (x <= hi + 1e-12), axis=1)


@dataclass
class ProblemSpec:
    grid: Grid
    dyn: AffineControlDynamics
    U: ControlSet
    cost: RunningCost
    h: float
    mode: str = "infinite_horizon"
    target: TargetSet | None = None
    minimizer: MinimizerConfig = field(default_factory=MinimizerConfig)
    stop_tol: float | None = None
    max_sweeps: int = 10_000
    norm: str = "sup"
    name: str = ""

    def __post_init__(self):
        if self.mode not in ("infinite_horizon", "minimum_time"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if (self.mode == "minimum_time") != self.cost.minimum_time:
            raise ValueError("minimum_time mode needs the minimum_time running cost and vice versa")
        if self.mode == "minimum_time" and self.target is None:
            raise ValueError("minimum_time mode needs a target set")
        if self.dyn.dim != self.grid.dim or self.dyn.m != self.U.m:
            raise ValueError("dynamics, grid and control set dimensions disagree")
        if self.norm not in ("sup", "l1_mean"):
            raise ValueError("norm must be 'sup' or 'l1_mean'")
        if self.stop_tol is None:
            self.stop_tol = self.grid.k**2 / 5.0
        if self.stop_tol <= 0 or self.h <= 0:
            raise ValueError("need h > 0 and stop_tol > 0")
        hbar = max_timestep(self.dyn, self.U, self.grid)
        if self.h > hbar * (1.0 + 1e-12):
            raise ValueError(f"time step h={self.h:.6g} exceeds the admissible maximum {hbar:.6g}")

    @property
    def beta(self) -> float:
        return self.cost.discount(self.h)

    @property
    def method(self) -> str:
        family = "minimum_time" if self.cost.minimum_time else self.cost.kind
        return self.minimizer.resolve(family, self.U)

    def target_mask(self) -> np.ndarray:
        if self.target is None:
            return np.zeros(self.grid.size, dtype=bool)
        return self.target(self.grid.nodes())


@dataclass
class SolveReport:
    V: ScalarField
    U: VectorField
    sweeps: int
    converged: bool
    residual_history: list[float]
    avg_subiterations: list[float]
    wall_time: float
    unconverged_solves: int = 0


def residual(V_new, V_old, norm: str = "sup") -> float:
    """Sup norm (or mean absolute value) of the nodal difference."""
    a = V_new.values if isinstance(V_new, ScalarField) else np.asarray(V_new)
    b = V_old.values if isinstance(V_old, ScalarField) else np.asarray(V_old)
    d = np.abs(a - b)
    return float(d.max() if norm == "sup" else d.mean())


# ------------------------------------------------------------------ kernels


@njit(cache=True)
def local_minimum(method, vd, vnb, k, g, B, sc, signs, active, lo, hi, qv, av, beta, h, const,
                  ball, radius, params, points, warm, u_out):
    """Minimum of the discrete Hamiltonian over all active sectors of one patch.

    ``vnb[i, 0]``/``vnb[i, 1]`` are the values at ``x + k e_i`` / ``x - k e_i``.
    ``warm`` (sectors x m) is read as the start and overwritten with each sector's
    minimiser.  Returns (value, total inner iterations, unconverged sector count).
    """
    S, d = signs.shape
    m = qv.shape[0]
    grad = np.empty(d)
    lin = np.empty(m)
    out = np.empty(m)
    hist = np.empty(1)
    best = np.inf
    total = 0
    bad = 0
    for s in range(S):
        if not active[s]:
            continue
        gg = 0.0
        for i in range(d):
            side = 0 if signs[s, i] > 0 else 1
            grad[i] = signs[s, i] * (vnb[i, side] - vd) / k
            gg += grad[i] * g[i]
        for j in range(m):
            acc = 0.0
            for i in range(d):
                acc += B[i, j] * grad[i]
            lin[j] = beta * h * acc
        r = beta * (vd + h * gg) + h * sc + const
        val, it, st = K.solve_sector(method, qv, 0.0, av, lin, r, lo[s], hi[s], ball, radius, params,
                                     warm[s], points, out, hist)
        total += it
        if st == K.MAX_ITERS or st == K.NO_POINTS:
            bad += 1
        for j in range(m):
            warm[s, j] = out[j]
        if val < best:
            best = val
            for j in range(m):
                u_out[j] = out[j]
    return best, total, bad


@njit(parallel=True, cache=True)
def _sweep(V, V_new, U_new, warm, iters, unconv, nbr, k, G, Bm, sc, signs, active, lo, hi, qv, av,
           beta, h, const, ball, radius, params, points, method, pinned, keep_warm, warm0):
    N, d = nbr.shape[0], nbr.shape[1]
    m = qv.shape[0]
    for n in prange(N):
        if pinned[n]:
            V_new[n] = 0.0
            iters[n] = 0
            unconv[n] = 0
            for j in range(m):
                U_new[n, j] = 0.0
            continue
        vd = V[n]
        vnb = np.empty((d, 2))
        for i in range(d):
            for side in range(2):
                idx = nbr[n, i, side]
                vnb[i, side] = V[idx] if idx >= 0 else vd
        w = warm[n] if keep_warm else warm0[n].copy()
        u = np.zeros(m)
        val, it, bad = local_minimum(method, vd, vnb, k, G[n], Bm[n], sc[n], signs, active[n], lo[n], hi[n],
                                     qv, av, beta, h, const, ball, radius, params, points, w, u)
        V_new[n] = val
        iters[n] = it
        unconv[n] = bad
        for j in range(m):
            U_new[n, j] = u[j]


# ------------------------------------------------------------------- driver


class Operator:
    """Precomputed node data for applying the discrete Bellman operator ``G``."""

    def __init__(self, spec: ProblemSpec):
        self.spec = spec
        grid, dyn, U = spec.grid, spec.dyn, spec.U
        x = grid.nodes()
        self.G = np.ascontiguousarray(dyn.g(x), dtype=float)
        self.B = np.ascontiguousarray(dyn.B(x), dtype=float)
        table = sector_table(dyn, U, x, self.G, self.B)
        if U.is_ball and np.any(table.active[..., None] & (table.lo < 0) & (table.hi > 0)):
            raise ValueError("ball-constrained problems need every control to act on its own state row")
        self.signs = table.signs.astype(float)
        self.active = table.active
        self.lo = np.ascontiguousarray(table.lo)
        self.hi = np.ascontiguousarray(table.hi)
        self.nbr = grid.neighbor_table()
        self.sc = spec.cost.state_cost(x)
        q, w1, const = spec.cost.coefficients(spec.h)
        self.qv = np.full(U.m, q)
        self.av = np.full(U.m, w1)
        self.const = const
        self.pinned = spec.target_mask() if spec.mode == "minimum_time" else np.zeros(grid.size, dtype=bool)
        self.method = METHODS[spec.method]
        self.params = spec.minimizer.params()
        self.points = np.ascontiguousarray(spec.minimizer.points(U)) if spec.method == "comparison" else np.zeros((1, U.m))
        self.warm0 = self._default_warm()
        self.warm = self.warm0.copy()

    def _default_warm(self) -> np.ndarray:
        U = self.spec.U
        if U.is_ball:
            s = np.where(self.lo >= 0.0, 1.0, -1.0)
            return s * 0.5 * U.radius / np.sqrt(U.m)
        return 0.5 * (self.lo + self.hi)

    def reset(self):
        self.warm = self.warm0.copy()

    def __call__(self, V: np.ndarray, keep_warm: bool | None = None):
        """One Jacobi sweep; returns (G(V), controls, inner iterations per node, unconverged count)."""
        spec = self.spec
        N, m = spec.grid.size, spec.U.m
        V_new = np.empty(N)
        U_new = np.empty((N, m))
        iters = np.empty(N, dtype=np.int64)
        unconv = np.empty(N, dtype=np.int64)
        keep = spec.minimizer.warm_start == "previous_control" if keep_warm is None else keep_warm
        _sweep(np.ascontiguousarray(V, dtype=float), V_new, U_new, self.warm, iters, unconv, self.nbr, spec.grid.k,
               self.G, self.B, self.sc, self.signs, self.active, self.lo, self.hi, self.qv, self.av,
               spec.beta, spec.h, self.const, spec.U.is_ball, float(spec.U.radius), self.params, self.points,
               self.method, self.pinned, keep, self.warm0)
        return V_new, U_new, iters, int(unconv.sum())


def set_workers(workers: int | None):
    if workers is not None:
        numba.set_num_threads(max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS)))


def initial_field(spec: ProblemSpec) -> ScalarField:
    """Zero for infinite horizon; one (the supremum of the transformed time) off target for minimum time."""
    if spec.mode == "minimum_time":
        return ScalarField(spec.grid, np.where(spec.target_mask(), 0.0, 1.0))
    return ScalarField(spec.grid, np.zeros(spec.grid.size))


def bellman(spec: ProblemSpec, V) -> np.ndarray:
    """``G(V)`` from cold starts, without touching any solver state."""
    values = V.values if isinstance(V, ScalarField) else np.asarray(V, dtype=float)
    return Operator(spec)(values, keep_warm=False)[0]


def value_iteration(spec: ProblemSpec, V0: ScalarField | None = None, workers: int | None = None,
                    callback=None) -> SolveReport:
    """Iterate ``V <- G(V)`` until the residual drops below ``spec.stop_tol``."""
    set_workers(workers)
    V = (V0 or initial_field(spec)).values.copy()
    if not np.all(np.isfinite(V)):
        raise ValueError("initial field must be finite")
    op = Operator(spec)
    if spec.mode == "minimum_time":
        V[op.pinned] = 0.0
    residuals, subits = [], []
    unconverged = 0
    converged = False
    controls = np.zeros((spec.grid.size, spec.U.m))
    t0 = time.perf_counter()
    for sweep in range(1, spec.max_sweeps + 1):
        V_new, controls, iters, bad = op(V)
        if not np.all(np.isfinite(V_new)):
            n = int(np.flatnonzero(~np.isfinite(V_new))[0])
            raise FloatingPointError(
                f"non-finite value at node {n} ({spec.grid.node(n)}) in sweep {sweep}; previous value {V[n]!r}"
            )
        res = residual(V_new, V, spec.norm)
        residuals.append(res)
        subits.append(float(iters.mean()))
        unconverged += bad
        V = V_new
        if callback is not None:
            callback(sweep, res, V)
        if res <= spec.stop_tol:
            converged = True
            break
    wall = time.perf_counter() - t0
    if not converged:
        log.warning("value iteration stopped after %d sweeps with residual %.3e", len(residuals), residuals[-1])
    if unconverged:
        log.info("%d inner solves hit their iteration limit", unconverged)
    return SolveReport(
        V=ScalarField(spec.grid, V),
        U=VectorField(spec.grid, controls),
        sweeps=len(residuals),
        converged=converged,
        residual_history=residuals,
        avg_subiterations=subits,
        wall_time=wall,
        unconverged_solves=unconverged,
    )
