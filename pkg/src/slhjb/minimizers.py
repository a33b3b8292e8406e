"""Local minimisers for the per-sector surrogate problems.

Every routine takes a :class:`~slhjb.local.LocalCost` whose ``sector`` field
carries the feasible set, and returns a :class:`MinimizerResult`.  The heavy
lifting lives in :mod:`slhjb._kernels`; this module validates inputs, builds
comparison point sets and aggregates sector minima at a node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import _kernels as K
from .controls import ControlSet, SectorSet, control_signs

METHODS = {
    "comparison": K.COMPARISON,
    "chambolle_pock": K.CHAMBOLLE_POCK,
    "ssn_smooth": K.SSN_SMOOTH,
    "ssn_l1_ball": K.SSN_L1_BALL,
    "ssn_l1_box": K.SSN_L1_BOX,
    "sphere_newton": K.SPHERE_NEWTON,
    "splitting": K.SPLITTING,
}
STATUS = {K.CONVERGED: "converged", K.MAX_ITERS: "max_iters", K.FALLBACK: "fallback", K.NO_POINTS: "no_points"}
HISTORY_LEN = 256


@dataclass(frozen=True)
class MinimizerConfig:
    """Inner solver choice and parameters.

    ``method="auto"`` picks a routine from the cost family and the control set:
    smooth ball problems use ``ssn_smooth``, smooth box problems
    ``chambolle_pock``, l1 problems the matching ``ssn_l1_*`` routine and
    minimum-time problems ``sphere_newton``.
    """

    method: str = "auto"
    tol: float = 1e-4
    max_iters: int = 1000
    tau: float = 0.7
    sigma: float = 0.7
    theta: float = 1.0
    theta_scale: float = 1.0
    eps: float = 1e-3
    warm_start: str = "previous_control"
    # comparison point sets: polar/spherical layout on the ball, per-axis count on boxes
    n_theta: int | None = None
    n_phi: int | None = None
    n_r: int | None = None
    n_box: int = 41

    def __post_init__(self):
        if self.method != "auto" and self.method not in METHODS:
            raise ValueError(f"unknown minimizer {self.method!r}; choose from {sorted(METHODS)} or 'auto'")
        if self.tau <= 0 or self.sigma <= 0 or self.tau * self.sigma > 1.0:
            raise ValueError("need tau, sigma > 0 and tau * sigma <= 1")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.tol <= 0 or self.eps <= 0 or self.max_iters < 1:
            raise ValueError("need tol > 0, eps > 0 and max_iters >= 1")
        if not 0.0 < self.theta_scale <= 1.0:
            raise ValueError("theta_scale must lie in (0, 1]")
        if self.warm_start not in ("none", "previous_control"):
            raise ValueError("warm_start must be 'none' or 'previous_control'")

    def params(self) -> np.ndarray:
        p = np.zeros(K.N_PARAMS)
        p[K.P_TAU] = self.tau
        p[K.P_SIGMA] = self.sigma
        p[K.P_THETA] = self.theta
        p[K.P_ETA] = self.tol
        p[K.P_EPS] = self.eps
        p[K.P_MAXIT] = self.max_iters
        p[K.P_THETA_SCALE] = self.theta_scale
        return p

    def resolve(self, family: str, control_set: ControlSet) -> str:
        """Concrete routine for a cost family on a control set."""
        if self.method != "auto":
            return self.method
        if family.startswith("minimum_time"):
            return "sphere_newton"
        if family == "quadratic_l1":
            return "ssn_l1_ball" if control_set.is_ball else "ssn_l1_box"
        return "ssn_smooth" if control_set.is_ball else "chambolle_pock"

    def points(self, control_set: ControlSet) -> np.ndarray:
        """Comparison point set for the whole control set."""
        if control_set.is_ball:
            if control_set.m == 2:
                return polar_points(control_set.radius, self.n_theta or 128, self.n_r or 10)
            return spherical_points(control_set.radius, self.n_theta or 64, self.n_phi or 16, self.n_r or 5)
        return box_points(control_set, self.n_box)


@dataclass
class MinimizerResult:
    u_star: np.ndarray
    value: float
    iterations: int
    converged: bool
    sector: tuple[int, ...] = ()
    status: str = "converged"
    history: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    @property
    def fallback(self) -> bool:
        return self.status == "fallback"


# ------------------------------------------------------------------ point sets


def polar_points(radius: float = 1.0, n_theta: int = 128, n_r: int = 10) -> np.ndarray:
    """``n_theta`` angles times ``n_r`` radii on the disk, plus the origin."""
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    r = radius * np.arange(1, n_r + 1) / n_r
    pts = np.stack([np.outer(r, np.cos(theta)).ravel(), np.outer(r, np.sin(theta)).ravel()], axis=1)
    return np.vstack([np.zeros((1, 2)), pts])


def spherical_points(radius: float = 1.0, n_theta: int = 64, n_phi: int = 16, n_r: int = 5) -> np.ndarray:
    """Azimuth times polar-midpoint times radius grid on the ball, plus the origin."""
    az = 2.0 * np.pi * np.arange(n_theta) / n_theta
    pol = np.pi * (np.arange(n_phi) + 0.5) / n_phi
    r = radius * np.arange(1, n_r + 1) / n_r
    R, P, A = np.meshgrid(r, pol, az, indexing="ij")
    pts = np.stack([R * np.sin(P) * np.cos(A), R * np.sin(P) * np.sin(A), R * np.cos(P)], axis=-1)
    return np.vstack([np.zeros((1, 3)), pts.reshape(-1, 3)])


def box_points(control_set: ControlSet, n: int = 41) -> np.ndarray:
    """Uniform Cartesian grid with ``n`` points per axis; zero is always included."""
    axes = [np.union1d(np.linspace(lo, hi, n), [0.0]) for lo, hi in zip(control_set.lower, control_set.upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


# ------------------------------------------------------------------- routines


def _sector_of(lc, sector: SectorSet | None) -> SectorSet:
    sector = sector if sector is not None else lc.sector
    if sector is None:
        raise ValueError("local cost carries no sector; pass one explicitly")
    if sector.empty:
        raise ValueError(f"sector {sector.index_set} is empty")
    return sector


def _check_orthant(sector: SectorSet):
    if sector.control_set.is_ball and np.any((sector.lo < 0) & (sector.hi > 0)):
        raise ValueError("ball sectors must fix the sign of every control component")


def _run(method: str, lc, sector: SectorSet, cfg: MinimizerConfig, u0=None, points=None) -> MinimizerResult:
    U = sector.control_set
    m = lc.m
    if points is None:
        points = np.zeros((1, m))
    if u0 is None or cfg.warm_start == "none":
        u0 = default_start(sector)
    u0 = np.asarray(u0, dtype=float).reshape(m)
    out = np.zeros(m)
    hist = np.zeros(HISTORY_LEN)
    value, it, status = K.solve_sector(
        METHODS[method], lc.quad, float(lc.bilinear), lc.l1, lc.linear, float(lc.r),
        np.asarray(sector.lo, dtype=float), np.asarray(sector.hi, dtype=float), U.is_ball, float(U.radius),
        cfg.params(), u0, np.ascontiguousarray(points, dtype=float), out, hist,
    )
    n_hist = min(int(it) + 1, HISTORY_LEN) if method in ("ssn_smooth", "ssn_l1_ball", "ssn_l1_box") else 0
    return MinimizerResult(
        u_star=out, value=float(value), iterations=int(it),
        converged=status in (K.CONVERGED, K.FALLBACK), sector=sector.index_set,
        status=STATUS[int(status)], history=hist[:n_hist].copy(),
    )


def default_start(sector: SectorSet) -> np.ndarray:
    """Half-radius point along the sector's centroid direction, or the sub-box midpoint."""
    U = sector.control_set
    if U.is_ball:
        s = control_signs(sector.lo, sector.hi)
        return s * 0.5 * U.radius / np.sqrt(U.m)
    return 0.5 * (np.asarray(sector.lo) + np.asarray(sector.hi))


def comparison(lc, points, sector: SectorSet | None = None) -> MinimizerResult:
    """Best of a finite point set (restricted to the sector when one is known)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        raise ValueError("comparison needs at least one point")
    sector = sector if sector is not None else lc.sector
    if sector is None:
        vals = lc(points)
        i = int(np.argmin(vals))
        return MinimizerResult(points[i].copy(), float(vals[i]), len(points), True)
    return _run("comparison", lc, _sector_of(lc, sector), MinimizerConfig(method="comparison"), points=points)


def chambolle_pock(lc, sector: SectorSet | None = None, cfg: MinimizerConfig | None = None, u0=None) -> MinimizerResult:
    sector = _sector_of(lc, sector)
    _check_orthant(sector)
    if not sector.control_set.is_ball and np.any(lc.l1 > 0):
        raise ValueError("chambolle_pock needs a smooth cost on boxes; use splitting or ssn_l1_box")
    if lc.m == 2 and lc.quad[0] * lc.quad[1] < lc.bilinear**2:
        raise ValueError("chambolle_pock needs a convex cost (a c >= b^2)")
    return _run("chambolle_pock", lc, sector, cfg or MinimizerConfig(), u0)


def ssn_smooth(lc, sector: SectorSet | None = None, cfg: MinimizerConfig | None = None, u0=None) -> MinimizerResult:
    sector = _sector_of(lc, sector)
    if not sector.control_set.is_ball:
        raise ValueError("ssn_smooth handles ball constraints")
    _check_orthant(sector)
    return _run("ssn_smooth", lc, sector, cfg or MinimizerConfig(), u0)


def sphere_newton(lc, sector: SectorSet | None = None, cfg: MinimizerConfig | None = None) -> MinimizerResult:
    sector = _sector_of(lc, sector)
    if np.any(lc.quad > 0):
        raise ValueError("sphere_newton needs a cost without quadratic terms")
    _check_orthant(sector)
    return _run("sphere_newton", lc, sector, cfg or MinimizerConfig())


def ssn_l1_ball(lc, sector: SectorSet | None = None, cfg: MinimizerConfig | None = None, u0=None) -> MinimizerResult:
    sector = _sector_of(lc, sector)
    if not sector.control_set.is_ball:
        raise ValueError("ssn_l1_ball handles ball constraints")
    _check_orthant(sector)
    return _run("ssn_l1_ball", lc, sector, cfg or MinimizerConfig(), u0)


def ssn_l1_box(lc, sector: SectorSet | None = None, cfg: MinimizerConfig | None = None, u0=None) -> MinimizerResult:
    sector = _sector_of(lc, sector)
    if sector.control_set.is_ball:
        raise ValueError("ssn_l1_box handles box constraints")
    return _run("ssn_l1_box", lc, sector, cfg or MinimizerConfig(), u0)


def splitting(lc, sector: SectorSet | None = None, cfg: MinimizerConfig | None = None, u0=None) -> MinimizerResult:
    """Fix the sign of every component, absorb the l1 term into the linear one, solve smoothly."""
    sector = _sector_of(lc, sector)
    _check_orthant(sector)
    return _run("splitting", lc, sector, cfg or MinimizerConfig(), u0)


ROUTINES = {
    "chambolle_pock": chambolle_pock,
    "ssn_smooth": ssn_smooth,
    "ssn_l1_ball": ssn_l1_ball,
    "ssn_l1_box": ssn_l1_box,
    "splitting": splitting,
}


def solve(lc, cfg: MinimizerConfig, sector: SectorSet | None = None, u0=None, points=None) -> MinimizerResult:
    """Run the configured routine on one sector."""
    sector = _sector_of(lc, sector)
    method = cfg.resolve(lc.family, sector.control_set)
    if method == "comparison":
        pts = cfg.points(sector.control_set) if points is None else points
        return comparison(lc, pts, sector)
    if method == "sphere_newton":
        return sphere_newton(lc, sector, cfg)
    return ROUTINES[method](lc, sector, cfg, u0)


def minimize_node(localcosts, cfg: MinimizerConfig | None = None, warm=None) -> MinimizerResult:
    """Smallest sector minimum at a node; ties go to the lexicographically first index set.

    ``warm`` is a single control or one control per local cost.
    """
    cfg = cfg or MinimizerConfig()
    costs = [lc for lc in localcosts if lc.sector is None or lc.sector.active]
    if not costs:
        raise ValueError("no nonempty sector at this node")
    if warm is not None:
        warm = np.asarray(warm, dtype=float)
        if warm.ndim == 1:
            warm = np.tile(warm, (len(localcosts), 1))
        warm = [w for lc, w in zip(localcosts, warm) if lc.sector is None or lc.sector.active]
    points = None
    if cfg.method == "comparison" and costs[0].sector is not None:
        points = cfg.points(costs[0].sector.control_set)
    order = sorted(range(len(costs)), key=lambda i: costs[i].sector.index_set if costs[i].sector else ())
    best = None
    total = 0
    all_converged = True
    for i in order:
        res = solve(costs[i], cfg, u0=None if warm is None else warm[i], points=points)
        total += res.iterations
        all_converged &= res.converged
        if best is None or res.value < best.value:
            best = res
    best.iterations = total
    best.converged = all_converged
    return best


# --------------------------------------------------------------------- oracle


@njit(cache=True)
def _ray_min(q, b, a, c, dirs, radii, best, best_u):
    """Best point ``r d`` over rays ``d`` and radii ``r``; the cost along a ray is ``A r^2 + C r``."""
    m = q.shape[0]
    for t in range(dirs.shape[0]):
        A = 0.0
        C = 0.0
        for j in range(m):
            d = dirs[t, j]
            A += 0.5 * q[j] * d * d
            C += a[j] * abs(d) + c[j] * d
        if m == 2:
            A += b * dirs[t, 0] * dirs[t, 1]
        for r in radii:
            v = (A * r + C) * r
            if v < best:
                best = v
                for j in range(m):
                    best_u[j] = r * dirs[t, j]
    return best


@njit(cache=True)
def _box_min(q, b, a, c, axes, best, best_u):
    m = q.shape[0]
    n = axes.shape[1]
    # separable part per axis value
    part = np.empty((m, n))
    for j in range(m):
        for i in range(n):
            x = axes[j, i]
            part[j, i] = 0.5 * q[j] * x * x + a[j] * abs(x) + c[j] * x
    if m == 2:
        for i0 in range(n):
            for i1 in range(n):
                v = part[0, i0] + part[1, i1] + b * axes[0, i0] * axes[1, i1]
                if v < best:
                    best = v
                    best_u[0] = axes[0, i0]
                    best_u[1] = axes[1, i1]
    else:
        for i0 in range(n):
            for i1 in range(n):
                for i2 in range(n):
                    v = part[0, i0] + part[1, i1] + part[2, i2]
                    if v < best:
                        best = v
                        best_u[0] = axes[0, i0]
                        best_u[1] = axes[1, i1]
                        best_u[2] = axes[2, i2]
    return best


def _dense_min(q, b, a, c, lo, hi, ball, radius, n):
    m = q.shape[0]
    best_u = np.zeros(m)
    if ball:
        # polar (spherical) grid over the sector's orthant, radii from 0 to the radius
        s = np.where(np.asarray(lo) < 0.0, -1.0, 1.0)
        ang = 0.5 * np.pi * np.arange(n) / (n - 1.0)
        if m == 2:
            dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        else:
            th, ph = np.meshgrid(ang, ang, indexing="ij")
            dirs = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1).reshape(-1, 3)
        radii = radius * np.arange(n) / (n - 1.0)
        best = _ray_min(q, b, a, c, np.ascontiguousarray(dirs * s), radii, np.inf, best_u)
    else:
        axes = np.linspace(lo, hi, n).T.copy()
        best = _box_min(q, b, a, c, axes, np.inf, best_u)
    return best, best_u


def oracle(lc, sector: SectorSet | None = None, resolution: int = 10**6) -> MinimizerResult:
    """Dense enumeration over the sector: polar (or spherical) grid on balls, Cartesian on boxes."""
    sector = _sector_of(lc, sector)
    U = sector.control_set
    n = max(2, int(round(resolution ** (1.0 / lc.m))))
    best, u = _dense_min(
        lc.quad, float(lc.bilinear), lc.l1, lc.linear,
        np.asarray(sector.lo, dtype=float), np.asarray(sector.hi, dtype=float), U.is_ball, float(U.radius), n,
    )
    return MinimizerResult(u, float(best + lc.r), n**lc.m, True, sector.index_set)


def first_order_residual(lc, sector: SectorSet, u, theta: float = 1.0) -> float:
    """``|u - P(u - theta grad F(u))|`` for the smooth part projected on the sector."""
    u = np.asarray(u, dtype=float)
    return float(np.linalg.norm(u - sector.project(u - theta * lc.smooth_gradient(u))))
