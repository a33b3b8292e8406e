"""Control sets, control-affine dynamics and the sector decomposition of U.

For a departure node ``x_D`` and a state-space sector with signs ``s`` the control
sector is ``U_s = {u in U : s_i (g(x_D)_i + b_i u) >= 0}``.  Every row ``b_i`` of the
input matrix is required to involve at most one control component, so each
``U_s`` is ``U`` intersected with per-component bounds ``[lo_j, hi_j]``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Grid, Signs, all_sectors, index_set

SLACK = 1e-12


@dataclass(frozen=True)
class ControlSet:
    kind: str  # "ball" or "box"
    m: int
    radius: float = 1.0
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "ball":
            if self.radius <= 0:
                raise ValueError("ball radius must be positive")
            object.__setattr__(self, "lower", np.full(self.m, -self.radius))
            object.__setattr__(self, "upper", np.full(self.m, self.radius))
        elif self.kind == "box":
            lo = np.asarray(self.lower, dtype=float).reshape(self.m)
            hi = np.asarray(self.upper, dtype=float).reshape(self.m)
            if np.any(lo > 0) or np.any(hi < 0):
                raise ValueError("box constraints need lower <= 0 <= upper")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        else:
            raise ValueError(f"unknown control set kind {self.kind!r}")

    @classmethod
    def ball(cls, m: int, radius: float = 1.0) -> "ControlSet":
        return cls("ball", m, radius=radius)

    @classmethod
    def box(cls, lower, upper) -> "ControlSet":
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        return cls("box", lower.size, lower=lower, upper=upper)

    @classmethod
    def symmetric_box(cls, bounds) -> "ControlSet":
        b = np.atleast_1d(np.asarray(bounds, dtype=float))
        return cls.box(-b, b)

    @property
    def is_ball(self) -> bool:
        return self.kind == "ball"

    def contains(self, u, tol: float = 1e-8) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.is_ball:
            return np.linalg.norm(u, axis=-1) <= self.radius + tol
        return np.all((u >= self.lower - tol) & (u <= self.upper + tol), axis=-1)

    def extreme_points(self) -> np.ndarray:
        """Box vertices (box) or the axis directions scaled to the radius (ball)."""
        if self.is_ball:
            e = np.eye(self.m) * self.radius
            return np.vstack([e, -e])
        return np.array(list(itertools.product(*zip(self.lower, self.upper))))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.is_ball:
            d = rng.standard_normal((n, self.m))
            d /= np.linalg.norm(d, axis=1, keepdims=True)
            return d * self.radius * rng.random((n, 1)) ** (1.0 / self.m)
        return rng.uniform(self.lower, self.upper, size=(n, self.m))


@dataclass(frozen=True)
class AffineControlDynamics:
    """``f(x, u) = g(x) + B(x) u``, vectorised over rows of ``x``."""

    name: str
    dim: int
    m: int
    drift: Callable[[np.ndarray], np.ndarray]
    input_matrix: Callable[[np.ndarray], np.ndarray]

    def g(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.broadcast_to(self.drift(x), (len(x), self.dim)).astype(float)

    def B(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.broadcast_to(self.input_matrix(x), (len(x), self.dim, self.m)).astype(float)

    def __call__(self, x, u) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return self.g(x) + np.einsum("nij,nj->ni", self.B(x), np.broadcast_to(u, (len(x), self.m)))


def eikonal(dim: int, speed: Callable[[np.ndarray], np.ndarray] | None = None) -> AffineControlDynamics:
    """``f = c(x) u`` with an optional scalar speed field ``c``."""

    def input_matrix(x):
        c = np.ones(len(x)) if speed is None else np.asarray(speed(x), dtype=float)
        return c[:, None, None] * np.eye(dim)[None]

    name = "eikonal" if speed is None else "eikonal_speed"
    return AffineControlDynamics(name, dim, dim, lambda x: np.zeros((len(x), dim)), input_matrix)


def discontinuous_speed(x: np.ndarray) -> np.ndarray:
    return 1.0 + (x[:, 1] > 0.5)


def triple_integrator() -> AffineControlDynamics:
    """``f = (x_2, x_3 + u_1, u_2)``."""

    def drift(x):
        return np.stack([x[:, 1], x[:, 2], np.zeros(len(x))], axis=1)

    B = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return AffineControlDynamics("triple_integrator", 3, 2, drift, lambda x: np.broadcast_to(B, (len(x), 3, 2)))


def car() -> AffineControlDynamics:
    """``f = (u_1 cos x_3, u_1 sin x_3, u_2)``; ``B`` depends on the heading."""

    def input_matrix(x):
        out = np.zeros((len(x), 3, 2))
        out[:, 0, 0] = np.cos(x[:, 2])
        out[:, 1, 0] = np.sin(x[:, 2])
        out[:, 2, 1] = 1.0
        return out

    return AffineControlDynamics("car", 3, 2, lambda x: np.zeros((len(x), 3)), input_matrix)


def max_timestep(dyn: AffineControlDynamics, U: ControlSet, grid: Grid) -> float:
    """Largest ``h`` with ``h * sup |g + B u|_2 <= (sqrt(2)/2) k`` over nodes and U."""
    x = grid.nodes()
    g, B = dyn.g(x), dyn.B(x)
    if U.is_ball:
        speed = np.linalg.norm(g, axis=1) + U.radius * np.linalg.norm(B, 2, axis=(1, 2))
    else:
        verts = U.extreme_points()
        speed = np.max(np.linalg.norm(g[:, None, :] + np.einsum("nij,vj->nvi", B, verts), axis=2), axis=1)
    sup = float(np.max(speed))
    if sup == 0.0:
        warnings.warn("dynamics vanish identically; time step is unrestricted", RuntimeWarning)
        return float("inf")
    return np.sqrt(2.0) / 2.0 * grid.k / sup


@dataclass(frozen=True)
class SectorSet:
    """Controls whose arrival point lies in the state-space sector ``signs``."""

    signs: Signs
    rows: np.ndarray  # (d, m): s_i b_i
    offsets: np.ndarray  # (d,): s_i g_i ; constraint rows @ u + offsets >= 0
    lo: np.ndarray
    hi: np.ndarray
    control_set: ControlSet
    empty: bool = False
    redundant: bool = False
    duplicate_of: Signs | None = field(default=None)

    @property
    def index_set(self) -> tuple[int, ...]:
        return index_set(self.signs)

    @property
    def active(self) -> bool:
        return not (self.empty or self.redundant)

    def contains(self, u, tol: float = SLACK) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        half = np.all(u @ self.rows.T + self.offsets >= -tol, axis=1)
        return half & self.control_set.contains(u, tol)

    def project(self, p) -> np.ndarray:
        """Euclidean projection onto the sector (sign-orthant ball or sub-box)."""
        p = np.asarray(p, dtype=float)
        if self.control_set.is_ball:
            return project_ball(p, control_signs(self.lo, self.hi), self.control_set.radius)
        return np.clip(p, self.lo, self.hi)


@dataclass
class SectorTable:
    """Sector decomposition for every node of a grid."""

    signs: np.ndarray  # (S, d)
    active: np.ndarray  # (N, S)
    empty: np.ndarray  # (N, S)
    lo: np.ndarray  # (N, S, m)
    hi: np.ndarray  # (N, S, m)


def control_signs(lo, hi) -> np.ndarray:
    """Orthant of a sign-aligned sector: +1 where ``lo >= 0``, -1 otherwise."""
    return np.where(np.asarray(lo) >= 0.0, 1.0, -1.0)


def _bounds(G, B, U: ControlSet, signs, ztol=1e-12):
    n = len(G)
    lo = np.tile(U.lower, (n, 1)).astype(float)
    hi = np.tile(U.upper, (n, 1)).astype(float)
    feasible = np.ones(n, dtype=bool)
    for i, s in enumerate(signs):
        c = s * B[:, i, :]
        const = s * G[:, i]
        nz = np.abs(c) > ztol
        nnz = nz.sum(axis=1)
        if np.any(nnz > 1):
            raise ValueError("each dynamics row may involve at most one control component")
        feasible &= (nnz == 1) | (const >= -SLACK)
        rows = np.nonzero(nnz == 1)[0]
        if rows.size:
            j = np.argmax(nz[rows], axis=1)
            cj = c[rows, j]
            thr = -const[rows] / cj
            if U.is_ball and np.any(np.abs(thr) > SLACK):
                raise ValueError("ball-constrained sectors must be sign orthants (zero drift along controlled rows)")
            up = cj > 0
            lo[rows[up], j[up]] = np.maximum(lo[rows[up], j[up]], thr[up])
            hi[rows[~up], j[~up]] = np.minimum(hi[rows[~up], j[~up]], thr[~up])
    feasible &= np.all(lo <= hi + SLACK, axis=1)
    hi = np.maximum(hi, lo)
    if U.is_ball:
        lo = np.where(np.abs(lo) <= SLACK, 0.0, lo)
        hi = np.where(np.abs(hi) <= SLACK, 0.0, hi)
    degenerate = np.any((hi - lo <= SLACK) & (U.upper - U.lower > SLACK), axis=1)
    return lo, hi, feasible, degenerate


def sector_table(dyn: AffineControlDynamics, U: ControlSet, x, g=None, B=None) -> SectorTable:
    """Decompose U at every row of ``x``.

    Lower-dimensional sectors (a component pinned to zero by conflicting signs) are
    dominated by a full sector sharing the same face and interpolant, and sectors
    with the same control bounds as an earlier one are duplicates; both are marked
    inactive.  Duplicates keep the lexicographically smallest index set.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    G = dyn.g(x) if g is None else g
    Bm = dyn.B(x) if B is None else B
    patterns = all_sectors(dyn.dim)
    S, n = len(patterns), len(x)
    lo = np.empty((n, S, U.m))
    hi = np.empty((n, S, U.m))
    empty = np.empty((n, S), dtype=bool)
    degenerate = np.empty((n, S), dtype=bool)
    for t, signs in enumerate(patterns):
        lo[:, t], hi[:, t], feas, deg = _bounds(G, Bm, U, signs)
        empty[:, t] = ~feas
        degenerate[:, t] = deg & feas
    active = ~empty & ~degenerate
    all_deg = ~np.any(active, axis=1)
    active[all_deg] = ~empty[all_deg]
    for t in range(S):
        for t0 in range(t):
            same = np.all(np.abs(lo[:, t] - lo[:, t0]) <= SLACK, axis=1) & np.all(np.abs(hi[:, t] - hi[:, t0]) <= SLACK, axis=1)
            active[:, t] &= ~(same & active[:, t0])
    return SectorTable(np.array(patterns, dtype=np.int64), active, empty, lo, hi)


def decompose(dyn: AffineControlDynamics, U: ControlSet, x_D) -> list[SectorSet]:
    """All ``2**d`` control sectors at one departure point, empty ones flagged."""
    x_D = np.asarray(x_D, dtype=float).reshape(1, -1)
    table = sector_table(dyn, U, x_D)
    g = dyn.g(x_D)[0]
    B = dyn.B(x_D)[0]
    out = []
    for t, signs in enumerate(map(tuple, table.signs.tolist())):
        s = np.asarray(signs, dtype=float)
        dup = None
        redundant = not table.empty[0, t] and not table.active[0, t]
        if redundant:
            for t0 in range(t):
                if table.active[0, t0] and np.allclose(table.lo[0, t0], table.lo[0, t]) and np.allclose(table.hi[0, t0], table.hi[0, t]):
                    dup = tuple(table.signs[t0].tolist())
                    break
        out.append(
            SectorSet(
                signs=signs,
                rows=s[:, None] * B,
                offsets=s * g,
                lo=table.lo[0, t],
                hi=table.hi[0, t],
                control_set=U,
                empty=bool(table.empty[0, t]),
                redundant=redundant,
                duplicate_of=dup,
            )
        )
    return out


def project_ball(p, signs=None, radius: float = 1.0) -> np.ndarray:
    """Projection onto ``{u : s_j u_j >= 0, |u|_2 <= radius}``.

    With ``signs=None`` the nonnegative orthant is used, i.e.
    ``max(0, p) / max(1, |max(0, p)| / radius)``.
    """
    p = np.asarray(p, dtype=float)
    s = np.ones(p.shape[-1]) if signs is None else np.asarray(signs, dtype=float)
    q = np.maximum(0.0, p * s)
    nrm = np.linalg.norm(q, axis=-1, keepdims=True)
    return s * q / np.maximum(1.0, nrm / radius)


def project_box(p, U: ControlSet, signs=None) -> np.ndarray:
    """Clamp into ``[max(0, u_a), u_b]`` (positive sign) or ``[u_a, min(0, u_b)]``."""
    p = np.asarray(p, dtype=float)
    if signs is None:
        return np.clip(p, U.lower, U.upper)
    s = np.asarray(signs)
    lo = np.where(s > 0, np.maximum(0.0, U.lower), U.lower)
    hi = np.where(s > 0, U.upper, np.minimum(0.0, U.upper))
    return np.clip(p, lo, hi)
