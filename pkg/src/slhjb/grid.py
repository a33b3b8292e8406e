"""Regular grids and piecewise-linear interpolation on signed simplex sectors.

Around every node ``x_D`` the neighbourhood ``{x_D + y : |y|_1 <= k}`` is cut into
``2**d`` simplices, one per sign pattern of ``y``.  The simplex for the sign
pattern ``s`` has vertices ``x_D`` and ``x_D + s_i k e_i``.  A sector is stored as
a tuple of signs, one per axis (``+1`` means the axis belongs to the index set).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

Signs = tuple[int, ...]


def index_set(signs: Signs) -> tuple[int, ...]:
    """1-based axes with positive sign, e.g. ``(1, -1) -> (1,)``."""
    return tuple(i + 1 for i, s in enumerate(signs) if s > 0)


def all_sectors(dim: int) -> list[Signs]:
    """Every sign pattern of length ``dim``, ordered lexicographically by index set."""
    patterns = [tuple(s) for s in itertools.product((1, -1), repeat=dim)]
    return sorted(patterns, key=index_set)


@dataclass(frozen=True)
class Grid:
    lo: np.ndarray
    hi: np.ndarray
    k: float
    counts: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).ravel()
        hi = np.asarray(self.hi, dtype=float).ravel()
        if lo.shape != hi.shape or lo.size not in (2, 3):
            raise ValueError("grid bounds must be two- or three-dimensional")
        if self.k <= 0 or np.any(hi <= lo):
            raise ValueError("need k > 0 and hi > lo on every axis")
        cells = (hi - lo) / self.k
        n = np.rint(cells)
        if np.any(np.abs(cells - n) > 1e-12 * np.maximum(1.0, n)):
            raise ValueError(f"domain length is not a multiple of k={self.k}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "counts", tuple(int(c) + 1 for c in n))

    @classmethod
    def box(cls, a: float, b: float, dim: int, k: float) -> "Grid":
        return cls(np.full(dim, float(a)), np.full(dim, float(b)), k)

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def multi_index(self, flat) -> np.ndarray:
        return np.stack(np.unravel_index(flat, self.counts), axis=-1)

    def flat_index(self, idx) -> np.ndarray:
        idx = np.asarray(idx)
        return np.ravel_multi_index(tuple(np.moveaxis(idx, -1, 0)), self.counts)

    def node(self, idx) -> np.ndarray:
        """Coordinates of a node given its multi-index (or flat index)."""
        idx = np.asarray(idx)
        if idx.ndim == 0:
            idx = self.multi_index(int(idx))
        return self.lo + self.k * idx

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape ``(size, dim)``, in row-major order."""
        axes = [self.lo[i] + self.k * np.arange(c) for i, c in enumerate(self.counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def clamp(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def neighbor_table(self) -> np.ndarray:
        """Flat index of the neighbour along ``+e_i`` / ``-e_i``; -1 outside the grid.

        Shape ``(size, dim, 2)``; the last axis is ``[plus, minus]``.
        """
        idx = self.multi_index(np.arange(self.size))
        out = np.full((self.size, self.dim, 2), -1, dtype=np.int64)
        for i in range(self.dim):
            for j, step in enumerate((1, -1)):
                nb = idx.copy()
                nb[:, i] += step
                ok = (nb[:, i] >= 0) & (nb[:, i] < self.counts[i])
                out[ok, i, j] = self.flat_index(nb[ok])
        return out


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.size)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        return cls(grid, fn(grid.nodes()))

    def as_array(self) -> np.ndarray:
        return self.values.reshape(self.grid.counts)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


@dataclass
class VectorField:
    grid: Grid
    values: np.ndarray  # (size, m)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.size, -1)

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SectorInterpolant:
    """Affine map ``x -> coeffs . x + offset`` on the simplex of one sector."""

    signs: Signs
    coeffs: np.ndarray
    offset: float
    vertices: np.ndarray
    vertex_values: np.ndarray

    def __call__(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.coeffs + self.offset


def _node_flat(grid: Grid, node) -> int:
    if np.ndim(node) == 0:
        return int(node)
    return int(grid.flat_index(np.asarray(node)))


def _sector_vertices(field: ScalarField, flat: int, signs: Signs):
    grid = field.grid
    idx = grid.multi_index(flat)
    xd = grid.node(idx)
    verts = [xd]
    vals = [field.values[flat]]
    for i, s in enumerate(signs):
        nb = idx.copy()
        nb[i] += s
        verts.append(xd + s * grid.k * np.eye(grid.dim)[i])
        if 0 <= nb[i] < grid.counts[i]:
            vals.append(field.values[grid.flat_index(nb)])
        else:
            # ghost vertex outside the domain carries the departure value
            vals.append(field.values[flat])
    return np.array(verts), np.array(vals)


def sector_interpolant(field: ScalarField, node, signs: Signs) -> SectorInterpolant:
    """Solve the vertex system ``[x^j 1] (c, e) = V_j`` for one sector of ``node``."""
    flat = _node_flat(field.grid, node)
    verts, vals = _sector_vertices(field, flat, tuple(signs))
    system = np.hstack([verts, np.ones((len(verts), 1))])
    sol = np.linalg.solve(system, vals)
    return SectorInterpolant(tuple(signs), sol[:-1], float(sol[-1]), verts, vals)


def eval_arrival(field: ScalarField, x, node=None) -> np.ndarray:
    """Interpolated value at arrival point(s) ``x``.

    With ``node`` given, the departure node's own sector patch is used (this is the
    interpolant seen by the local problems).  Without it, the global continuous
    piecewise-linear interpolant on the Kuhn triangulation of the grid cells is used.
    Points are clamped into the domain first.
    """
    grid = field.grid
    x = grid.clamp(x)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if node is None:
        out = _eval_kuhn(field, x)
    else:
        out = _eval_patch(field, _node_flat(grid, node), x)
    return out[0] if single else out


def _eval_patch(field: ScalarField, flat: int, x: np.ndarray) -> np.ndarray:
    grid = field.grid
    idx = grid.multi_index(flat)
    delta = x - grid.node(idx)
    vd = field.values[flat]
    out = np.full(len(x), vd)
    for i in range(grid.dim):
        s = np.where(delta[:, i] >= 0, 1, -1)
        nb = idx[i] + s
        inside = (nb >= 0) & (nb < grid.counts[i])
        nbv = np.full(len(x), vd)
        if np.any(inside):
            nbidx = np.tile(idx, (int(inside.sum()), 1))
            nbidx[:, i] = nb[inside]
            nbv[inside] = field.values[grid.flat_index(nbidx)]
        out += np.abs(delta[:, i]) / grid.k * (nbv - vd)
    return out


def _eval_kuhn(field: ScalarField, x: np.ndarray) -> np.ndarray:
    grid = field.grid
    counts = np.array(grid.counts)
    t = (x - grid.lo) / grid.k
    base = np.clip(np.floor(t).astype(np.int64), 0, counts - 2)
    frac = np.clip(t - base, 0.0, 1.0)
    order = np.argsort(-frac, axis=1, kind="stable")
    rows = np.arange(len(x))
    corner = base.copy()
    prev = np.ones(len(x))
    vals = field.values.reshape(grid.counts)
    out = np.zeros(len(x))
    for j in range(grid.dim + 1):
        fj = frac[rows, order[:, j]] if j < grid.dim else np.zeros(len(x))
        out += (prev - fj) * vals[tuple(corner.T)]
        prev = fj
        if j < grid.dim:
            corner[rows, order[:, j]] += 1
    return out
