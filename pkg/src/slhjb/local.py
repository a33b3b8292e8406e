"""Per-node, per-sector polynomial surrogates of the discrete Hamiltonian.

For a departure node ``x``, a sector and a time step ``h`` the map
``u -> beta * I_s[V](x + h f(x, u)) + h l(x, u)`` is exactly

    sum_j quad_j/2 u_j^2 + bilinear u_1 u_2 + sum_j l1_j |u_j| + linear . u + r

on the control sector, because the sector interpolant is affine and the arrival
point is affine in ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controls import AffineControlDynamics, SectorSet
from .grid import ScalarField, sector_interpolant

FAMILIES = ("quadratic", "quadratic_l1", "minimum_time", "minimum_time_l1")


@dataclass(frozen=True)
class RunningCost:
    """``state_weight |x|^2 + gamma2/2 |u|^2 + gamma1 |u|_1`` with discount ``lam``.

    ``minimum_time`` problems ignore the state part and use the Kruzkov-transformed
    scheme (``beta = exp(-h)``, running constant ``1 - beta``); ``gamma1`` may still
    add an l1 control term there.
    """

    kind: str = "quadratic"
    gamma2: float = 2.0
    gamma1: float = 0.0
    lam: float = 0.1
    state_weight: float = 0.5

    def __post_init__(self):
        if self.kind not in ("quadratic", "quadratic_l1", "minimum_time"):
            raise ValueError(f"unknown running cost {self.kind!r}")
        if self.kind != "minimum_time" and (self.gamma2 <= 0 or self.lam <= 0):
            raise ValueError("need gamma2 > 0 and lam > 0")
        if self.gamma1 < 0:
            raise ValueError("gamma1 must be nonnegative")
        if self.kind == "quadratic" and self.gamma1 != 0:
            object.__setattr__(self, "kind", "quadratic_l1")

    @property
    def minimum_time(self) -> bool:
        return self.kind == "minimum_time"

    def discount(self, h: float) -> float:
        return float(np.exp(-h)) if self.minimum_time else 1.0 - self.lam * h

    def state_cost(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.minimum_time:
            return np.zeros(x.shape[:-1])
        return self.state_weight * np.sum(x * x, axis=-1)

    def control_cost(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.minimum_time:
            return self.gamma1 * np.sum(np.abs(u), axis=-1)
        return 0.5 * self.gamma2 * np.sum(u * u, axis=-1) + self.gamma1 * np.sum(np.abs(u), axis=-1)

    def __call__(self, x, u) -> np.ndarray:
        return self.state_cost(x) + self.control_cost(u)

    def coefficients(self, h: float) -> tuple[float, float, float]:
        """Per-component (quadratic, l1) weights and the constant running term."""
        if self.minimum_time:
            return 0.0, h * self.gamma1, 1.0 - self.discount(h)
        return h * self.gamma2, h * self.gamma1, 0.0


@dataclass
class LocalCost:
    quad: np.ndarray
    linear: np.ndarray
    r: float
    l1: np.ndarray = None
    bilinear: float = 0.0
    beta: float = 1.0
    sector: SectorSet | None = field(default=None, repr=False)

    def __post_init__(self):
        self.quad = np.asarray(self.quad, dtype=float).ravel()
        self.linear = np.asarray(self.linear, dtype=float).ravel()
        m = self.quad.size
        self.l1 = np.zeros(m) if self.l1 is None else np.broadcast_to(np.asarray(self.l1, dtype=float), (m,)).copy()
        if self.linear.size != m:
            raise ValueError("quad and linear coefficients differ in length")
        if np.any(self.quad < 0) or np.any(self.l1 < 0):
            raise ValueError("quadratic and l1 weights must be nonnegative")
        if self.bilinear != 0 and m != 2:
            raise ValueError("the bilinear term is only supported for two controls")

    @classmethod
    def from_coeffs(cls, a=0.0, b=0.0, c=0.0, d=0.0, e=0.0, r=0.0, l=0.0, s=0.0, sector=None) -> "LocalCost":
        """Two-control form ``a/2 u1^2 + b u1 u2 + c/2 u2^2 + l|u1| + s|u2| + d u1 + e u2 + r``."""
        return cls(np.array([a, c]), np.array([d, e]), float(r), np.array([l, s]), float(b), sector=sector)

    @property
    def m(self) -> int:
        return self.quad.size

    @property
    def family(self) -> str:
        smooth = not np.any(self.l1 > 0)
        if np.any(self.quad > 0):
            return "quadratic" if smooth else "quadratic_l1"
        return "minimum_time" if smooth else "minimum_time_l1"

    def hessian(self) -> np.ndarray:
        H = np.diag(self.quad)
        if self.m == 2:
            H[0, 1] = H[1, 0] = self.bilinear
        return H

    def smooth_gradient(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return u @ self.hessian() + self.linear

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        val = 0.5 * np.sum(self.quad * u * u, axis=-1) + np.sum(self.l1 * np.abs(u), axis=-1)
        val = val + u @ self.linear + self.r
        if self.m == 2:
            val = val + self.bilinear * u[..., 0] * u[..., 1]
        return val

    def eval(self, u) -> np.ndarray:
        return self(u)


def assemble(field: ScalarField, node, sector: SectorSet, dyn: AffineControlDynamics, cost: RunningCost, h: float) -> LocalCost:
    """Local cost of one sector at a grid node, via the sector's vertex-system interpolant."""
    if sector.empty:
        raise ValueError(f"sector {sector.index_set} is empty at this node")
    grid = field.grid
    x = grid.node(node)
    interp = sector_interpolant(field, node, sector.signs)
    beta = cost.discount(h)
    g = dyn.g(x)[0]
    B = dyn.B(x)[0]
    q, w1, const = cost.coefficients(h)
    base = interp(x) + h * interp.coeffs @ g
    return LocalCost(
        quad=np.full(dyn.m, q),
        linear=beta * h * (B.T @ interp.coeffs),
        r=float(beta * base + h * cost.state_cost(x) + const),
        l1=np.full(dyn.m, w1),
        beta=beta,
        sector=sector,
    )
