"""Closed-form value function of the discounted eikonal problem with quadratic cost.

For ``x' = u``, ``|u|_2 <= 1`` and running cost ``|x|^2/2 + gamma/2 |u|^2`` with
discount ``lam`` the value function is radial.  Inside ``r_bar`` the control
constraint is inactive and ``v = A r^2``; outside it ``v`` solves a linear ODE
whose exponential mode is fixed by C^1 matching at ``r_bar``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, ScalarField, VectorField


@dataclass(frozen=True)
class ExactEikonalSolution:
    lam: float = 0.1
    gamma: float = 2.0
    A: float = field(init=False)
    r_bar: float = field(init=False)
    d: float = field(init=False)

    def __post_init__(self):
        if self.lam <= 0 or self.gamma <= 0:
            raise ValueError("need lam > 0 and gamma > 0")
        lam, gam = self.lam, self.gamma
        root = np.sqrt(lam**2 + 4.0 / gam)
        r_bar = 2.0 / (root - lam)
        d = np.exp(lam * r_bar) * (
            (gam / 2.0 + 1.0 / lam**2) * r_bar - r_bar**2 / (2.0 * lam) - gam / (2.0 * lam) - 1.0 / lam**3
        )
        object.__setattr__(self, "A", gam / 4.0 * (root - lam))
        object.__setattr__(self, "r_bar", float(r_bar))
        object.__setattr__(self, "d", float(d))

    def inner(self, r):
        return self.A * np.asarray(r, dtype=float) ** 2

    def outer(self, r):
        r = np.asarray(r, dtype=float)
        lam, gam = self.lam, self.gamma
        return r**2 / (2 * lam) - r / lam**2 + gam / (2 * lam) + 1 / lam**3 + self.d * np.exp(-lam * r)

    def inner_slope(self, r):
        return 2.0 * self.A * np.asarray(r, dtype=float)

    def outer_slope(self, r):
        r = np.asarray(r, dtype=float)
        lam = self.lam
        return r / lam - 1 / lam**2 - lam * self.d * np.exp(-lam * r)

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.r_bar, self.inner(r), self.outer(np.maximum(r, self.r_bar)))

    def slope(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.r_bar, self.inner_slope(r), self.outer_slope(np.maximum(r, self.r_bar)))


def exact_value(sol: ExactEikonalSolution, x) -> np.ndarray:
    return sol.radial(np.linalg.norm(np.asarray(x, dtype=float), axis=-1))


def exact_gradient(sol: ExactEikonalSolution, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    safe = np.where(r > 0, r, 1.0)
    return np.where(r > 0, sol.slope(r) * x / safe, 0.0)


def exact_control(sol: ExactEikonalSolution, x) -> np.ndarray:
    """``-grad v / gamma`` where that has norm at most one, else ``-grad v / |grad v|``."""
    p = exact_gradient(sol, x)
    n = np.linalg.norm(p, axis=-1, keepdims=True)
    scale = np.maximum(sol.gamma, n)
    return -p / np.where(scale > 0, scale, 1.0)


def hjb_residual(sol: ExactEikonalSolution, x) -> np.ndarray:
    """``lam v + max_u {-u . grad v - |x|^2/2 - gamma/2 |u|^2}`` over the unit ball."""
    x = np.asarray(x, dtype=float)
    p = np.linalg.norm(exact_gradient(sol, x), axis=-1)
    gam = sol.gamma
    hamiltonian = np.where(p <= gam, p**2 / (2 * gam), p - gam / 2)
    return sol.lam * exact_value(sol, x) + hamiltonian - 0.5 * np.sum(x * x, axis=-1)


def error_norms(field, exact, grid: Grid | None = None) -> dict[str, float]:
    """Discrete L1 (Riemann sum ``sum |e| k^d``), mean absolute and sup errors.

    ``exact`` is an array of nodal values or a function of the node coordinates.
    Vector fields use the Euclidean norm of the nodal error.
    """
    grid = grid or field.grid
    values = field.values if isinstance(field, (ScalarField, VectorField)) else np.asarray(field, dtype=float)
    ref = exact(grid.nodes()) if callable(exact) else np.asarray(exact, dtype=float)
    err = values.reshape(grid.size, -1) - ref.reshape(grid.size, -1)
    e = np.linalg.norm(err, axis=1)
    return {"L1": float(e.sum() * grid.k**grid.dim), "mean": float(e.mean()), "Linf": float(e.max())}
