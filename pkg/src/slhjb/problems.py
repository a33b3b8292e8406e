"""Built-in benchmark problems.

All share ``lam = 0.1``, ``gamma2 = 2`` and the running cost
``|x|^2/2 + gamma2/2 |u|^2 + gamma1 |u|_1``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .controls import ControlSet, car, discontinuous_speed, eikonal, triple_integrator
from .grid import Grid
from .local import RunningCost
from .minimizers import MinimizerConfig
from .solver import ProblemSpec, TargetSet

DYNAMICS = {
    "eikonal2": lambda: eikonal(2),
    "eikonal3": lambda: eikonal(3),
    "eikonal2_disc": lambda: eikonal(2, discontinuous_speed),
    "triple_integrator": triple_integrator,
    "car": car,
}


@dataclass(frozen=True)
class ProblemDef:
    name: str
    dynamics: str
    lo: float
    hi: float
    dim: int
    control: str  # "ball" or "box"
    bound: float  # ball radius or symmetric box half-width
    h_factor: float  # h = h_factor * k
    k: float
    gamma1: float = 0.0
    gamma2: float = 2.0
    lam: float = 0.1
    mode: str = "infinite_horizon"
    target_radius: float = 0.0
    method: str = "auto"
    description: str = ""

    def control_set(self, m: int) -> ControlSet:
        if self.control == "ball":
            return ControlSet.ball(m, self.bound)
        return ControlSet.symmetric_box(np.full(m, self.bound))


REGISTRY = {
    p.name: p
    for p in [
        ProblemDef("test1", "eikonal2", -1, 1, 2, "ball", 1.0, np.sqrt(2) / 4, 0.05,
                   description="2D eikonal dynamics, quadratic cost, exact solution available"),
        ProblemDef("test1-disc", "eikonal2_disc", -1, 1, 2, "ball", 1.0, np.sqrt(2) / 4, 0.05,
                   description="2D eikonal dynamics with speed doubled above x2 = 0.5"),
        ProblemDef("test1-mt", "eikonal2", -1, 1, 2, "ball", 1.0, np.sqrt(2) / 4, 0.05, mode="minimum_time",
                   target_radius=0.1, description="2D eikonal minimum time to a disk around the origin"),
        ProblemDef("test2", "eikonal3", -1, 1, 3, "ball", 1.0, 0.5, 0.1, method="chambolle_pock",
                   description="3D eikonal dynamics, quadratic cost, exact solution available"),
        ProblemDef("test3", "triple_integrator", -1, 1, 3, "box", 0.3, 0.2, 0.05, method="chambolle_pock",
                   description="triple integrator with two box-constrained controls"),
        ProblemDef("test4", "eikonal2", -1, 1, 2, "ball", 1.0, np.sqrt(2) / 4, 0.025, gamma1=0.1,
                   method="ssn_l1_ball", description="2D eikonal dynamics with an l1 control cost"),
        ProblemDef("test5", "car", 0, 2 * np.pi, 3, "box", 0.3, 0.2, 0.2, gamma1=0.5, method="ssn_l1_box",
                   description="3D car model with box-constrained controls and an l1 cost"),
    ]
}


def build(name: str, k: float | None = None, minimizer: MinimizerConfig | str | None = None,
          gamma1: float | None = None, **overrides) -> ProblemSpec:
    """Problem spec for a registry entry; ``k``, ``gamma1`` and the minimizer may be overridden.

    Remaining keyword arguments go to :class:`ProblemSpec` (``stop_tol``, ``max_sweeps``, ``norm``).
    When the domain length is not a multiple of ``k`` the nearest spacing that
    divides it is used (``[0, 2 pi]`` with ``k = 0.2`` becomes ``2 pi / 31``).
    """
    if name not in REGISTRY:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(REGISTRY)}")
    p = REGISTRY[name]
    if gamma1 is not None:
        p = replace(p, gamma1=gamma1)
    k = p.k if k is None else float(k)
    k = (p.hi - p.lo) / max(1, round((p.hi - p.lo) / k))
    dyn = DYNAMICS[p.dynamics]()
    U = p.control_set(dyn.m)
    if p.mode == "minimum_time":
        cost = RunningCost("minimum_time", gamma1=p.gamma1)
        target = TargetSet("ball", radius=p.target_radius)
    else:
        cost = RunningCost("quadratic", gamma2=p.gamma2, gamma1=p.gamma1, lam=p.lam)
        target = None
    if minimizer is None:
        minimizer = MinimizerConfig(method=p.method)
    elif isinstance(minimizer, str):
        minimizer = MinimizerConfig(method=minimizer)
    return ProblemSpec(
        grid=Grid.box(p.lo, p.hi, p.dim, k), dyn=dyn, U=U, cost=cost, h=p.h_factor * k, mode=p.mode,
        target=target, minimizer=minimizer, name=name, **overrides,
    )
