"""Feedback extraction and trajectory simulation from a converged value function."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controls import sector_table
from .grid import ScalarField, VectorField, eval_arrival
from .solver import Operator, ProblemSpec, local_minimum


@dataclass(frozen=True)
class NoiseSpec:
    """I.i.d. uniform noise on ``[-amplitude, amplitude]`` per component and step."""

    structural: float = 0.0
    output: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.structural < 0 or self.output < 0:
            raise ValueError("noise amplitudes must be nonnegative")

    @classmethod
    def relative(cls, k: float, factor: float = 0.1, seed: int | None = None) -> "NoiseSpec":
        """Both amplitudes set to ``factor * k`` (the default noise level for experiments)."""
        return cls(factor * k, factor * k, seed)

    @property
    def silent(self) -> bool:
        return self.structural == 0 and self.output == 0


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (steps + 1, d)
    controls: np.ndarray  # (steps, m)
    cost: np.ndarray  # cumulative discounted cost, (steps + 1,)
    mode: str
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    clamp_events: int = 0

    @property
    def realized_cost(self) -> float:
        return float(self.cost[-1])


class Feedback:
    """Callable feedback law ``x -> u`` for a fixed value function.

    Around an arbitrary state ``x`` a virtual patch is built whose centre and
    axis neighbours ``x +- k e_i`` take their values from the continuous global
    interpolant; the local problems are then the same as at a grid node, with
    dynamics and sectors evaluated at ``x``.  At nodes this reproduces the
    sweep exactly.
    """

    def __init__(self, V: ScalarField, spec: ProblemSpec):
        self.V = V
        self.spec = spec
        self.op = Operator(spec)
        self.target = spec.target if spec.mode == "minimum_time" else None

    def evaluate(self, x) -> tuple[np.ndarray, float]:
        spec = self.spec
        grid = spec.grid
        x = grid.clamp(np.asarray(x, dtype=float).reshape(grid.dim))
        m = spec.U.m
        if self.target is not None and self.target(x)[0]:
            return np.zeros(m), 0.0
        eye = grid.k * np.eye(grid.dim)
        probes = np.vstack([x[None], x + eye, x - eye])
        vals = eval_arrival(self.V, probes)
        vd = float(vals[0])
        vnb = np.stack([vals[1 : grid.dim + 1], vals[grid.dim + 1 :]], axis=1)
        xr = x[None]
        g = spec.dyn.g(xr)
        B = spec.dyn.B(xr)
        table = sector_table(spec.dyn, spec.U, xr, g, B)
        op = self.op
        if spec.U.is_ball:
            warm = np.where(table.lo[0] >= 0.0, 1.0, -1.0) * 0.5 * spec.U.radius / np.sqrt(m)
        else:
            warm = 0.5 * (table.lo[0] + table.hi[0])
        u = np.zeros(m)
        val, _, _ = local_minimum(
            op.method, vd, np.ascontiguousarray(vnb), grid.k, np.ascontiguousarray(g[0]), np.ascontiguousarray(B[0]),
            float(spec.cost.state_cost(x)), op.signs, table.active[0], np.ascontiguousarray(table.lo[0]),
            np.ascontiguousarray(table.hi[0]), op.qv, op.av, spec.beta, spec.h, op.const, spec.U.is_ball,
            float(spec.U.radius), op.params, op.points, np.ascontiguousarray(warm), u,
        )
        return u, float(val)

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)[0]


def feedback(V: ScalarField, spec: ProblemSpec, x) -> np.ndarray:
    """Minimiser of the discrete Hamiltonian at state ``x``."""
    return Feedback(V, spec)(x)


def control_field(V: ScalarField, spec: ProblemSpec) -> VectorField:
    """Nodal feedback controls, computed from cold starts."""
    _, U, _, _ = Operator(spec)(V.values, keep_warm=False)
    return VectorField(spec.grid, U)


def _running_cost(spec: ProblemSpec, x, u) -> float:
    if spec.cost.minimum_time:
        return 1.0 + float(spec.cost.control_cost(u))
    return float(spec.cost(x, u))


def simulate(V: ScalarField, spec: ProblemSpec, x0, steps: int, noise: NoiseSpec | None = None,
             mode: str = "closed_loop", controls=None, law: Feedback | None = None) -> Trajectory:
    """Explicit Euler trajectory under closed-loop feedback or open-loop replay.

    Closed loop evaluates the feedback at the (output-noise corrupted) measured
    state every step.  Open loop replays ``controls``; when none are given, the
    controls of the noise-free closed-loop trajectory from ``x0``.  Structural
    noise is added to every state update; states leaving the domain are clamped.
    """
    if mode not in ("closed_loop", "open_loop"):
        raise ValueError("mode must be 'closed_loop' or 'open_loop'")
    noise = noise or NoiseSpec()
    grid, h = spec.grid, spec.h
    law = law or Feedback(V, spec)
    x = np.asarray(x0, dtype=float).reshape(grid.dim)
    if np.any(x < grid.lo - 1e-12) or np.any(x > grid.hi + 1e-12):
        raise ValueError("initial state lies outside the domain")
    if mode == "open_loop" and controls is None:
        controls = simulate(V, spec, x0, steps, None, "closed_loop", law=law).controls
    if controls is not None:
        controls = np.asarray(controls, dtype=float)
        if len(controls) < steps:
            raise ValueError("open-loop control sequence is shorter than the horizon")
    rng = np.random.default_rng(noise.seed)
    d, m = grid.dim, spec.U.m
    states = np.empty((steps + 1, d))
    us = np.empty((steps, m))
    cost = np.zeros(steps + 1)
    lam = 0.0 if spec.cost.minimum_time else spec.cost.lam
    states[0] = x
    events = 0
    for n in range(steps):
        if mode == "closed_loop":
            measured = x + rng.uniform(-noise.output, noise.output, d) if noise.output > 0 else x
            u = law(measured)
        else:
            u = controls[n]
        us[n] = u
        cost[n + 1] = cost[n] + np.exp(-lam * n * h) * h * _running_cost(spec, x, u)
        x_next = x + h * spec.dyn(x[None], u[None])[0]
        if noise.structural > 0:
            x_next = x_next + rng.uniform(-noise.structural, noise.structural, d)
        clamped = grid.clamp(x_next)
        if np.any(clamped != x_next):
            events += 1
        x = clamped
        states[n + 1] = x
    return Trajectory(np.arange(steps + 1) * h, states, us, cost, mode, noise, events)
