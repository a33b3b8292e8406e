"""Command-line front end: ``slhjb {solve,simulate,convergence,bench-minimizers} CONFIG``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from .controls import ControlSet, decompose, eikonal
from .grid import Grid
from .io import CONVERGENCE_COLUMNS, write_field_csv, write_field_vtk, write_table_csv, write_trajectory_csv
from .local import LocalCost, RunningCost
from .minimizers import METHODS, MinimizerConfig, minimize_node, oracle
from .problems import DYNAMICS, build
from .reference import ExactEikonalSolution, exact_control, exact_value, error_norms
from .solver import ProblemSpec, TargetSet, set_workers, value_iteration
from .synthesis import Feedback, NoiseSpec, control_field, simulate

log = logging.getLogger("slhjb")


class ConfigError(ValueError):
    pass


TOP_KEYS = {"problem", "k", "gamma1", "minimizer", "solver", "outputs", "seed", "simulate", "convergence", "bench"}
INLINE_KEYS = {"domain", "dim", "dynamics", "control", "cost", "h", "h_factor", "mode", "target"}
SOLVER_KEYS = {"stop_tol", "max_sweeps", "norm"}
SIMULATE_KEYS = {"x0", "steps", "noise", "mode", "runs"}
NOISE_KEYS = {"structural", "output"}
CONVERGENCE_KEYS = {"ks", "methods"}
BENCH_KEYS = {"family", "control", "instances", "methods", "tolerances", "comparison_points", "gamma", "oracle_resolution"}
OUTPUTS = {"value", "control", "report"}


def _check_keys(section: dict, allowed: set, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}; allowed {sorted(allowed)}")


def load_config(path) -> dict:
    """Parse and validate a JSON run configuration; errors carry line and column."""
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    _check_keys(cfg, TOP_KEYS, "config")
    if "problem" not in cfg and "bench" not in cfg:
        raise ConfigError("config: 'problem' is required")
    if isinstance(cfg.get("problem"), dict):
        _check_keys(cfg["problem"], INLINE_KEYS, "problem")
    for key, allowed in (("solver", SOLVER_KEYS), ("simulate", SIMULATE_KEYS), ("convergence", CONVERGENCE_KEYS),
                         ("bench", BENCH_KEYS)):
        if key in cfg:
            _check_keys(cfg[key], allowed, key)
    if "noise" in cfg.get("simulate", {}):
        _check_keys(cfg["simulate"]["noise"], NOISE_KEYS, "simulate.noise")
    if "minimizer" in cfg:
        _check_keys(cfg["minimizer"], set(MinimizerConfig.__dataclass_fields__), "minimizer")
    bad = set(cfg.get("outputs", [])) - OUTPUTS
    if bad:
        raise ConfigError(f"outputs: unknown entries {sorted(bad)}; allowed {sorted(OUTPUTS)}")
    return cfg


def _minimizer(cfg: dict, method: str | None = None) -> MinimizerConfig | None:
    opts = dict(cfg.get("minimizer", {}))
    if method is not None:
        opts["method"] = method
    return MinimizerConfig(**opts) if opts else None


def _inline_spec(p: dict, cfg: dict, k: float, method: str | None) -> ProblemSpec:
    for key in ("domain", "dim", "dynamics", "control", "cost"):
        if key not in p:
            raise ConfigError(f"problem: missing key {key!r}")
    if p["dynamics"] not in DYNAMICS:
        raise ConfigError(f"problem.dynamics: unknown {p['dynamics']!r}; choose from {sorted(DYNAMICS)}")
    dyn = DYNAMICS[p["dynamics"]]()
    ctrl = p["control"]
    _check_keys(ctrl, {"kind", "radius", "bounds"}, "problem.control")
    if ctrl.get("kind") == "ball":
        U = ControlSet.ball(dyn.m, ctrl.get("radius", 1.0))
    elif ctrl.get("kind") == "box":
        U = ControlSet.symmetric_box(np.broadcast_to(np.asarray(ctrl.get("bounds", 1.0), dtype=float), (dyn.m,)))
    else:
        raise ConfigError("problem.control.kind must be 'ball' or 'box'")
    cost_opts = dict(p["cost"])
    _check_keys(cost_opts, set(RunningCost.__dataclass_fields__), "problem.cost")
    if "gamma1" in cfg:
        cost_opts["gamma1"] = cfg["gamma1"]
    cost = RunningCost(**cost_opts)
    if ("h" in p) == ("h_factor" in p):
        raise ConfigError("problem: give exactly one of 'h' and 'h_factor'")
    h = p["h"] if "h" in p else p["h_factor"] * k
    target = None
    if "target" in p:
        t = p["target"]
        _check_keys(t, set(TargetSet.__dataclass_fields__), "problem.target")
        target = TargetSet(**{key: tuple(v) if isinstance(v, list) else v for key, v in t.items()})
    a, b = p["domain"]
    return ProblemSpec(
        grid=Grid.box(a, b, int(p["dim"]), k), dyn=dyn, U=U, cost=cost, h=h, mode=p.get("mode", "infinite_horizon"),
        target=target, minimizer=_minimizer(cfg, method) or MinimizerConfig(), **cfg.get("solver", {}),
    )


def make_spec(cfg: dict, k: float | None = None, method: str | None = None) -> ProblemSpec:
    k = k if k is not None else cfg.get("k")
    p = cfg["problem"]
    try:
        if isinstance(p, str):
            return build(p, k=k, minimizer=_minimizer(cfg, method), gamma1=cfg.get("gamma1"), **cfg.get("solver", {}))
        if k is None:
            raise ConfigError("inline problems need 'k'")
        return _inline_spec(p, cfg, float(k), method)
    except (KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def has_exact_solution(spec: ProblemSpec) -> bool:
    return (
        spec.dyn.name == "eikonal" and spec.U.is_ball and spec.U.radius == 1.0 and spec.mode == "infinite_horizon"
        and spec.cost.gamma1 == 0 and spec.cost.state_weight == 0.5 and np.allclose(spec.grid.lo, -spec.grid.hi)
    )


def error_report(spec: ProblemSpec, V, U) -> dict:
    sol = ExactEikonalSolution(spec.cost.lam, spec.cost.gamma2)
    ev = error_norms(V, lambda x: exact_value(sol, x))
    eu = error_norms(U, lambda x: exact_control(sol, x))
    return {"L1_v": ev["L1"], "mean_v": ev["mean"], "L1_u": eu["L1"], "mean_u": eu["mean"]}


def _write_field(field, out: Path, stem: str, fmt: str):
    if fmt == "vtk":
        return write_field_vtk(field, out / f"{stem}.vtk", stem)
    return write_field_csv(field, out / f"{stem}.csv")


# ------------------------------------------------------------------ commands


def cmd_solve(cfg: dict, args) -> int:
    spec = make_spec(cfg)
    rep = value_iteration(spec, workers=args.workers)
    U = control_field(rep.V, spec)
    outputs = set(cfg.get("outputs", ["value", "control", "report"]))
    if "value" in outputs:
        _write_field(rep.V, args.out, "value", args.format)
    if "control" in outputs:
        _write_field(U, args.out, "control", args.format)
    summary = {
        "problem": spec.name or "inline", "method": spec.method, "k": spec.grid.k, "h": spec.h,
        "converged": rep.converged, "sweeps": rep.sweeps, "final_residual": rep.residual_history[-1],
        "unconverged_solves": rep.unconverged_solves,
    }
    if has_exact_solution(spec):
        summary.update(error_report(spec, rep.V, U))
    if "report" in outputs:
        (args.out / "report.json").write_text(json.dumps(summary, indent=2) + "\n")
        write_table_csv(
            [{"sweep": i + 1, "residual": r, "avg_subiterations": s}
             for i, (r, s) in enumerate(zip(rep.residual_history, rep.avg_subiterations))],
            args.out / "history.csv",
        )
    print(json.dumps(summary))
    if not rep.converged:
        print(f"value iteration did not converge within {spec.max_sweeps} sweeps", file=sys.stderr)
        return 1
    return 0


def cmd_simulate(cfg: dict, args) -> int:
    spec = make_spec(cfg)
    sim = cfg.get("simulate", {})
    if "x0" not in sim or "steps" not in sim:
        raise ConfigError("simulate: 'x0' and 'steps' are required")
    rep = value_iteration(spec, workers=args.workers)
    law = Feedback(rep.V, spec)
    noise_cfg = sim.get("noise", {})
    mode = sim.get("mode", "closed_loop")
    modes = ["closed_loop", "open_loop"] if mode == "both" else [mode]
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    seeds = np.random.SeedSequence(seed).generate_state(int(sim.get("runs", 1)))
    rows = []
    for run, s in enumerate(seeds):
        noise = NoiseSpec(noise_cfg.get("structural", 0.0), noise_cfg.get("output", 0.0), int(s))
        for m in modes:
            traj = simulate(rep.V, spec, sim["x0"], int(sim["steps"]), noise, m, law=law)
            write_trajectory_csv(traj, args.out / f"trajectory_{m}_{run:03d}.csv")
            rows.append({"run": run, "mode": m, "cost": traj.realized_cost,
                         "final_distance": float(np.linalg.norm(traj.states[-1])), "clamp_events": traj.clamp_events})
    write_table_csv(rows, args.out / "simulations.csv")
    print(json.dumps({"runs": len(seeds), "modes": modes, "converged": rep.converged}))
    return 0 if rep.converged else 1


def cmd_convergence(cfg: dict, args) -> int:
    conv = cfg.get("convergence", {})
    ks = conv.get("ks", [cfg.get("k", 0.05)])
    methods = conv.get("methods", [None])
    rows = []
    ok = True
    for method in methods:
        for k in ks:
            spec = make_spec(cfg, k=k, method=method)
            t0 = time.perf_counter()
            rep = value_iteration(spec, workers=args.workers)
            U = control_field(rep.V, spec)
            row = {"k": spec.grid.k, "method": spec.method, "sweeps": rep.sweeps,
                   "wall_time": time.perf_counter() - t0}
            if has_exact_solution(spec):
                row.update(error_report(spec, rep.V, U))
            ok &= rep.converged
            rows.append(row)
            print(json.dumps(row))
    write_table_csv(rows, args.out / "convergence.csv", CONVERGENCE_COLUMNS)
    return 0 if ok else 1


def bench_instances(family: str, control: str, n: int, gamma: float, rng: np.random.Generator):
    """Random problems ``1/2 |u|^2 + L . u + gamma |u|_1`` and their exact minimisers.

    ``control`` is ``ball`` (unit disk) or ``box`` (the unit square ``[0, 1]^2``).
    The minimiser is the soft-thresholded ``-L`` mapped onto the set.
    """
    U = ControlSet.ball(2) if control == "ball" else ControlSet.box([0.0, 0.0], [1.0, 1.0])
    sectors = [s for s in decompose(eikonal(2), U, np.zeros(2)) if s.active]
    g = gamma if family == "quadratic_l1" else 0.0
    out = []
    for _ in range(n):
        L = rng.uniform(-2.0, 2.0, 2)
        y = np.sign(-L) * np.maximum(np.abs(L) - g, 0.0)
        if control == "ball":
            exact = y / max(1.0, np.linalg.norm(y))
        else:
            exact = np.clip(y, 0.0, 1.0)
        costs = [LocalCost(np.ones(2), L, 0.0, np.full(2, g), sector=s) for s in sectors]
        out.append((costs, exact))
    return U, out


def _comparison_config(U: ControlSet, n: int) -> MinimizerConfig:
    if U.is_ball:
        n_r = max(1, int(round(np.sqrt(n / 8.0))))
        return MinimizerConfig(method="comparison", n_theta=max(4, n // n_r), n_r=n_r)
    return MinimizerConfig(method="comparison", n_box=max(2, int(round(np.sqrt(n)))))


def cmd_bench(cfg: dict, args) -> int:
    b = cfg.get("bench", {})
    family = b.get("family", "quadratic")
    control = b.get("control", "ball")
    if family not in ("quadratic", "quadratic_l1") or control not in ("ball", "box"):
        raise ConfigError("bench: family must be quadratic|quadratic_l1 and control ball|box")
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    rng = np.random.default_rng(seed)
    U, instances = bench_instances(family, control, int(b.get("instances", 100)), float(b.get("gamma", 0.1)), rng)
    default_methods = {("quadratic", "ball"): ["chambolle_pock", "ssn_smooth"],
                       ("quadratic", "box"): ["chambolle_pock", "ssn_l1_box"],
                       ("quadratic_l1", "ball"): ["ssn_l1_ball", "splitting"],
                       ("quadratic_l1", "box"): ["ssn_l1_box", "splitting"]}[(family, control)]
    methods = b.get("methods", default_methods)
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"bench.methods: unknown {m!r}")
    runs = [(m, MinimizerConfig(method=m, tol=t, warm_start="none"), t)
            for m in methods if m != "comparison" for t in b.get("tolerances", [1e-4])]
    runs += [(f"comparison ({n} points)", _comparison_config(U, int(n)), None) for n in b.get("comparison_points", [2000, 10000])]
    rows = []
    for label, mcfg, tol in runs:
        its, errs, wall = [], [], 0.0
        for costs, exact in instances:
            t0 = time.perf_counter()
            res = minimize_node(costs, mcfg)
            wall += time.perf_counter() - t0
            its.append(res.iterations)
            errs.append(float(np.linalg.norm(res.u_star - exact)))
        rows.append({"algorithm": label, "tolerance": "" if tol is None else tol,
                     "iterations": float(np.mean(its)) if tol is not None else "",
                     "wall_time": wall / len(instances), "l2_error": float(np.mean(errs)), "l2_error_max": float(np.max(errs))})
        print(json.dumps(rows[-1]))
    if "oracle_resolution" in b:
        res_n = int(b["oracle_resolution"])
        errs = [float(np.linalg.norm(min((oracle(c, resolution=res_n) for c in costs), key=lambda r: r.value).u_star - exact))
                for costs, exact in instances]
        rows.append({"algorithm": f"oracle ({res_n} points)", "tolerance": "", "iterations": "", "wall_time": "",
                     "l2_error": float(np.mean(errs)), "l2_error_max": float(np.max(errs))})
    write_table_csv(rows, args.out / "bench.csv",
                    ["algorithm", "tolerance", "iterations", "wall_time", "l2_error", "l2_error_max"])
    return 0


COMMANDS = {"solve": cmd_solve, "simulate": cmd_simulate, "convergence": cmd_convergence, "bench-minimizers": cmd_bench}


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slhjb", description="Semi-Lagrangian HJB solver with local optimisation.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("config", type=Path, help="JSON run configuration")
    ap.add_argument("--workers", type=int, default=os.cpu_count(), help="threads for parallel sweeps")
    ap.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory")
    ap.add_argument("--format", choices=("csv", "vtk"), default="csv", help="field export format")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        args.out.mkdir(parents=True, exist_ok=True)
        set_workers(args.workers)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
