"""CSV and legacy-VTK export of grid fields, trajectories and convergence tables."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .grid import Grid, ScalarField, VectorField
from .synthesis import Trajectory


def _columns(field) -> tuple[np.ndarray, list[str]]:
    if isinstance(field, ScalarField):
        return field.values[:, None], ["value"]
    return field.values, [f"u_{j + 1}" for j in range(field.m)]


def write_field_csv(field, path) -> Path:
    """Node coordinates plus values, one row per node in row-major order.

    Floats are written with ``repr`` so reading back reproduces them bit for bit.
    """
    path = Path(path)
    grid = field.grid
    vals, names = _columns(field)
    x = grid.nodes()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x_{i + 1}" for i in range(grid.dim)] + names)
        for xi, vi in zip(x, vals):
            w.writerow([repr(float(a)) for a in xi] + [repr(float(b)) for b in vi])
    return path


def read_field_csv(path, grid: Grid):
    """Inverse of :func:`write_field_csv` for a known grid."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    if len(body) != grid.size:
        raise ValueError(f"expected {grid.size} rows, found {len(body)}")
    vals = body[:, grid.dim :]
    if header[grid.dim :] == ["value"]:
        return ScalarField(grid, vals[:, 0])
    return VectorField(grid, vals)


def write_field_vtk(field, path, name: str = "value") -> Path:
    """Legacy ASCII VTK structured-points dataset (x fastest, as VTK expects)."""
    path = Path(path)
    grid = field.grid
    counts = list(grid.counts) + [1] * (3 - grid.dim)
    origin = list(grid.lo) + [0.0] * (3 - grid.dim)
    vals, _ = _columns(field)
    # our node order is row-major with the last axis fastest; VTK wants the first axis fastest
    order = np.arange(grid.size).reshape(grid.counts).transpose().ravel()
    vals = vals[order]
    lines = [
        "# vtk DataFile Version 3.0",
        name,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS " + " ".join(str(c) for c in counts),
        "ORIGIN " + " ".join(repr(float(o)) for o in origin),
        "SPACING " + " ".join([repr(grid.k)] * 3),
        f"POINT_DATA {grid.size}",
    ]
    if vals.shape[1] == 1:
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [repr(float(v)) for v in vals[:, 0]]
    else:
        padded = np.zeros((len(vals), 3))
        padded[:, : min(3, vals.shape[1])] = vals[:, :3]
        lines.append(f"VECTORS {name} double")
        lines += [" ".join(repr(float(c)) for c in row) for row in padded]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_trajectory_csv(traj: Trajectory, path) -> Path:
    """Columns ``t, x_1..x_d, u_1..u_m, cost``; the last row repeats the final control."""
    path = Path(path)
    d, m = traj.states.shape[1], traj.controls.shape[1]
    controls = np.vstack([traj.controls, traj.controls[-1:] if len(traj.controls) else np.zeros((1, m))])
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"x_{i + 1}" for i in range(d)] + [f"u_{j + 1}" for j in range(m)] + ["cost"])
        for t, x, u, c in zip(traj.times, traj.states, controls, traj.cost):
            w.writerow([repr(float(t))] + [repr(float(a)) for a in x] + [repr(float(b)) for b in u] + [repr(float(c))])
    return path


CONVERGENCE_COLUMNS = ["k", "method", "L1_v", "L1_u", "mean_v", "mean_u", "sweeps", "wall_time"]


def write_table_csv(rows: list[dict], path, columns: list[str] | None = None) -> Path:
    path = Path(path)
    columns = columns or list(rows[0].keys())
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({c: (repr(v) if isinstance(v, float) else v) for c, v in row.items()})
    return path
