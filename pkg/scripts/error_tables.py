"""Value and control errors against the exact eikonal solution for several methods and grid sizes."""

import argparse
import time
from pathlib import Path

from slhjb.io import CONVERGENCE_COLUMNS, write_table_csv
from slhjb.minimizers import MinimizerConfig
from slhjb.problems import build
from slhjb.reference import ExactEikonalSolution, error_norms, exact_control, exact_value
from slhjb.solver import value_iteration
from slhjb.synthesis import control_field


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--problem", default="test1", choices=["test1", "test2"])
    ap.add_argument("--ks", type=float, nargs="+", default=[0.05, 0.025])
    ap.add_argument("--methods", nargs="+", default=["ssn_smooth", "chambolle_pock", "comparison"])
    ap.add_argument("--out", type=Path, default=Path("errors.csv"))
    args = ap.parse_args()

    sol = ExactEikonalSolution()
    rows = []
    for method in args.methods:
        for k in args.ks:
            spec = build(args.problem, k=k, minimizer=MinimizerConfig(method=method))
            t0 = time.perf_counter()
            rep = value_iteration(spec)
            U = control_field(rep.V, spec)
            ev = error_norms(rep.V, lambda x: exact_value(sol, x))
            eu = error_norms(U, lambda x: exact_control(sol, x))
            rows.append({"k": k, "method": method, "L1_v": ev["L1"], "L1_u": eu["L1"], "mean_v": ev["mean"],
                         "mean_u": eu["mean"], "sweeps": rep.sweeps, "wall_time": time.perf_counter() - t0})
            print(f"{method:15s} k={k:<6} value {ev['mean']:.3e}  control {eu['mean']:.3e}  sweeps {rep.sweeps}")
    write_table_csv(rows, args.out, CONVERGENCE_COLUMNS)


if __name__ == "__main__":
    main()
