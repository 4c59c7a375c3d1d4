"""Locate the eigenvalue crossing for a cross cap on the unit-area equilateral torus."""

import argparse
from pathlib import Path

from surfspec import reports
from surfspec.config import RunConfig, config_hash
from surfspec.surgery import height_scan, standard_base


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--eps", type=float, nargs="+", default=[0.04, 0.02, 0.01])
    p.add_argument("--res", type=int, default=30)
    p.add_argument("--out", default="out/heightscan")
    args = p.parse_args(argv)
    base = standard_base("equilateral_torus", args.res)
    units = {"h": "length", "lambda_1": "1/length^2", "lambda_2": "1/length^2", "gap": "1", "branch_gap": "1",
             "fraction": "1"}
    for e in args.eps:
        r = height_scan(base, "cross_cap", e)
        rows = [(pt.h, pt.eigenvalues[1], pt.eigenvalues[2], pt.gap, pt.branch_gap, pt.fraction) for pt in r.points]
        reports.write_csv(Path(args.out) / f"scan_eps{e:g}.csv", f"height scan eps={e:g}",
                          config_hash(RunConfig(command="heightscan", eps=(e,), res=args.res)), tuple(units), rows,
                          units)
        print(f"eps={e:g}: h_eps={r.h_epsilon:.4f} (h*={r.h_star:.4f}), gap={r.gap:.3e}, "
              f"branch gap={r.branch_gap:.3e}, {r.status}")


if __name__ == "__main__":
    main()
