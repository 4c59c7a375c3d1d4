"""Deviation of the surgered spectrum from the limit spectrum on flat tori.

Writes one CSV and one gnuplot table per (torus, attachment) pair.
"""

import argparse
from pathlib import Path

from surfspec import reports
from surfspec.cli import parse_list
from surfspec.config import RunConfig, config_hash
from surfspec.surgery import convergence_sweep, standard_base

UNITS = {"eps": "length", "h": "length", "k": "1", "eigenvalue": "1/length^2", "limit": "1/length^2",
         "relative": "1"}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--base", default="square_torus", choices=["square_torus", "equilateral_torus"])
    p.add_argument("--res", type=int, default=60)
    p.add_argument("--eps", default="0.08,0.04,0.02")
    p.add_argument("--h", default="0.15,0.3,0.45")
    p.add_argument("--out", default="out/sweeps")
    args = p.parse_args(argv)
    eps, hs = parse_list(args.eps), parse_list(args.h)
    base = standard_base(args.base, args.res)
    h = config_hash(RunConfig(command="sweep", eps=eps, h=hs, res=args.res))
    for kind in ("handle", "cross_cap"):
        res = convergence_sweep(base, kind, hs, eps)
        rows = [(e, hh, k, lam, nu, r)
                for (e, hh) in res.grid if (e, hh) in res.relative
                for k, (lam, nu, r) in enumerate(zip(res.eigenvalues[(e, hh)], res.limit[(e, hh)],
                                                     res.relative[(e, hh)]))]
        title = f"{args.base} + {kind}, res {args.res}"
        out = Path(args.out)
        reports.write_csv(out / f"{args.base}_{kind}.csv", title, h, tuple(UNITS), rows, UNITS)
        reports.write_table(out / f"{args.base}_{kind}.dat", title, h, tuple(UNITS), rows, UNITS)
        for hh in hs:
            series = ", ".join(f"{res.max_relative(e, hh):.4f}" for e in sorted(eps, reverse=True))
            print(f"{kind:9s} h={hh:<5} max relative deviation over eps: {series}  monotone={res.monotone[hh]}")


if __name__ == "__main__":
    main()
