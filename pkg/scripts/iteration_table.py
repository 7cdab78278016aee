"""Outer-iteration counts at eps = 0.0067 for eta = eps^p."""

import argparse

from tfpainleve.config import SolverConfig
from tfpainleve.coupled import equation_residuals, iterate_coupled
from tfpainleve.numerics import sup
from tfpainleve.painleve import solve_hastings_mcleod


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.0067)
    ap.add_argument("--h", type=float, default=0.01)
    ap.add_argument("--exps", type=float, nargs="+", default=[1.0, 0.5, 0.25, 0.15, 0.05, 0.02])
    ap.add_argument("--outer-max", type=int, default=50)
    args = ap.parse_args()
    cfg = SolverConfig(h=args.h, outer_max=args.outer_max)
    grid = cfg.coupled_grid(args.eps)
    hm = solve_hastings_mcleod(grid, cfg)
    print(f"{'p':>6} {'eta':>10} {'conv':>5} {'iters':>5} {'sup|R|':>11} {'r1':>9} {'r2':>9}")
    for p in args.exps:
        s = iterate_coupled(args.eps, args.eps**p, cfg, grid, hm)
        r1, r2 = equation_residuals(s)
        print(f"{p:6.2f} {s.eta:10.6f} {str(s.converged):>5} {s.iterations:5d} "
              f"{sup(s.R.values):11.4e} {r1:9.2e} {r2:9.2e}")


if __name__ == "__main__":
    main()
