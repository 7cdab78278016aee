"""Conjecture-bound ratios and weighted norms of R across eps."""

import argparse

from tfpainleve.coupled import conjecture_bound_ratio, iterate_coupled, weighted_norms
from tfpainleve.numerics import sup
from tfpainleve.painleve import compute_w0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.02, 0.01, 0.0067, 0.005, 0.003])
    ap.add_argument("--q", type=float, default=1.0, help="eta = eps^q")
    args = ap.parse_args()
    print(f"{'eps':>8} {'sup|R|':>11} {'ratio':>9} {'ratio(eta=0)':>13} {'L2':>9} {'H1':>9}")
    for eps in args.eps:
        s = iterate_coupled(eps, eps**args.q)
        s0 = iterate_coupled(eps, 0.0)
        l2, h1 = weighted_norms(s.R, eps, compute_w0(s.nu0))
        print(f"{eps:8.4f} {sup(s.R.values):11.4e} {conjecture_bound_ratio(s, args.q):9.5f} "
              f"{conjecture_bound_ratio(s0, 2.0):13.5f} {l2:9.2e} {h1:9.2e}")


if __name__ == "__main__":
    main()
