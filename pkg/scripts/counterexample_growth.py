"""Corner potential against the support maximum as M grows.

    python scripts/counterexample_growth.py --M 2:12 > growth.csv
"""

import argparse
import sys

from bitree import counterexample as cx
from bitree.reports import dumps_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--M", default="2:12", help="LO:HI inclusive")
    ap.add_argument("--delta", default="1")
    args = ap.parse_args()
    lo, hi = (int(x) for x in args.M.split(":"))
    rows = []
    for M in range(lo, hi + 1):
        m = cx.build_counterexample(cx.CoarseParams(M, args.delta))
        top, _ = cx.support_maximum(m)
        v0 = cx.sparse_potential_at(m, cx.omega0(m.params))
        rows.append([M, m.params.N, float(v0), float(top), float(v0 / top), float(m.params.delta * (M - 4) / 8)])
    sys.stdout.write(dumps_csv(["M", "N", "V_at_omega0", "max_on_support", "ratio", "lower_bound"], rows))


if __name__ == "__main__":
    main()
