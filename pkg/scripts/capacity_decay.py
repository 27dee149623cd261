"""Capacity of super-level sets {V >= lam} of the dense counterexample.

    python scripts/capacity_decay.py --M 3 --levels 16 > capacity.csv
"""

import argparse
import math
import sys

import numpy as np

from bitree import capacity as cap
from bitree import counterexample as cx
from bitree.potentials import build_potential
from bitree.reports import dumps_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--M", type=int, default=2, choices=(2, 3))
    ap.add_argument("--levels", type=int, default=16)
    args = ap.parse_args()
    m = cx.build_counterexample(cx.CoarseParams(args.M))
    V = build_potential(cx.dense_measure_scaled(m)).potential / float(cx.potential_scale(m.params))
    lams = np.linspace(V.min(), V.max(), args.levels)
    curve = cap.superlevel_capacities(V, lams)
    rows = [[lam, c, math.log(c) if c > 0 else ""] for lam, c in curve]
    sys.stdout.write(dumps_csv(["lambda", "capacity", "log_capacity"], rows))
    if not cap.is_non_increasing([c for _, c in curve]):
        sys.exit(1)


if __name__ == "__main__":
    main()
