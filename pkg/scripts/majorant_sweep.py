"""Large randomized majorant sweep with the ray diagnostics switched on.

Prints a JSON summary: claim failures, the worst energy ratio, how many
cases had a non-empty truncated energy, and the band lower-bound tally.
"""

import argparse
import sys

from bitree import suites
from bitree.reports import dumps_json


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=5000)
    ap.add_argument("--depth", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    res = suites.majorant_sweep(args.trials, args.depth, args.seed)
    res.pop("cases")
    sys.stdout.write(dumps_json(res))
    sys.exit(0 if res["pass"] else 1)


if __name__ == "__main__":
    main()
