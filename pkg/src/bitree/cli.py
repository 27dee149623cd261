"""Command-line entry point.

Exit status: 0 when every asserted certificate passes, 1 when one fails (the
report is still written, failing entries included), 2 for usage errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

import numpy as np

from . import capacity as cap
from . import counterexample as cx
from . import potentials as pt
from . import scaling as sc
from . import suites
from .certificates import PreconditionError
from .reports import dumps_csv, dumps_json, payload, write_atomic, write_meta
from .tree import BiShape

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CSV_HELP = """\
CSV columns by command:
  selfcheck       kind, depth, cases, mode, pass
  potential       node1_level, node1_index, node2_level, node2_index, mu, istar_mu, potential
  majorant        case, depth1, depth2, delta, lambda, truncated_energy, energy_ratio, pass
  scaling         mu_id, delta, energy_delta, bound_surrogate, bound_tau_<t>..., pass_surrogate, pass_tau_<t>...
  counterexample  M, N, delta, V_at_omega0, max_on_support_samples, ratio, flatness_pass, blowup_pass
  capacity        lambda, capacity
The random seed and all parameters are recorded in every JSON report; run
metadata (timestamp, elapsed time) goes to <out>.meta.json.
Set BITREE_THREADS to fan sweeps out over worker threads.
"""


class UsageError(Exception):
    pass


def parse_range(text: str) -> list[int]:
    """``"5"`` or ``"5:10"`` (inclusive)."""
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO:HI, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def parse_ladder(text: str) -> tuple[int, int, int]:
    try:
        lo, hi, steps = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI:STEPS, got {text!r}") from None
    if not (0 <= lo <= hi and steps >= 1):
        raise argparse.ArgumentTypeError(f"need 0 <= LO <= HI and STEPS >= 1, got {text!r}")
    return lo, hi, steps


def parse_taus(text: str) -> tuple[float, ...]:
    try:
        taus = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None
    if not all(0 < t < 1 for t in taus):
        raise argparse.ArgumentTypeError("every tau must lie in (0, 1)")
    return taus


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bitree", description="Certify potential-theoretic inequalities on dyadic trees and bi-trees.",
        epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("selfcheck", parents=[common], help="DP operators against brute-force oracles")
    p.add_argument("--max-depth", type=int, default=2, help="exhaustive {0,1,2} suite up to this depth")
    p.add_argument("--random-depth", type=int, default=6)
    p.add_argument("--trials", type=int, default=1000, help="seeded random cases")

    p = sub.add_parser("potential", parents=[common], help="potential, energies and maximum principle on one measure")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--depth2", type=int)
    p.add_argument("--kind", choices=[k.value for k in sc.MeasureKind], default="sparse_random")
    p.add_argument("--delta", type=float, default=1.0)

    p = sub.add_parser("majorant", parents=[common], help="randomized majorant certification sweep")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--depth", type=int, default=5, help="maximum bi-tree depth")

    p = sub.add_parser("scaling", parents=[common], help="truncated-energy ladders and scaling bounds")
    p.add_argument("--depth", type=int, default=5, help="maximum bi-tree depth (from 2)")
    p.add_argument("--tau", type=parse_taus, default=(0.1, 0.25, 0.5), help="comma-separated list")
    p.add_argument("--ladder", type=parse_ladder,
                   help="geometric grid A*2^-LO .. A*2^-HI in STEPS points (default: every jump of E_delta)")
    p.add_argument("--trials", type=int, default=3, help="seeds per measure family")

    p = sub.add_parser("counterexample", parents=[common], help="flat-on-support measure with corner blow-up")
    p.add_argument("--M", type=parse_range, default=[5], help="M or LO:HI")
    p.add_argument("--delta", type=Fraction, default=Fraction(1))
    p.add_argument("--samples", type=int, default=8, help="random support leaves per quadrant")

    p = sub.add_parser("capacity", parents=[common], help="bi-tree capacity of super-level sets")
    p.add_argument("--M", type=int, default=2, help="dense counterexample instance (M <= 3)")
    p.add_argument("--lambda", dest="lam", type=int, default=12, help="number of super-level thresholds")
    p.add_argument("--trials", type=int, default=200, help="small problems checked against brute force")
    return ap


# -- commands --------------------------------------------------------------------


def _run_selfcheck(a):
    if a.max_depth < 0 or a.random_depth < 0 or a.trials < 0:
        raise UsageError("depths and trials must be non-negative")
    if a.max_depth > 2:
        raise UsageError("exhaustive suite is limited to --max-depth <= 2")
    body = suites.operator_exactness(a.max_depth, a.random_depth, a.trials, a.seed)
    rows = [[r["kind"], "x".join(map(str, r["depth"])), r["cases"], r["mode"], int(r["pass"])] for r in body["rows"]]
    return body, (["kind", "depth", "cases", "mode", "pass"], rows)


def _run_potential(a):
    d2 = a.depth if a.depth2 is None else a.depth2
    if not (0 <= a.depth <= 8 and 0 <= d2 <= 8):
        raise UsageError("dense potentials need 0 <= depth <= 8")
    if a.delta <= 0:
        raise UsageError("--delta must be positive")
    shape = BiShape.of(a.depth, d2)
    mu = sc.generate_measure(a.kind, shape, a.seed)
    b = pt.build_potential(mu)
    tb = pt.build_truncated(b, a.delta)
    viol = pt.find_bi_violation(b.istar_mu)
    energy_identity = bool(np.isclose(b.energy, pt.energy_via_potential(b), rtol=1e-12, atol=0))
    trunc_identity = bool(np.isclose(tb.truncated_energy, pt.truncated_energy_via_potential(b, tb),
                                     rtol=1e-12, atol=1e-300))
    body = {
        "kind": a.kind, "depths": [a.depth, d2], "mass": b.mass, "energy": b.energy,
        "max_potential": float(b.potential.max()), "delta": a.delta,
        "level_set_size": int(tb.indicator.sum()), "truncated_energy": tb.truncated_energy,
        "energy_identity": energy_identity, "truncated_energy_identity": trunc_identity,
        "bi_max_principle": viol.to_dict(),
        "pass": energy_identity and trunc_identity,
    }
    rows = [[n.first.level, n.first.index, n.second.level, n.second.index,
             float(mu[n.heap]), float(b.istar_mu[n.heap]), float(b.potential[n.heap])]
            for n in shape.nodes()]
    hdr = ["node1_level", "node1_index", "node2_level", "node2_index", "mu", "istar_mu", "potential"]
    return body, (hdr, rows)


def _run_majorant(a):
    if a.trials < 0 or not 1 <= a.depth <= 7:
        raise UsageError("need --trials >= 0 and 1 <= --depth <= 7")
    body = suites.majorant_sweep(a.trials, a.depth, a.seed)
    hdr = ["case", "depth1", "depth2", "delta", "lambda", "truncated_energy", "energy_ratio", "pass"]
    rows = [[c[k] if k != "pass" else int(c[k]) for k in hdr] for c in body["cases"]]
    return body, (hdr, rows)


def _run_scaling(a):
    if not 2 <= a.depth <= 7 or a.trials < 1:
        raise UsageError("need 2 <= --depth <= 7 and --trials >= 1")
    seeds = tuple(a.seed + i for i in range(a.trials))
    deltas = None
    if a.ladder:
        lo, hi, steps = a.ladder
        deltas = ("grid", lo, hi, steps)
    body = _scaling_body(range(2, a.depth + 1), seeds, a.tau, deltas)
    reports = body.pop("reports")
    hdr, rows = None, []
    for rep, _, _ in reports:
        lines = rep.to_csv().splitlines()
        hdr = ["mu_id"] + lines[0].split(",")
        rows += [[rep.mu_id] + ln.split(",") for ln in lines[1:]]
    return body, (hdr or ["mu_id"], rows)


def _scaling_body(depths, seeds, taus, ladder):
    if ladder is None:
        return suites.scaling_sweep(tuple(depths), seeds, taus)
    _, lo, hi, steps = ladder
    # the grid depends on A, so ladders are built per measure
    jobs = [(k, d, s) for k in sc.MeasureKind for d in depths for s in seeds]
    out = {"rows": [], "reports": []}
    ok = True
    for kind, d, s in jobs:
        mu = sc.normalize_for_theorem(sc.generate_measure(kind, BiShape.of(d), s))
        b = pt.build_potential(mu)
        grid = sc.default_deltas(b.energy / b.mass, lo, hi, steps)
        res = suites.scaling_sweep((d,), (s,), taus, kinds=(kind,), deltas=grid)
        out["rows"] += res["rows"]
        out["reports"] += res["reports"]
        ok = ok and res["pass"]
    out.update({"suite": "scaling", "depths": list(depths), "seeds": list(seeds), "taus": list(taus),
                "ladder": [lo, hi, steps],
                "corollary_c_sup": max((r["corollary_c"] or 0.0 for r in out["rows"]), default=0.0),
                "pass": ok})
    return out


def _run_counterexample(a):
    if min(a.M) < 2 or max(a.M) > 16:
        raise UsageError("need 2 <= M <= 16")
    if a.delta <= 0 or a.samples < 1:
        raise UsageError("need --delta > 0 and --samples >= 1")
    body = suites.counterexample_range(a.M, a.delta, a.samples, a.seed)
    hdr = ["M", "N", "delta", "V_at_omega0", "max_on_support_samples", "ratio", "flatness_pass", "blowup_pass"]
    rows = [[r[k] if not k.endswith("_pass") else int(r[k]) for k in hdr] for r in body["rows"]]
    return body, (hdr, rows)


def _run_capacity(a):
    if a.M not in (2, 3):
        raise UsageError("dense capacity instances need --M 2 or 3")
    if a.lam < 2 or a.trials < 0:
        raise UsageError("need --lambda >= 2 thresholds and --trials >= 0")
    try:
        body = suites.capacity_suite(a.M, a.lam, a.trials, a.seed)
    except cap.CapacityNotConverged as exc:
        body = {"suite": "capacity", "error": str(exc), "residuals": exc.residuals, "pass": False}
    rows = [[c["lambda"], c["capacity"]] for c in body.get("superlevel_curve", [])]
    return body, (["lambda", "capacity"], rows)


COMMANDS = {
    "selfcheck": _run_selfcheck,
    "potential": _run_potential,
    "majorant": _run_majorant,
    "scaling": _run_scaling,
    "counterexample": _run_counterexample,
    "capacity": _run_capacity,
}


def _config(a) -> dict:
    cfg = {k: v for k, v in vars(a).items() if k not in ("out", "format")}
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.items()}


def render(a) -> tuple[str, bool]:
    body, (hdr, rows) = COMMANDS[a.command](a)
    passed = bool(body.get("pass", False))
    if a.format == "csv":
        return dumps_csv(hdr, rows), passed
    return dumps_json(payload(a.command, _config(a), body, passed)), passed


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        suites.thread_count()
        text, passed = render(a)
    except (UsageError, PreconditionError, ValueError) as exc:
        print(f"bitree {a.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if a.out:
        write_atomic(a.out, text)
        write_meta(a.out, time.perf_counter() - t0, {"command": a.command, "seed": a.seed})
    else:
        sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
