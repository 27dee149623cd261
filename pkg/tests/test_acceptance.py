"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed with output capture disabled so they show up in the log.
"""

import subprocess
import sys
import time

import pytest

from bitree import cli, suites

LIMITS = {1: 10, 2: 5, 3: 60, 4: 10, 5: 120, 6: 30, 7: 120, 8: 60, 9: 60}


@pytest.fixture
def report(capsys):
    def emit(k: int, ok: bool, elapsed: float, detail: str):
        within = elapsed < LIMITS[k]
        verdict = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print(f"\n[criterion {k}] {verdict}  {elapsed:.2f}s (limit {LIMITS[k]}s)  {detail}")
        assert ok, detail
        assert within, f"criterion {k} took {elapsed:.1f}s"
    return emit


def timed(fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t


def test_criterion_1_operator_exactness(report):
    res, el = timed(suites.operator_exactness, max_depth=2, random_depth=6, random_cases=1000, seed=0)
    modes = {r["mode"] for r in res["rows"]}
    cases = sum(r["cases"] for r in res["rows"])
    report(1, res["pass"], el, f"{cases} cases, modes={sorted(modes)}")


def test_criterion_2_tree_max_principle(report):
    res, el = timed(suites.tree_principles, trials=1000, seed=0)
    report(2, res["pass"], el,
           f"failures: maxE={res['max_principle_failures']} one-param={res['one_param_failures']} "
           f"normalized={res['potential_bound_failures']}")


def test_criterion_3_majorant(report):
    res, el = timed(suites.majorant_sweep, trials=500, max_depth=5, seed=1)
    report(3, res["pass"], el,
           f"failures={res['failures']} worst energy ratio={res['worst_energy_ratio']:.3f}/36 "
           f"non-vacuous cases={res['cases_with_positive_truncated_energy']} "
           f"claim-1 domain nodes={res['claim1_domain_nodes']}")


def test_criterion_4_lemmas(report):
    res, el = timed(suites.lemma_suite, trials=1000, seed=0)
    report(4, res["pass"], el,
           f"superadditive={res['superadditive_failures']} kernel={res['kernel_plain_failures']} "
           f"kernel strong={res['kernel_strong_failures']}")


def test_criterion_5_scaling(report):
    res, el = timed(suites.scaling_sweep)
    rows = res["rows"]
    report(5, res["pass"], el,
           f"{len(rows)} measures, {sum(r['ladder_rows'] for r in rows)} ladder rows, "
           f"{sum(r['two_scale_pairs'] for r in rows)} two-scale pairs, sup corollary c={res['corollary_c_sup']:.3f}")


def test_criterion_6_dense_crosscheck(report):
    t = time.perf_counter()
    res = [suites.dense_crosscheck(M) for M in (2, 3)]
    el = time.perf_counter() - t
    report(6, all(r["equal"] for r in res), el,
           ", ".join(f"M={r['M']}: {r['nodes']} bi-nodes equal={r['equal']}" for r in res))


def test_criterion_7_counterexample(report):
    res, el = timed(suites.counterexample_range, range(5, 11), 1, 8, 0)
    rows = res["rows"]
    ok = (res["pass"] and res["ratio_monotone"]
          and all(r["flatness_pass"] and r["blowup_pass"] and r["counting_pass"] for r in rows))
    ratios = " ".join(f"{r['ratio']:.3f}" for r in rows)
    report(7, ok, el, f"ratios M=5..10: {ratios}; V(omega0) at M=10 = {rows[-1]['V_at_omega0']:.4f}")


def test_criterion_8_capacity(report):
    res, el = timed(suites.capacity_suite, M=2, levels=12, small_cases=200, seed=0)
    report(8, res["pass"], el,
           f"cap(root)={res['cap_root']:.9f} cap(1,1)={res['cap_level_1_1']:.9f} "
           f"kkt={res['worst_kkt_residual']:.1e} non-increasing={res['non_increasing']}")


DETERMINISM_RUNS = [
    ["selfcheck", "--trials", "100", "--seed", "3"],
    ["majorant", "--trials", "60", "--seed", "2"],
    ["scaling", "--depth", "3", "--trials", "1"],
    ["counterexample", "--M", "5:7", "--format", "csv"],
    ["capacity", "--trials", "20"],
]


def test_criterion_9_determinism(report, tmp_path):
    t = time.perf_counter()
    same = []
    for i, args in enumerate(DETERMINISM_RUNS):
        a, b = tmp_path / f"a{i}", tmp_path / f"b{i}"
        assert cli.main(args + ["--out", str(a)]) == 0
        proc = subprocess.run([sys.executable, "-m", "bitree", *args, "--out", str(b)], capture_output=True)
        assert proc.returncode == 0, proc.stderr
        same.append(a.read_bytes() == b.read_bytes())
    el = time.perf_counter() - t
    report(9, all(same), el, f"{sum(same)}/{len(same)} commands byte-identical across processes")
