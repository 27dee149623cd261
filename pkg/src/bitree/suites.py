"""Seeded certification suites shared by the command line and the tests.

Each suite returns a plain dict with a top-level ``pass`` flag. Per-case
randomness comes from ``SeedSequence(seed).spawn(n)``, so results do not
depend on thread scheduling; rows are always assembled in case order.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import capacity as cap
from . import counterexample as cx
from . import hardy
from . import majorant as mj
from . import potentials as pt
from . import scaling as sc
from .tree import BI_ROOT, BiNodeRef, BiShape

THREADS_ENV = "BITREE_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def ordered_map(fn, items) -> list:
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def case_rngs(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


# -- operator exactness --------------------------------------------------------


def _batched_up(f):
    return hardy.up_sum_tree(hardy.up_sum_tree(f, axis=1), axis=2)


def _batched_down(f):
    return hardy.down_sum_tree(hardy.down_sum_tree(f, axis=1), axis=2)


def _batched_oracle(f, transpose: bool):
    P1 = hardy._order(f.shape[1])
    P2 = hardy._order(f.shape[2])
    if transpose:
        P1, P2 = P1.T, P2.T
    return np.einsum("ij,bjk,lk->bil", P1, f, P2)


def all_ternary(n_nodes: int) -> np.ndarray:
    """Every vector in ``{0, 1, 2} ** n_nodes`` as rows of an int64 array."""
    return np.array(list(itertools.product((0, 1, 2), repeat=n_nodes)), dtype=np.int64)


EXHAUSTIVE_LIMIT = 9


def operator_exactness(max_depth: int = 2, random_depth: int = 6, random_cases: int = 1000,
                       seed: int = 0) -> dict:
    """DP passes against the order-matrix oracles.

    Trees and bi-trees of depth ``<= max_depth``: every ``{0,1,2}`` function
    when the shape has at most ``EXHAUSTIVE_LIMIT`` nodes, otherwise every
    basis vector (the passes are integer-linear, so this covers all integer
    inputs) plus the random cases. Then ``random_cases`` seeded integer
    functions at depths up to ``random_depth``.
    """
    rows = []
    for d in range(max_depth + 1):
        n = (1 << (d + 1)) - 1
        F = all_ternary(n).T  # columns are functions
        P = hardy._order(n)
        ok = (np.array_equal(hardy.up_sum_tree(F), P @ F)
              and np.array_equal(hardy.down_sum_tree(F), P.T @ F))
        rows.append({"kind": "tree", "depth": [d], "cases": F.shape[1], "mode": "exhaustive", "pass": ok})
    for d1, d2 in itertools.product(range(max_depth + 1), repeat=2):
        s = BiShape.of(d1, d2)
        n = s.size
        if n <= EXHAUSTIVE_LIMIT:
            F = all_ternary(n).reshape(-1, *s.dims)
            mode = "exhaustive"
        else:
            F = np.eye(n, dtype=np.int64).reshape(n, *s.dims)
            mode = "basis"
        ok = (np.array_equal(_batched_up(F), _batched_oracle(F, False))
              and np.array_equal(_batched_down(F), _batched_oracle(F, True)))
        ok = ok and all(
            np.array_equal(op(F[i]), ref(F[i]))
            for i in range(min(len(F), 64))
            for op, ref in ((hardy.up_sum_1, hardy.up_sum_1_oracle),
                            (hardy.up_sum_2, hardy.up_sum_2_oracle),
                            (hardy.down_sum_1, hardy.down_sum_1_oracle),
                            (hardy.down_sum_2, hardy.down_sum_2_oracle))
        )
        rows.append({"kind": "bitree", "depth": [d1, d2], "cases": int(F.shape[0]), "mode": mode, "pass": bool(ok)})

    def one(rng):
        d1 = int(rng.integers(0, random_depth + 1))
        d2 = int(rng.integers(0, random_depth + 1))
        f = rng.integers(0, 3, size=BiShape.of(d1, d2).dims).astype(np.int64)
        return (np.array_equal(hardy.up_sum_bi(f), hardy.up_sum_bi_oracle(f))
                and np.array_equal(hardy.down_sum_bi(f), hardy.down_sum_bi_oracle(f))
                and np.array_equal(hardy.up_sum_tree(f[:, 0]), hardy.up_sum_tree_oracle(f[:, 0]))
                and np.array_equal(hardy.down_sum_tree(f[:, 0]), hardy.down_sum_tree_oracle(f[:, 0])))

    rand_ok = ordered_map(one, case_rngs(seed, random_cases))
    rows.append({"kind": "random", "depth": [random_depth], "cases": random_cases, "mode": "seeded",
                 "pass": all(rand_ok), "failures": rand_ok.count(False)})
    return {"suite": "operator_exactness", "seed": seed, "rows": rows,
            "pass": all(r["pass"] for r in rows)}


# -- simple-tree principles ------------------------------------------------------


def tree_principles(trials: int = 1000, max_depth: int = 8, seed: int = 0) -> dict:
    """Maximum principle, the one-parameter bound and the normalized
    potential bound on seeded integer tree measures (exact arithmetic)."""

    def one(rng):
        d = int(rng.integers(0, max_depth + 1))
        n = (1 << (d + 1)) - 1
        density = float(rng.choice([0.05, 0.2, 0.6]))
        mu = np.where(rng.random(n) < density, rng.integers(1, 9, n), 0).astype(np.int64)
        if not mu.any():
            mu[int(rng.integers(0, n))] = 1
        h = np.where(rng.random(n) < density, rng.integers(0, 5, n), 0).astype(np.int64)
        if not h.any():
            h[int(rng.integers(0, n))] = 1
        v = pt.tree_potential(mu)
        delta = int(rng.integers(1, int(v.max()) + 2))
        a = pt.check_tree_max_principle(h)
        b = pt.check_one_param_bound(mu, delta)
        c = pt.check_tree_potential_bound(mu)
        return a.passed, b.passed, c.passed

    res = ordered_map(one, case_rngs(seed, trials))
    out = {name: sum(1 for r in res if not r[i]) for i, name in
           enumerate(("max_principle_failures", "one_param_failures", "potential_bound_failures"))}
    return {"suite": "tree_principles", "seed": seed, "trials": trials, **out,
            "pass": not any(out.values())}


# -- majorant ----------------------------------------------------------------------


def majorant_sweep(trials: int = 500, max_depth: int = 5, seed: int = 1) -> dict:
    def one(rng):
        inp = mj.random_majorant_case(rng, max_depth)
        cert = mj.build_majorant(inp)
        parts = mj.majorant_parts(inp)
        return cert, parts

    res = ordered_map(one, case_rngs(seed, trials))
    keys = ("claim1_pass", "claim1_strong_pass", "claim1_local_pass", "claim2_pass", "claim3_pass")
    failures = {k: sum(1 for c, _ in res if not getattr(c, k)) for k in keys}
    worst = max(range(trials), key=lambda i: res[i][0].claim3_ratio) if trials else None
    nonvacuous = sum(1 for _, p in res if p.truncated.truncated_energy > 0)
    dom40 = sum(c.domain_sizes.get("V_delta_ge_40lam", 0) for c, _ in res)
    dom20 = sum(c.domain_sizes.get("V_delta_ge_20lam", 0) for c, _ in res)
    band_failures = 0
    band_cases = 0
    for c, p in res:
        r = mj.ray_summary(p, c.lam)
        band_cases += r["band_cases"]
        band_failures += r["band_bound_failures"]
    first_fail = next((i for i, (c, _) in enumerate(res) if not c.passed), None)
    case_rows = [
        {"case": i, "depth1": p.bundle.mu.shape[0].bit_length() - 1, "depth2": p.bundle.mu.shape[1].bit_length() - 1,
         "delta": c.delta, "lambda": c.lam, "truncated_energy": float(p.truncated.truncated_energy),
         "energy_ratio": float(c.claim3_ratio), "pass": c.passed}
        for i, (c, p) in enumerate(res)
    ]
    return {
        "suite": "majorant", "seed": seed, "trials": trials, "max_depth": max_depth,
        "failures": failures,
        "worst_energy_ratio": float(res[worst][0].claim3_ratio) if worst is not None else 0.0,
        "energy_ratio_limit": mj.A0,
        "cases_with_positive_truncated_energy": nonvacuous,
        "claim1_domain_nodes": dom40, "local_domain_nodes": dom20,
        "band_bound_cases": band_cases, "band_bound_failures": band_failures,
        "first_failure": None if first_fail is None else {"case": first_fail, **res[first_fail][0].summary()},
        "cases": case_rows,
        "pass": not any(failures.values()),
    }


# -- auxiliary lemmas ---------------------------------------------------------------


def lemma_suite(trials: int = 1000, seed: int = 0, max_depth: int = 6, max_kernel: int = 12) -> dict:
    def sup_case(rng):
        d = int(rng.integers(0, max_depth + 1))
        g = mj.random_superadditive(rng, d, budget=1 << 12)
        n = g.size
        h = np.where(rng.random(n) < 0.4, rng.integers(0, 6, n), 0).astype(np.int64)
        ih = hardy.up_sum_tree(h)
        supp = g > 0
        lam = int(ih[supp].max()) if supp.any() else 0
        lam += int(rng.integers(0, 3))
        return mj.verify_superadditive_bound(g, h, lam).passed

    def kernel_case(rng):
        r = int(rng.integers(1, max_kernel + 1))
        c = int(rng.integers(1, max_kernel + 1))
        K = np.where(rng.random((r, c)) < 0.6, rng.random((r, c)), 0.0)
        f = np.where(rng.random(c) < 0.6, rng.random(c), 0.0)
        g = np.where(rng.random(r) < 0.6, rng.random(r), 0.0)
        cert = mj.verify_kernel_energy_bound(K, f, g)
        return cert.details.get("plain_pass", cert.passed), cert.details.get("strong_pass", cert.passed)

    rngs = case_rngs(seed, 2 * trials)
    sup = ordered_map(sup_case, rngs[:trials])
    ker = ordered_map(kernel_case, rngs[trials:])
    out = {
        "superadditive_failures": sup.count(False),
        "kernel_plain_failures": sum(1 for p, _ in ker if not p),
        "kernel_strong_failures": sum(1 for _, s in ker if not s),
    }
    return {"suite": "lemmas", "seed": seed, "trials": trials, **out, "pass": not any(out.values())}


# -- scaling ------------------------------------------------------------------------


def scaling_sweep(depths=(2, 3, 4, 5), seeds=(0, 1, 2), taus=(0.1, 0.25, 0.5),
                  kinds=tuple(sc.MeasureKind), deltas=None) -> dict:
    """Ladders for every generated measure family.

    Each measure is rescaled by a power of two so that ``|mu| <= E[mu]``;
    the default ladder includes every jump of ``delta -> E_delta``.
    """
    jobs = [(k, d, s) for k in kinds for d in depths for s in seeds]

    def one(job):
        kind, d, s = job
        mu = sc.normalize_for_theorem(sc.generate_measure(kind, BiShape.of(d), s))
        rep = sc.build_ladder(mu, f"{sc.MeasureKind(kind).value}-d{d}-s{s}", deltas, taus)
        ladder = [r.delta for r in rep.rows]
        two = sc.two_scale_on_ladder(mu, ladder)
        try:
            slope = sc.fit_exponent(rep)
        except ValueError:
            slope = None
        return rep, two, slope

    res = ordered_map(one, jobs)
    rows = []
    for rep, two, slope in res:
        rows.append({
            "mu_id": rep.mu_id, "mass": rep.mass, "energy": rep.energy, "A": rep.A, "c0": rep.c0,
            "ladder_rows": len(rep.rows),
            "rows_with_positive_energy": sum(1 for r in rep.rows if r.energy_delta > 0),
            "surrogate_pass": all(r.pass_surrogate for r in rep.rows),
            "theorem_pass": all(all(r.pass_tau.values()) for r in rep.rows),
            "two_scale_pass": two.passed, "two_scale_worst_ratio": two.lhs,
            "two_scale_pairs": two.details["pairs"],
            "corollary_c": rep.corollary_c, "fitted_exponent": slope,
        })
    return {
        "suite": "scaling", "depths": list(depths), "seeds": list(seeds), "taus": list(taus),
        "rows": rows, "reports": res,
        "corollary_c_sup": max((r["corollary_c"] or 0.0 for r in rows), default=0.0),
        "pass": all(r["surrogate_pass"] and r["theorem_pass"] and r["two_scale_pass"] for r in rows),
    }


# -- counterexample -------------------------------------------------------------------


def counterexample_range(Ms, delta=1, samples_per_quadrant: int = 8, seed: int = 0) -> dict:
    Ms = sorted(Ms)
    reports = ordered_map(lambda M: cx.run_counterexample(M, delta, samples_per_quadrant, seed), Ms)
    rows = [r.to_dict() for r in reports]
    ratios = [r.ratio for r in reports]
    monotone = all(b > a for a, b in zip(ratios, ratios[1:]))
    asserted = [r for r in reports if r.M >= 5]
    increments = [float(b.V_at_omega0 - a.V_at_omega0) for a, b in zip(reports, reports[1:])]
    slope_ok = all(x >= float(Fraction(delta)) / 9 for x in increments)
    ok = (all(r.flatness_pass and r.counting_pass for r in reports)
          and all(r.blowup_pass for r in asserted) and monotone and slope_ok)
    return {"suite": "counterexample", "seed": seed, "samples_per_quadrant": samples_per_quadrant,
            "rows": rows, "ratio_monotone": monotone, "increments": increments,
            "increment_at_least_delta_over_9": slope_ok, "pass": ok}


def dense_crosscheck(M: int) -> dict:
    m = cx.build_counterexample(cx.CoarseParams(M))
    dense = pt.build_potential(cx.dense_measure_scaled(m)).potential
    sparse = cx.sparse_potential_grid_scaled(m)
    return {"M": M, "nodes": int(dense.size), "equal": bool(np.array_equal(dense, sparse))}


# -- capacity -------------------------------------------------------------------------


def capacity_suite(M: int = 2, levels: int = 12, small_cases: int = 200, seed: int = 0,
                   tol: float = 1e-10) -> dict:
    s = BiShape.of(1)
    root = cap.estimate_capacity([BI_ROOT], BiShape.of(0), tol)
    one_one = cap.estimate_capacity([BiNodeRef.of(1, 0, 1, 0)], s, tol)

    def small(rng):
        shape = BiShape.of(int(rng.integers(0, 4)), int(rng.integers(0, 4)))
        nodes = [BiNodeRef.from_heap(int(rng.integers(0, shape.dims[0])), int(rng.integers(0, shape.dims[1])))
                 for _ in range(int(rng.integers(1, 4)))]
        prob = cap.estimate_capacity(nodes, shape, tol)
        ref = cap.brute_force_capacity(cap.gram_of(prob.constraints, shape))
        return abs(prob.value - ref), prob.feasibility_residual, prob.slackness_residual

    errs = ordered_map(small, case_rngs(seed, small_cases))
    m = cx.build_counterexample(cx.CoarseParams(M))
    V = pt.build_potential(cx.dense_measure_scaled(m)).potential.astype(np.float64)
    V = V / float(cx.potential_scale(m.params))
    lams = np.linspace(float(V.min()), float(V.max()), levels)
    curve = cap.superlevel_capacities(V, lams, tol)
    values = [v for _, v in curve]
    worst_err = max((e[0] for e in errs), default=0.0)
    worst_res = max([root.feasibility_residual, root.slackness_residual,
                     one_one.feasibility_residual, one_one.slackness_residual]
                    + [max(e[1], e[2]) for e in errs])
    ok = (abs(root.value - 1) <= 1e-6 and abs(one_one.value - 0.25) <= 1e-6
          and worst_res < 1e-8 and worst_err < 1e-6 and cap.is_non_increasing(values))
    return {
        "suite": "capacity", "seed": seed, "M": M,
        "cap_root": root.value, "cap_level_1_1": one_one.value,
        "brute_force_worst_error": worst_err, "worst_kkt_residual": worst_res,
        "superlevel_curve": [{"lambda": l, "capacity": v} for l, v in curve],
        "non_increasing": cap.is_non_increasing(values),
        "pass": bool(ok),
    }

