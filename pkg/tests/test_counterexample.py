import random
from fractions import Fraction

import numpy as np
import pytest

from bitree import counterexample as cx
from bitree.potentials import build_potential
from bitree.tree import BI_ROOT, BiNodeRef, NodeRef, ancestors_bi

P2 = cx.CoarseParams(2)


def rect(node: BiNodeRef):
    return node.first.interval(), node.second.interval()


def test_params():
    assert P2.N == 4 and P2.depth == 5
    with pytest.raises(ValueError):
        cx.CoarseParams(1)
    with pytest.raises(ValueError):
        cx.CoarseParams(3, 0)


def test_rectangles_at_m2():
    assert rect(cx.Q(P2, 1)) == ((0, 1 / 4), (0, 1 / 4))
    assert rect(cx.Q(P2, 2)) == ((0, 1 / 16), (0, 1 / 2))
    assert rect(cx.Q_pp(P2, 1)) == ((1 / 8, 1 / 4), (1 / 8, 1 / 4))
    assert rect(cx.Q_pp(P2, 2)) == ((1 / 32, 1 / 16), (1 / 4, 1 / 2))
    assert rect(cx.omega0(P2)) == ((0, 1 / 16), (0, 1 / 16))


@pytest.mark.parametrize("M", range(2, 11))
def test_total_mass(M):
    m = cx.build_counterexample(cx.CoarseParams(M, Fraction(3, 2)))
    assert m.total_mass == M * Fraction(3, 2) / (1 << M)
    assert cx.measure_of_rectangle(m, BI_ROOT) == m.total_mass


def test_measure_of_rectangle():
    m = cx.build_counterexample(P2)
    assert cx.measure_of_rectangle(m, cx.Q_pp(P2, 1)) == Fraction(1, 4)
    assert cx.measure_of_rectangle(m, BiNodeRef.of(1, 1, 1, 1)) == 0
    # a quarter of Q_1++ in each coordinate halving
    child = BiNodeRef(cx.Q_pp(P2, 1).first.children()[0], cx.Q_pp(P2, 1).second)
    assert cx.measure_of_rectangle(m, child) == Fraction(1, 8)


def test_root_potential_is_total_mass():
    m = cx.build_counterexample(cx.CoarseParams(4))
    assert cx.sparse_potential_at(m, BI_ROOT) == m.total_mass


@pytest.mark.parametrize("M", [2, 3])
def test_dense_and_sparse_agree_exactly(M):
    m = cx.build_counterexample(cx.CoarseParams(M))
    dense = build_potential(cx.dense_measure_scaled(m)).potential
    assert dense.dtype == np.int64
    assert np.array_equal(dense, cx.sparse_potential_grid_scaled(m))


@pytest.mark.parametrize("M", [3, 4, 5, 6])
def test_sparse_matches_ancestor_scan(M):
    m = cx.build_counterexample(cx.CoarseParams(M))
    rng = random.Random(M)
    d = m.params.depth
    pts = [cx.omega0(m.params)] + [w for _, w in cx.support_samples(m, 1, M)]
    for _ in range(6):
        l1, l2 = rng.randint(0, min(d, 9)), rng.randint(0, min(d, 9))
        pts.append(BiNodeRef.of(l1, rng.randrange(1 << l1), l2, rng.randrange(1 << l2)))
    for w in pts:
        if len(ancestors_bi(w)) <= 1500:
            assert cx.sparse_potential_at(m, w) == cx.potential_by_ancestor_scan(m, w)


def test_sparse_rejects_nodes_outside_grid():
    m = cx.build_counterexample(P2)
    with pytest.raises(ValueError):
        cx.sparse_potential_at(m, BiNodeRef.of(6, 0, 0, 0))


def test_flatness_scales_with_delta():
    a = cx.verify_flatness(cx.build_counterexample(cx.CoarseParams(5, 1)), 4, 0)
    b = cx.verify_flatness(cx.build_counterexample(cx.CoarseParams(5, 2)), 4, 0)
    assert a.passed and b.passed
    assert b.lhs == 2 * a.lhs and b.rhs == 2 * a.rhs


def test_flatness_constant_series():
    # sum_{k>=1} k (k+1) 2**-k = 8
    s = sum(Fraction(k * (k + 1), 1 << k) for k in range(1, 200))
    assert abs(float(s) - 8) < 1e-40 + 1e-12
    assert cx.FLATNESS_CONSTANT == 9


def test_support_potential_is_constant_per_quadrant():
    m = cx.build_counterexample(cx.CoarseParams(4))
    by_q = {}
    for j, w in cx.support_samples(m, 10, 3):
        by_q.setdefault(j, set()).add(cx.sparse_potential_at(m, w))
    assert all(len(v) == 1 for v in by_q.values())
    top, _ = cx.support_maximum(m)
    assert top == max(max(v) for v in by_q.values())


def test_violation_first_appears_at_m4():
    for M, expect in ((2, False), (3, False), (4, True), (6, True)):
        c = cx.verify_support_violation(cx.build_counterexample(cx.CoarseParams(M)))
        assert c.passed is expect
        assert c.witness == cx.omega0(cx.CoarseParams(M))


def test_blowup_values():
    m5 = cx.build_counterexample(cx.CoarseParams(5))
    c = cx.verify_blowup(m5)
    assert c.passed and c.lhs == Fraction(1, 8) and c.rhs == Fraction(129, 16)
    assert cx.verify_blowup(cx.build_counterexample(P2)).rhs == Fraction(19, 4)


@pytest.mark.parametrize("M", range(2, 8))
def test_counting_identities(M):
    c = cx.counting_identities(cx.CoarseParams(M))
    assert c.passed
    N = 1 << M
    for j in range(1, M + 1):
        assert c.lhs[j] == ((1 << j) + 1) * ((N >> j) + 1)
    for j in range(2, M - 1):
        assert c.rhs[j] == N // 4


def test_rect_family():
    fam = cx.build_rect_family(P2)
    assert BI_ROOT in fam
    assert cx.Q(P2, 1) in fam
    assert cx.Q_pp(P2, 1) not in fam
    assert fam.weight(cx.Q(P2, 2)) == 1


def test_rect_family_is_up_set():
    params = cx.CoarseParams(3)
    fam = cx.build_rect_family(params)
    rng = random.Random(0)
    d = params.depth
    for _ in range(1000):
        l1, l2 = rng.randint(0, d), rng.randint(0, d)
        R = BiNodeRef.of(l1, rng.randrange(1 << l1), l2, rng.randrange(1 << l2))
        anc = ancestors_bi(R)
        S = anc[rng.randrange(len(anc))]
        if R in fam:
            assert S in fam


def test_report_fields():
    r = cx.run_counterexample(5).to_dict()
    for key in ("M", "N", "delta", "V_at_omega0", "max_on_support_samples", "ratio",
                "flatness_pass", "blowup_pass"):
        assert key in r
    assert r["V_at_omega0"] >= 1 / 8 and r["ninth_form_holds"] is True


def test_ratio_grows_with_m():
    ratios = [cx.run_counterexample(M, samples_per_quadrant=2).ratio for M in range(2, 9)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_node_helpers():
    assert NodeRef(3, 5).ancestor(1) == NodeRef(1, 1)
