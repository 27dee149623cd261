import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bitree import potentials as pt
from bitree.counterexample import CoarseParams, build_counterexample, dense_measure_scaled
from bitree.hardy import down_sum_bi, up_sum_bi
from bitree.tree import BiNodeRef, NodeRef

from strategies import bitree_functions, sparse_measures, tree_functions

A, B = NodeRef(1, 0).heap, NodeRef(1, 1).heap


@pytest.fixture
def corner_mass():
    mu = np.zeros((3, 3), dtype=np.int64)
    mu[A, A] = 1
    return mu


def test_corner_mass_potential(corner_mass):
    b = pt.build_potential(corner_mass)
    assert b.potential[A, A] == 4
    assert b.potential[A, B] == 2
    assert b.potential[B, B] == 1
    assert b.energy == 4 and b.mass == 1
    assert b.potential.tolist() == [[1, 2, 1], [2, 4, 2], [1, 2, 1]]


def test_zero_and_root_measures():
    b = pt.build_potential(np.zeros((7, 7)))
    assert not b.potential.any() and b.energy == 0
    mu = np.zeros((7, 7))
    mu[0, 0] = 1
    b = pt.build_potential(mu)
    assert np.all(b.potential == 1) and b.energy == 1


def test_negative_mass_rejected():
    mu = np.zeros((3, 3))
    mu[1, 1] = -1
    with pytest.raises(ValueError):
        pt.build_potential(mu)
    with pytest.raises(ValueError):
        pt.tree_potential(np.array([1.0, -1.0, 0.0]))


def test_level_set_examples(corner_mass):
    b = pt.build_potential(corner_mass)
    ls = pt.build_level_set(b, 2)
    expected = np.ones((3, 3), dtype=bool)
    expected[A, A] = False
    assert np.array_equal(ls.indicator, expected)
    assert pt.build_level_set(b, b.potential.max()).indicator.all()
    # every node sees the root, so V >= |mu| and thresholds below it give nothing
    assert not pt.build_level_set(b, 0.5).indicator.any()
    with pytest.raises(ValueError):
        pt.build_level_set(b, -1)


def test_truncated_examples(corner_mass):
    b = pt.build_potential(corner_mass)
    tb = pt.build_truncated(b, 2)
    assert tb.truncated_potential[A, A] == 3
    assert tb.truncated_energy == 3
    full = pt.build_truncated(b, 4)
    assert np.array_equal(full.truncated_potential, b.potential) and full.truncated_energy == b.energy
    assert pt.build_truncated(b, 0.5).truncated_energy == 0
    with pytest.raises(ValueError):
        pt.build_truncated(b, 0)


@given(sparse_measures())
def test_energy_identities(mu):
    b = pt.build_potential(mu)
    assert b.energy == pt.energy_via_potential(b)
    assert b.mass == mu.sum()
    prev = 0
    for s in sorted(set(b.potential.ravel().tolist())):
        tb = pt.build_truncated(b, s)
        assert tb.truncated_energy == pt.truncated_energy_via_potential(b, tb)
        assert prev <= tb.truncated_energy <= b.energy
        assert tb.truncated_energy == b.energy_below(s) == b.energy_profile()(s)
        prev = tb.truncated_energy


@given(sparse_measures(), st.floats(0, 60))
def test_level_sets_are_up_sets(mu, s):
    b = pt.build_potential(mu)
    assert pt.is_up_set(b.potential <= s)


def test_is_up_set_detects_holes():
    m = np.ones((3, 3), dtype=bool)
    m[0, A] = False
    assert not pt.is_up_set(m)


@given(sparse_measures(max_depth=4), st.integers(1, 40))
def test_truncated_potential_staircase_bound(mu, delta):
    # the ancestors of a node inside E_delta form a staircase covered by at most
    # min(level1, level2) + 1 corner rectangles, each of mass <= delta
    b = pt.build_potential(mu)
    tb = pt.build_truncated(b, delta)
    d = min(mu.shape[0].bit_length() - 1, mu.shape[1].bit_length() - 1)
    assert tb.truncated_potential.max() <= (d + 1) * delta


def test_tree_examples():
    mu = np.zeros(7, dtype=np.int64)
    leaf = NodeRef(2, 1).heap
    mu[leaf] = 1
    assert pt.tree_potential(mu)[leaf] == 3
    vt = pt.tree_truncated(mu, 2)
    assert vt[leaf] == 2 and vt.max() <= 2
    c = pt.check_one_param_bound(mu, 2)
    assert c.passed and c.lhs == 2 and c.rhs == 2
    assert pt.check_one_param_bound(np.zeros(7), 1).passed


@given(tree_functions(), st.integers(1, 30))
def test_one_parameter_truncation_is_bounded(mu, delta):
    assert pt.tree_truncated(mu, delta).max(initial=0) <= delta
    assert pt.check_one_param_bound(mu, delta).passed


@given(tree_functions())
def test_tree_max_principle(h):
    assert pt.check_tree_max_principle(h).passed
    if h.any():
        assert pt.check_tree_potential_bound(h).passed


def test_tree_max_principle_root():
    c = pt.check_tree_max_principle(np.array([1, 0, 0]))
    assert c.passed and c.lhs == c.rhs == 1


def test_normalized_potential_bound():
    rng = np.random.default_rng(5)
    mu = np.where(rng.random(31) < 0.3, rng.random(31), 0.0)
    v = pt.tree_potential(mu)
    mu = mu / v[mu > 0].max()
    c = pt.check_tree_potential_bound(mu, 1.0 + 1e-12)
    assert c.passed and c.lhs <= 1 + 1e-12
    with pytest.raises(ValueError):
        pt.check_tree_potential_bound(mu, 0.5)


def test_bi_violation_examples():
    h = np.zeros((7, 7))
    h[0, 0] = 1
    assert pt.find_bi_violation(h).passed
    # two incomparable nodes whose common descendant sees both
    h = np.zeros((3, 3))
    h[A, 0] = h[0, A] = 1
    c = pt.find_bi_violation(h)
    assert not c.passed and c.lhs == 2 and c.rhs == 1
    assert c.witness == BiNodeRef.from_heap(A, A)


def test_bi_violation_for_a_potential():
    mu = np.zeros((7, 7), dtype=np.int64)
    mu[2, 5], mu[4, 0], mu[5, 2] = 2, 1, 1
    c = pt.find_bi_violation(down_sum_bi(mu))
    assert not c.passed and c.lhs == 19 and c.rhs == 17
    assert c.witness == BiNodeRef.of(2, 2, 2, 2)


def test_no_bi_violation_for_smallest_counterexample():
    # at N = 4 the corner potential is still below the support maximum
    mu = dense_measure_scaled(build_counterexample(CoarseParams(2)))
    assert pt.find_bi_violation(down_sum_bi(mu)).passed


@given(bitree_functions(max_depth=3))
def test_single_column_behaves_like_a_tree(f):
    h = np.zeros_like(f)
    h[:, 0] = f[:, 0]
    assert pt.find_bi_violation(h).passed


@given(bitree_functions(max_depth=3), st.integers(0, 30))
def test_upset_domination(h, s):
    pot = up_sum_bi(down_sum_bi(h))
    assert pt.upset_domination_holds(h, pot <= s)
