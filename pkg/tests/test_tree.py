import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bitree.tree import (
    BI_ROOT, ROOT, BiNodeRef, BiShape, NodeRef, TreeShape, ancestors_bi, bishape_of,
    common_level, common_level_matrix, depth_from_size, is_leq_bi, is_leq_tree, order_matrix,
)

HALF_L, HALF_R = NodeRef(1, 0), NodeRef(1, 1)
QUARTER_2 = NodeRef(2, 1)  # [1/4, 1/2]
QUARTER_1 = NodeRef(2, 0)  # [0, 1/4]


@st.composite
def nodes(draw, max_level=8):
    lv = draw(st.integers(0, max_level))
    return NodeRef(lv, draw(st.integers(0, (1 << lv) - 1)))


def test_shape_counts():
    for d in range(7):
        s = TreeShape(d)
        assert s.size == 2 ** (d + 1) - 1 == len(list(s.nodes()))
        lv = s.levels()
        for level in range(d + 1):
            assert (lv == level).sum() == 2 ** level
        assert lv.min() == 0 and lv.max() == d


def test_root_is_unit_interval():
    assert ROOT.interval() == (0.0, 1.0)
    assert ROOT.heap == 0


@pytest.mark.parametrize("level,index", [(-1, 0), (0, 1), (2, 4), (3, -1)])
def test_invalid_nodes_rejected(level, index):
    with pytest.raises(ValueError):
        NodeRef(level, index)


def test_node_outside_shape_rejected():
    with pytest.raises(ValueError):
        is_leq_tree(NodeRef(3, 0), ROOT, TreeShape(2))
    with pytest.raises(ValueError):
        ancestors_bi(BiNodeRef.of(2, 0, 0, 0), BiShape.of(1))


def test_is_leq_tree_examples():
    assert is_leq_tree(HALF_L, ROOT)
    assert not is_leq_tree(HALF_L, HALF_R)
    assert is_leq_tree(QUARTER_2, HALF_L)


def test_is_leq_bi_examples():
    assert is_leq_bi(BiNodeRef(HALF_L, HALF_L), BI_ROOT)
    assert not is_leq_bi(BiNodeRef(HALF_L, HALF_R), BiNodeRef(ROOT, HALF_L))
    assert is_leq_bi(BiNodeRef(QUARTER_2, QUARTER_1), BiNodeRef(HALF_L, HALF_L))


def test_ancestor_counts():
    assert ancestors_bi(BI_ROOT) == [BI_ROOT]
    assert len(ancestors_bi(BiNodeRef(HALF_L, HALF_L))) == 4
    a = BiNodeRef.of(2, 3, 3, 5)
    anc = ancestors_bi(a)
    assert len(anc) == 12
    scan = [b for b in BiShape.of(2, 3).nodes() if is_leq_bi(a, b)]
    assert set(anc) == set(scan)


@given(nodes())
def test_heap_roundtrip(n):
    assert NodeRef.from_heap(n.heap) == n


@given(nodes(), nodes())
def test_order_is_interval_containment(a, b):
    lo_a, hi_a = a.interval()
    lo_b, hi_b = b.interval()
    assert is_leq_tree(a, b) == (lo_b <= lo_a and hi_a <= hi_b)


@given(nodes(), nodes())
def test_common_level_is_deepest_shared_ancestor(a, b):
    c = common_level(a, b)
    assert a.ancestor(c) == b.ancestor(c)
    if c < min(a.level, b.level):
        assert a.ancestor(c + 1) != b.ancestor(c + 1)


def test_order_and_common_level_matrices():
    s = TreeShape(3)
    ns = list(s.nodes())
    P = order_matrix(s)
    C = common_level_matrix(s)
    for a in ns:
        for b in ns:
            assert P[a.heap, b.heap] == int(is_leq_tree(a, b))
            assert C[a.heap, b.heap] == common_level(a, b)


def test_depth_from_size():
    assert [depth_from_size(n) for n in (1, 3, 7, 15)] == [0, 1, 2, 3]
    for bad in (0, 2, 4, 8):
        with pytest.raises(ValueError):
            depth_from_size(bad)
    assert bishape_of(np.zeros((3, 7))) == BiShape.of(1, 2)
    with pytest.raises(ValueError):
        bishape_of(np.zeros(7))
