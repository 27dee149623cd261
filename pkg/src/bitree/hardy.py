"""Summation (Hardy) operators on dyadic trees and bi-trees.

``up_sum`` sums a function over ancestors-or-self, ``down_sum`` over
descendants-or-self. Every operator is a single level-by-level pass in heap
layout and keeps the dtype of its input, so integer arrays give exact results.
The ``*_oracle`` functions compute the same quantities from the pairwise order
relation and are kept as permanent ground truth for the fast passes.
"""

from __future__ import annotations

import numpy as np

from .tree import TreeShape, bishape_of, depth_from_size, is_leq_bi, order_matrix


def _levels(n: int):
    depth = depth_from_size(n)
    return depth, [((1 << lv) - 1, (1 << (lv + 1)) - 1) for lv in range(depth + 1)]


def up_sum_tree(f: np.ndarray, axis: int = 0) -> np.ndarray:
    """``If(a) = sum of f over a and its ancestors`` along ``axis``."""
    out = np.array(f, copy=True)
    view = np.moveaxis(out, axis, 0)
    depth, spans = _levels(view.shape[0])
    for lv in range(1, depth + 1):
        lo, hi = spans[lv]
        plo, phi = spans[lv - 1]
        view[lo:hi] += np.repeat(view[plo:phi], 2, axis=0)
    return out


def down_sum_tree(f: np.ndarray, axis: int = 0) -> np.ndarray:
    """``I*f(a) = sum of f over a and its descendants`` along ``axis``."""
    out = np.array(f, copy=True)
    view = np.moveaxis(out, axis, 0)
    depth, spans = _levels(view.shape[0])
    for lv in range(depth - 1, -1, -1):
        lo, hi = spans[lv]
        clo, chi = spans[lv + 1]
        child = view[clo:chi]
        view[lo:hi] += child[0::2] + child[1::2]
    return out


def down_max_tree(f: np.ndarray, axis: int = 0) -> np.ndarray:
    """Maximum of ``f`` over each node and its descendants."""
    out = np.array(f, copy=True)
    view = np.moveaxis(out, axis, 0)
    depth, spans = _levels(view.shape[0])
    for lv in range(depth - 1, -1, -1):
        lo, hi = spans[lv]
        clo, chi = spans[lv + 1]
        child = view[clo:chi]
        view[lo:hi] = np.maximum(view[lo:hi], np.maximum(child[0::2], child[1::2]))
    return out


def up_sum_1(f: np.ndarray) -> np.ndarray:
    return up_sum_tree(f, axis=0)


def up_sum_2(f: np.ndarray) -> np.ndarray:
    return up_sum_tree(f, axis=1)


def down_sum_1(f: np.ndarray) -> np.ndarray:
    return down_sum_tree(f, axis=0)


def down_sum_2(f: np.ndarray) -> np.ndarray:
    return down_sum_tree(f, axis=1)


def up_sum_bi(f: np.ndarray) -> np.ndarray:
    """The bi-tree operator: sum over all rectangles containing the node."""
    return up_sum_1(up_sum_2(f))


def down_sum_bi(f: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`up_sum_bi`: sum over all sub-rectangles."""
    return down_sum_1(down_sum_2(f))


# -- oracles ---------------------------------------------------------------

_ORDER_CACHE: dict[int, np.ndarray] = {}


def _order(n: int) -> np.ndarray:
    if n not in _ORDER_CACHE:
        _ORDER_CACHE[n] = order_matrix(TreeShape(depth_from_size(n)))
    return _ORDER_CACHE[n]


def _cast(P: np.ndarray, f: np.ndarray) -> np.ndarray:
    return P.astype(f.dtype) if np.issubdtype(f.dtype, np.floating) else P


def up_sum_tree_oracle(f: np.ndarray) -> np.ndarray:
    P = _cast(_order(f.shape[0]), f)
    return P @ f


def down_sum_tree_oracle(f: np.ndarray) -> np.ndarray:
    P = _cast(_order(f.shape[0]), f)
    return P.T @ f


def up_sum_bi_oracle(f: np.ndarray) -> np.ndarray:
    """``sum_{b1 >= a1, b2 >= a2} f[b1, b2]`` via the two order matrices."""
    P1 = _cast(_order(f.shape[0]), f)
    P2 = _cast(_order(f.shape[1]), f)
    return P1 @ f @ P2.T


def down_sum_bi_oracle(f: np.ndarray) -> np.ndarray:
    P1 = _cast(_order(f.shape[0]), f)
    P2 = _cast(_order(f.shape[1]), f)
    return P1.T @ f @ P2


def up_sum_1_oracle(f: np.ndarray) -> np.ndarray:
    return _cast(_order(f.shape[0]), f) @ f


def up_sum_2_oracle(f: np.ndarray) -> np.ndarray:
    return f @ _cast(_order(f.shape[1]), f).T


def down_sum_1_oracle(f: np.ndarray) -> np.ndarray:
    return _cast(_order(f.shape[0]), f).T @ f


def down_sum_2_oracle(f: np.ndarray) -> np.ndarray:
    return f @ _cast(_order(f.shape[1]), f)


def up_sum_bi_scan(f: np.ndarray) -> np.ndarray:
    """Literal double loop over node pairs. Only for very small bi-trees."""
    shape = bishape_of(f)
    nodes = list(shape.nodes())
    out = np.zeros_like(f)
    for a in nodes:
        total = f.dtype.type(0)
        for b in nodes:
            if is_leq_bi(a, b):
                total += f[b.heap]
        out[a.heap] = total
    return out


def down_sum_bi_scan(f: np.ndarray) -> np.ndarray:
    shape = bishape_of(f)
    nodes = list(shape.nodes())
    out = np.zeros_like(f)
    for a in nodes:
        total = f.dtype.type(0)
        for b in nodes:
            if is_leq_bi(b, a):
                total += f[b.heap]
        out[a.heap] = total
    return out
