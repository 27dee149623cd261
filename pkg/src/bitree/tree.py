"""Node arithmetic for finite dyadic trees and their two-fold products.

A node of a dyadic tree is the interval ``[index * 2**-level, (index+1) * 2**-level]``.
Dense functions are stored in *heap layout*: node ``(level, index)`` lives at
position ``2**level - 1 + index``, so positions are ordered level-major,
index-minor. A function on a bi-tree is a 2D array indexed by the heap
positions of the two coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np


@dataclass(frozen=True)
class NodeRef:
    level: int
    index: int

    def __post_init__(self):
        if self.level < 0 or not (0 <= self.index < (1 << self.level)):
            raise ValueError(f"invalid dyadic node ({self.level}, {self.index})")

    @property
    def heap(self) -> int:
        return (1 << self.level) - 1 + self.index

    @classmethod
    def from_heap(cls, pos: int) -> NodeRef:
        level = (pos + 1).bit_length() - 1
        return cls(level, pos + 1 - (1 << level))

    def parent(self) -> NodeRef | None:
        if self.level == 0:
            return None
        return NodeRef(self.level - 1, self.index >> 1)

    def children(self) -> tuple[NodeRef, NodeRef]:
        return NodeRef(self.level + 1, 2 * self.index), NodeRef(self.level + 1, 2 * self.index + 1)

    def ancestor(self, level: int) -> NodeRef:
        if not 0 <= level <= self.level:
            raise ValueError(f"no ancestor at level {level} for {self}")
        return NodeRef(level, self.index >> (self.level - level))

    def ancestors(self) -> list[NodeRef]:
        """Ancestors-or-self, from the node itself up to the root."""
        return [self.ancestor(lv) for lv in range(self.level, -1, -1)]

    def interval(self) -> tuple[float, float]:
        w = 2.0 ** -self.level
        return self.index * w, (self.index + 1) * w


ROOT = NodeRef(0, 0)


@dataclass(frozen=True)
class TreeShape:
    depth: int

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be >= 0")

    @property
    def size(self) -> int:
        return (1 << (self.depth + 1)) - 1

    def contains(self, node: NodeRef) -> bool:
        return node.level <= self.depth

    def level_slice(self, level: int) -> slice:
        return slice((1 << level) - 1, (1 << (level + 1)) - 1)

    def nodes(self) -> Iterator[NodeRef]:
        for lv in range(self.depth + 1):
            for i in range(1 << lv):
                yield NodeRef(lv, i)

    def leaves(self) -> Iterator[NodeRef]:
        for i in range(1 << self.depth):
            yield NodeRef(self.depth, i)

    def levels(self) -> np.ndarray:
        """Level of every heap position."""
        return np.concatenate([np.full(1 << lv, lv, dtype=np.int64) for lv in range(self.depth + 1)])

    def indices(self) -> np.ndarray:
        return np.concatenate([np.arange(1 << lv, dtype=np.int64) for lv in range(self.depth + 1)])


@dataclass(frozen=True)
class BiNodeRef:
    first: NodeRef
    second: NodeRef

    @classmethod
    def of(cls, l1: int, i1: int, l2: int, i2: int) -> BiNodeRef:
        return cls(NodeRef(l1, i1), NodeRef(l2, i2))

    @property
    def heap(self) -> tuple[int, int]:
        return self.first.heap, self.second.heap

    @classmethod
    def from_heap(cls, p1: int, p2: int) -> BiNodeRef:
        return cls(NodeRef.from_heap(p1), NodeRef.from_heap(p2))

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.first.level, self.first.index, self.second.level, self.second.index


BI_ROOT = BiNodeRef(ROOT, ROOT)


@dataclass(frozen=True)
class BiShape:
    shape1: TreeShape
    shape2: TreeShape

    @classmethod
    def square(cls, depth: int) -> BiShape:
        return cls(TreeShape(depth), TreeShape(depth))

    @classmethod
    def of(cls, depth1: int, depth2: int | None = None) -> BiShape:
        return cls(TreeShape(depth1), TreeShape(depth1 if depth2 is None else depth2))

    @property
    def dims(self) -> tuple[int, int]:
        return self.shape1.size, self.shape2.size

    @property
    def size(self) -> int:
        return self.shape1.size * self.shape2.size

    def contains(self, node: BiNodeRef) -> bool:
        return self.shape1.contains(node.first) and self.shape2.contains(node.second)

    def nodes(self) -> Iterator[BiNodeRef]:
        for a in self.shape1.nodes():
            for b in self.shape2.nodes():
                yield BiNodeRef(a, b)

    def zeros(self, dtype=np.float64) -> np.ndarray:
        return np.zeros(self.dims, dtype=dtype)


def depth_from_size(size: int) -> int:
    depth = (size + 1).bit_length() - 2
    if size < 1 or (1 << (depth + 1)) - 1 != size:
        raise ValueError(f"{size} is not the node count of a full dyadic tree")
    return depth


def bishape_of(values: np.ndarray) -> BiShape:
    if values.ndim != 2:
        raise ValueError("bi-tree functions are 2D arrays")
    return BiShape.of(depth_from_size(values.shape[0]), depth_from_size(values.shape[1]))


def _check(node, shape):
    if shape is not None and not shape.contains(node):
        raise ValueError(f"{node} is not a node of {shape}")


def is_leq_tree(a: NodeRef, b: NodeRef, shape: TreeShape | None = None) -> bool:
    """True iff interval ``a`` is contained in interval ``b``."""
    _check(a, shape)
    _check(b, shape)
    return a.level >= b.level and (a.index >> (a.level - b.level)) == b.index


def is_leq_bi(a: BiNodeRef, b: BiNodeRef, shape: BiShape | None = None) -> bool:
    _check(a, shape)
    _check(b, shape)
    return is_leq_tree(a.first, b.first) and is_leq_tree(a.second, b.second)


def ancestors_bi(a: BiNodeRef, shape: BiShape | None = None) -> list[BiNodeRef]:
    """All ``b >= a``: the product of the two ancestor chains, ``a`` first."""
    _check(a, shape)
    return [BiNodeRef(x, y) for x in a.first.ancestors() for y in a.second.ancestors()]


def common_level(a: NodeRef, b: NodeRef) -> int:
    """Level of the smallest dyadic interval containing both ``a`` and ``b``."""
    la, lb = a.level, b.level
    lo = min(la, lb)
    ia, ib = a.index >> (la - lo), b.index >> (lb - lo)
    # the differing high bits determine how far up the chains meet
    return lo - (ia ^ ib).bit_length()


def order_matrix(shape: TreeShape) -> np.ndarray:
    """``P[a, b] = 1`` iff node ``a <= b``; built by pairwise comparison."""
    nodes = list(shape.nodes())
    n = len(nodes)
    out = np.zeros((n, n), dtype=np.int64)
    for p, a in enumerate(nodes):
        for q, b in enumerate(nodes):
            if is_leq_tree(a, b):
                out[p, q] = 1
    return out


def common_level_matrix(shape: TreeShape) -> np.ndarray:
    """``C[a, b]`` = level of the least common ancestor of heap positions a and b."""
    lv = shape.levels()
    idx = shape.indices()
    lo = np.minimum(lv[:, None], lv[None, :])
    ia = idx[:, None] >> (lv[:, None] - lo)
    ib = idx[None, :] >> (lv[None, :] - lo)
    diff = ia ^ ib
    # bit_length of each entry; entries are < 2**depth
    bl = np.zeros_like(diff)
    d = diff.copy()
    while np.any(d):
        nz = d > 0
        bl[nz] += 1
        d >>= 1
    return lo - bl
