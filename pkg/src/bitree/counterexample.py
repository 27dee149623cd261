"""A measure whose bi-tree potential is flat on its support but grows like
``delta * log N`` at the corner square ``omega0 = [0, 2**-N]^2``.

With ``N = 2**M`` the measure spreads mass ``delta / N`` uniformly over each
of the rectangles

    Q_j++ = [2**-(2**j) / 2, 2**-(2**j)] x [2**-(N / 2**j) / 2, 2**-(N / 2**j)],  j = 1..M,

the upper-right quadrants of ``Q_j = [0, 2**-(2**j)] x [0, 2**-(N / 2**j)]``.

``Q_M++`` has side ``2**-(N+1)`` in the first coordinate, so the dense bi-tree
used here has depth ``N + 1`` in both coordinates. Potentials are evaluated
sparsely and exactly: because dyadic rectangles are products of dyadic
intervals, the ancestor sum of the potential factorizes per component into a
product of two one-dimensional chain sums.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .certificates import Certificate
from .tree import BiNodeRef, BiShape, NodeRef, ancestors_bi, is_leq_bi, is_leq_tree

# proof constant: sum_{k>=1} k (k+1) 2**-k = 8, plus O(delta/N) boundary terms
FLATNESS_CONSTANT = 9


@dataclass(frozen=True)
class CoarseParams:
    M: int
    delta: Fraction = Fraction(1)

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("M must be >= 2")
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    @property
    def N(self) -> int:
        return 1 << self.M

    @property
    def depth(self) -> int:
        return self.N + 1

    @property
    def bishape(self) -> BiShape:
        return BiShape.square(self.depth)


def Q(params: CoarseParams, j: int) -> BiNodeRef:
    """``Q_j = [0, 2**-(2**j)] x [0, 2**-(N / 2**j)]``."""
    return BiNodeRef(NodeRef(1 << j, 0), NodeRef(params.N >> j, 0))


def Q_pp(params: CoarseParams, j: int) -> BiNodeRef:
    """Upper-right quadrant of ``Q_j``."""
    return BiNodeRef(NodeRef((1 << j) + 1, 1), NodeRef((params.N >> j) + 1, 1))


def omega0(params: CoarseParams) -> BiNodeRef:
    return BiNodeRef(NodeRef(params.N, 0), NodeRef(params.N, 0))


@dataclass(frozen=True)
class RectMeasure:
    params: CoarseParams
    components: tuple[tuple[BiNodeRef, Fraction], ...]

    @property
    def total_mass(self) -> Fraction:
        return sum((m for _, m in self.components), Fraction(0))


def build_counterexample(params: CoarseParams) -> RectMeasure:
    comps = tuple((Q_pp(params, j), params.delta / params.N) for j in range(1, params.M + 1))
    for a in range(len(comps)):
        for b in range(a + 1, len(comps)):
            if _rect_overlap(comps[a][0], comps[b][0]):
                raise AssertionError("quadrants must be disjoint")
    return RectMeasure(params, comps)


def _interval_fraction(a: NodeRef, q: NodeRef) -> Fraction:
    """``|a ∩ q| / |q|`` for dyadic intervals (intersection is empty or the smaller one)."""
    if is_leq_tree(q, a):
        return Fraction(1)
    if is_leq_tree(a, q):
        return Fraction(1, 1 << (a.level - q.level))
    return Fraction(0)


def _rect_overlap(a: BiNodeRef, b: BiNodeRef) -> bool:
    return bool(_interval_fraction(a.first, b.first)) and bool(_interval_fraction(a.second, b.second))


def measure_of_rectangle(m: RectMeasure, R: BiNodeRef) -> Fraction:
    total = Fraction(0)
    for q, mass in m.components:
        total += mass * _interval_fraction(R.first, q.first) * _interval_fraction(R.second, q.second)
    return total


def _chain_weight_scaled(w: NodeRef, q: NodeRef, depth: int) -> int:
    """``2**depth * sum_{a >= w} |a ∩ q| / |q|`` as an exact integer.

    Ancestors of ``w`` down to the deepest common ancestor ``k`` with ``q``
    contain ``q`` (weight 1 each); if ``w`` lies inside ``q`` the ancestors
    strictly below ``q`` contribute ``2**-1 + ... + 2**-(lw - lq)``.
    """
    lo = min(w.level, q.level)
    k = lo - ((w.index >> (w.level - lo)) ^ (q.index >> (q.level - lo))).bit_length()
    total = (k + 1) << depth
    if k == q.level and w.level > q.level:
        total += (1 << depth) - (1 << (depth - (w.level - q.level)))
    return total


def potential_scale(params: CoarseParams) -> Fraction:
    """Factor turning true potentials into the integers used by the ``*_scaled`` functions."""
    return Fraction(params.N << (2 * params.depth)) / params.delta


def sparse_potential_scaled(m: RectMeasure, w: BiNodeRef) -> int:
    """``V(w) * N * 2**(2 depth) / delta`` as an exact integer."""
    d = m.params.depth
    return sum(
        _chain_weight_scaled(w.first, q.first, d) * _chain_weight_scaled(w.second, q.second, d)
        for q, _ in m.components
    )


def sparse_potential_at(m: RectMeasure, w: BiNodeRef) -> Fraction:
    """Exact potential ``sum_{R >= w} mu(R)`` without materializing the bi-tree.

    Cost is ``O(M)`` big-integer operations per point (the ancestor sum
    factorizes over the two coordinates).
    """
    p = m.params
    if not p.bishape.contains(w):
        raise ValueError(f"{w} lies outside the depth-{p.depth} bi-tree")
    return sparse_potential_scaled(m, w) / potential_scale(p)


def potential_by_ancestor_scan(m: RectMeasure, w: BiNodeRef) -> Fraction:
    """Literal ancestor sum of :func:`measure_of_rectangle`; ``O(l1 * l2 * M)``."""
    return sum((measure_of_rectangle(m, R) for R in ancestors_bi(w)), Fraction(0))


# -- dense cross-check -------------------------------------------------------


def dense_measure_scaled(m: RectMeasure) -> np.ndarray:
    """Leaf masses scaled by ``N * 2**(2 depth) / delta``: component ``j`` puts
    ``2**(l1 + l2)`` on every leaf of ``Q_j++`` (levels ``l1, l2``)."""
    p = m.params
    s = p.bishape.shape1
    if p.depth > 12:
        raise ValueError("dense evaluation only for small M")
    mu = p.bishape.zeros(np.int64)
    leaves = s.level_slice(p.depth)
    for q, _ in m.components:
        l1, l2 = q.first.level, q.second.level
        r1 = range(q.first.index << (p.depth - l1), (q.first.index + 1) << (p.depth - l1))
        r2 = range(q.second.index << (p.depth - l2), (q.second.index + 1) << (p.depth - l2))
        mu[leaves, leaves][r1.start:r1.stop, r2.start:r2.stop] += 1 << (l1 + l2)
    return mu


def sparse_potential_grid_scaled(m: RectMeasure) -> np.ndarray:
    """Scaled potential at every bi-node via the factorized chain sums."""
    p = m.params
    shape = p.bishape.shape1
    nodes = list(shape.nodes())
    out = np.zeros(p.bishape.dims, dtype=np.int64)
    for q, _ in m.components:
        a = np.array([_chain_weight_scaled(w, q.first, p.depth) for w in nodes], dtype=np.int64)
        b = np.array([_chain_weight_scaled(w, q.second, p.depth) for w in nodes], dtype=np.int64)
        out += np.outer(a, b)
    return out


# -- certificates ------------------------------------------------------------------


def support_samples(m: RectMeasure, per_quadrant: int, seed: int = 0) -> list[tuple[int, BiNodeRef]]:
    """Corner leaves of every ``Q_j++`` plus seeded random interior leaves."""
    rng = random.Random(seed)
    d = m.params.depth
    out = []
    for j, (q, _) in enumerate(m.components, start=1):
        r1 = (q.first.index << (d - q.first.level), ((q.first.index + 1) << (d - q.first.level)) - 1)
        r2 = (q.second.index << (d - q.second.level), ((q.second.index + 1) << (d - q.second.level)) - 1)
        picks = [(x, y) for x in r1 for y in r2]
        for _ in range(per_quadrant):
            picks.append((rng.randint(*r1), rng.randint(*r2)))
        for x, y in dict.fromkeys(picks):
            out.append((j, BiNodeRef(NodeRef(d, x), NodeRef(d, y))))
    return out


def verify_flatness(m: RectMeasure, samples_per_quadrant: int = 8, seed: int = 0) -> Certificate:
    """Potential at sampled support leaves stays below ``9 * delta``."""
    if samples_per_quadrant < 1:
        raise ValueError("need at least one sample per quadrant")
    bound = FLATNESS_CONSTANT * m.params.delta
    worst, witness = Fraction(0), None
    for _, w in support_samples(m, samples_per_quadrant, seed):
        v = sparse_potential_at(m, w)
        if v > worst:
            worst, witness = v, w
    return Certificate("flatness", worst, bound, worst <= bound, witness,
                       details={"M": m.params.M, "constant": FLATNESS_CONSTANT})


def _coordinatewise_disjoint(m: RectMeasure) -> bool:
    comps = [q for q, _ in m.components]
    for a, b in itertools.combinations(comps, 2):
        for x, y in ((a.first, b.first), (a.second, b.second)):
            if is_leq_tree(x, y) or is_leq_tree(y, x):
                return False
    return True


def support_maximum(m: RectMeasure) -> tuple[Fraction, BiNodeRef]:
    """Exact ``max V`` over ``supp mu`` and a leaf attaining it.

    The quadrants are pairwise non-nested in each coordinate, so every chain
    weight is constant on the leaves of a quadrant; one leaf per quadrant
    therefore suffices.
    """
    if not _coordinatewise_disjoint(m):
        raise AssertionError("quadrants are nested in some coordinate")
    d = m.params.depth
    best, arg = Fraction(-1), None
    for q, _ in m.components:
        w = BiNodeRef(NodeRef(d, q.first.index << (d - q.first.level)),
                      NodeRef(d, q.second.index << (d - q.second.level)))
        v = sparse_potential_at(m, w)
        if v > best:
            best, arg = v, w
    return best, arg


def verify_support_violation(m: RectMeasure) -> Certificate:
    """Bi-tree failure of the maximum principle: ``V(omega0) > max_{supp mu} V``.

    ``passed`` is True when a violation is exhibited; the witness is ``omega0``.
    """
    top, _ = support_maximum(m)
    v0 = sparse_potential_at(m, omega0(m.params))
    return Certificate("support_violation", top, v0, v0 > top, omega0(m.params),
                       details={"ratio": v0 / top})


def verify_blowup(m: RectMeasure, max_on_support: Fraction | None = None) -> Certificate:
    """``V(omega0) >= (delta / 8) (M - 4)``; also reports the ``delta M / 9`` form
    (which needs ``M >= 36``) and the ratio to the support maximum."""
    p = m.params
    v0 = sparse_potential_at(m, omega0(p))
    bound = p.delta * (p.M - 4) / 8
    details = {
        "M": p.M,
        "N": p.N,
        "ninth_form_rhs": p.delta * p.M / 9,
        "ninth_form_holds": v0 >= p.delta * p.M / 9,
    }
    if max_on_support:
        details["ratio"] = v0 / max_on_support
    return Certificate("blowup", bound, v0, v0 >= bound, omega0(p), details=details)


def counting_identities(params: CoarseParams) -> Certificate:
    """Ancestor counts behind the lower bound at ``omega0``.

    A rectangle contains ``P_j`` exactly when it contains ``Q_j``, so the
    rectangles containing ``P_j`` are the ancestors of ``Q_j``:
    ``(2**j + 1)(N / 2**j + 1)`` of them. ``c_j`` are those containing no other
    ``Q_i``; the claim is ``|c_j| >= N / 8`` for ``2 <= j <= M - 2``.
    """
    N, M = params.N, params.M
    qs = {j: Q(params, j) for j in range(1, M + 1)}
    counts, cj = {}, {}
    ok = True
    for j, q in qs.items():
        anc = ancestors_bi(q)
        counts[j] = len(anc)
        ok &= counts[j] == ((1 << j) + 1) * ((N >> j) + 1)
        only = [R for R in anc if not any(is_leq_bi(qs[i], R) for i in qs if i != j)]
        cj[j] = len(only)
        if 2 <= j <= M - 2:
            ok &= 8 * cj[j] >= N
    return Certificate("counting", counts, cj, ok, details={"N": N, "M": M})


@dataclass
class CounterexampleReport:
    M: int
    N: int
    delta: Fraction
    V_at_omega0: Fraction
    max_on_support_samples: Fraction
    ratio: Fraction
    flatness_pass: bool
    blowup_pass: bool
    counting_pass: bool
    ninth_form_holds: bool
    max_on_support: Fraction
    violation: bool

    def to_dict(self) -> dict:
        return {
            "M": self.M, "N": self.N, "delta": float(self.delta),
            "V_at_omega0": float(self.V_at_omega0),
            "V_at_omega0_exact": str(self.V_at_omega0),
            "max_on_support_samples": float(self.max_on_support_samples),
            "max_on_support": float(self.max_on_support),
            "ratio": float(self.ratio),
            "violation": self.violation,
            "flatness_pass": self.flatness_pass,
            "blowup_pass": self.blowup_pass,
            "counting_pass": self.counting_pass,
            "ninth_form_holds": self.ninth_form_holds,
        }


def run_counterexample(M: int, delta=1, samples_per_quadrant: int = 8, seed: int = 0) -> CounterexampleReport:
    params = CoarseParams(M, Fraction(delta))
    m = build_counterexample(params)
    flat = verify_flatness(m, samples_per_quadrant, seed)
    top, _ = support_maximum(m)
    blow = verify_blowup(m, top)
    cnt = counting_identities(params)
    return CounterexampleReport(
        M, params.N, params.delta, blow.rhs, flat.lhs, blow.details["ratio"],
        flat.passed, blow.passed, cnt.passed, blow.details["ninth_form_holds"],
        top, blow.rhs > top,
    )


# -- super-additive family --------------------------------------------------------


@dataclass(frozen=True)
class RectFamily:
    """Rectangles containing at least one ``Q_j``; an up-set by construction."""

    params: CoarseParams

    def __contains__(self, R: BiNodeRef) -> bool:
        return any(is_leq_bi(Q(self.params, j), R) for j in range(1, self.params.M + 1))

    def weight(self, R: BiNodeRef) -> int:
        return int(R in self)


def build_rect_family(params: CoarseParams) -> RectFamily:
    return RectFamily(params)
