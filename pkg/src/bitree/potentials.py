"""Potentials, sub-level sets, truncated potentials and energies.

On the bi-tree the potential of a non-negative ``mu`` is
``V = up_sum_bi(down_sum_bi(mu))`` and the energy is ``sum(down_sum_bi(mu)**2)``.
The sub-level set ``E_s = {V <= s}`` uses a non-strict comparison with no
epsilon; nodes with ``V == s`` belong to it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificates import Certificate
from .hardy import down_sum_bi, down_sum_tree, up_sum_bi, up_sum_tree
from .tree import BiNodeRef, NodeRef, bishape_of


def _require_nonnegative(x: np.ndarray, what: str = "mu"):
    x = np.asarray(x)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} has non-finite entries")
    if np.any(x < 0):
        raise ValueError(f"{what} has negative entries")
    return x


def _total(x: np.ndarray):
    return x.sum().item()


@dataclass(frozen=True)
class PotentialBundle:
    mu: np.ndarray
    istar_mu: np.ndarray
    potential: np.ndarray
    mass: float
    energy: float

    def energy_below(self, s: float) -> float:
        """Truncated energy ``sum over {V <= s} of (I* mu)**2``."""
        return _total(np.where(self.potential <= s, self.istar_mu, 0) * self.istar_mu)

    def energy_profile(self) -> EnergyProfile:
        return EnergyProfile.of(self.potential, self.istar_mu)


@dataclass(frozen=True)
class EnergyProfile:
    """``s -> sum_{V <= s} (I* mu)**2`` for many thresholds via one sort."""

    thresholds: np.ndarray
    cumulative: np.ndarray

    @classmethod
    def of(cls, potential: np.ndarray, istar: np.ndarray) -> EnergyProfile:
        v = potential.ravel()
        w = (istar.astype(np.float64) ** 2).ravel()
        order = np.argsort(v, kind="stable")
        return cls(v[order], np.concatenate([[0.0], np.cumsum(w[order])]))

    def __call__(self, s: float) -> float:
        k = np.searchsorted(self.thresholds, s, side="right")
        return float(self.cumulative[k])


@dataclass(frozen=True)
class LevelSet:
    threshold: float
    indicator: np.ndarray


@dataclass(frozen=True)
class TruncatedBundle:
    delta: float
    indicator: np.ndarray
    masked_istar: np.ndarray
    truncated_potential: np.ndarray
    truncated_energy: float


def build_potential(mu: np.ndarray) -> PotentialBundle:
    mu = _require_nonnegative(mu)
    bishape_of(mu)
    n = down_sum_bi(mu)
    pot = up_sum_bi(n)
    return PotentialBundle(mu, n, pot, _total(mu), _total(n * n))


def as_bundle(mu_or_bundle) -> PotentialBundle:
    if isinstance(mu_or_bundle, PotentialBundle):
        return mu_or_bundle
    return build_potential(mu_or_bundle)


def energy_via_potential(bundle: PotentialBundle) -> float:
    return _total(bundle.potential * bundle.mu)


def is_up_set(mask: np.ndarray) -> bool:
    """True iff ``mask`` contains every ancestor of each of its nodes."""
    mask = np.asarray(mask, dtype=bool)
    for axis in range(mask.ndim):
        view = np.moveaxis(mask, axis, 0)
        depth = (view.shape[0] + 1).bit_length() - 2
        for lv in range(1, depth + 1):
            child = view[(1 << lv) - 1:(1 << (lv + 1)) - 1]
            parent = np.repeat(view[(1 << (lv - 1)) - 1:(1 << lv) - 1], 2, axis=0)
            if np.any(child & ~parent):
                return False
    return True


def build_level_set(bundle: PotentialBundle, s: float) -> LevelSet:
    if s < 0:
        raise ValueError("threshold must be >= 0")
    ind = bundle.potential <= s
    if not is_up_set(ind):
        raise AssertionError("sub-level set of a potential is not an up-set")
    return LevelSet(s, ind)


def build_truncated(bundle: PotentialBundle, delta: float) -> TruncatedBundle:
    if not delta > 0:
        raise ValueError("delta must be > 0")
    ind = bundle.potential <= delta
    m = np.where(ind, bundle.istar_mu, 0).astype(bundle.istar_mu.dtype)
    tpot = up_sum_bi(m)
    return TruncatedBundle(delta, ind, m, tpot, _total(m * bundle.istar_mu))


def truncated_energy_via_potential(bundle: PotentialBundle, tb: TruncatedBundle) -> float:
    return _total(tb.truncated_potential * bundle.mu)


# -- simple tree -------------------------------------------------------------


def tree_potential(mu: np.ndarray) -> np.ndarray:
    mu = _require_nonnegative(mu)
    return up_sum_tree(down_sum_tree(mu))


def tree_truncated(mu: np.ndarray, delta: float) -> np.ndarray:
    mu = _require_nonnegative(mu)
    if not delta > 0:
        raise ValueError("delta must be > 0")
    h = down_sum_tree(mu)
    v = up_sum_tree(h)
    return up_sum_tree(np.where(v <= delta, h, 0).astype(h.dtype))


def check_tree_max_principle(h: np.ndarray) -> Certificate:
    """``max Ih`` over the whole tree equals its max over ``supp h``."""
    h = _require_nonnegative(h, "h")
    ih = up_sum_tree(h)
    supp = h > 0
    top = ih.max().item()
    on_supp = ih[supp].max().item() if supp.any() else 0
    witness = None
    if top != on_supp:
        witness = NodeRef.from_heap(int(np.argmax(ih)))
    return Certificate("tree_max_principle", top, on_supp, top == on_supp, witness)


def check_tree_potential_bound(mu: np.ndarray, bound: float | None = None) -> Certificate:
    """If ``V <= bound`` on ``supp mu`` then ``V <= bound`` everywhere.

    ``bound`` defaults to ``max V`` over ``supp mu``, which makes the check
    scale-free and exact for integer masses.
    """
    mu = _require_nonnegative(mu)
    v = tree_potential(mu)
    supp = mu > 0
    on_supp = v[supp].max().item() if supp.any() else 0
    if bound is None:
        bound = on_supp
    elif on_supp > bound:
        raise ValueError("hypothesis fails: potential exceeds bound on supp mu")
    top = v.max().item()
    witness = None if top <= bound else NodeRef.from_heap(int(np.argmax(v)))
    return Certificate("tree_potential_max_principle", top, bound, top <= bound, witness)


def check_one_param_bound(mu: np.ndarray, delta: float) -> Certificate:
    """``sum V_delta * mu <= delta * |mu|`` on a simple tree."""
    mu = _require_nonnegative(mu)
    vd = tree_truncated(mu, delta)
    lhs = (vd * mu).sum().item()
    rhs = delta * mu.sum().item()
    return Certificate(
        "one_parameter_bound", lhs, rhs, lhs <= rhs,
        details={"max_truncated_potential": vd.max().item(), "delta": delta},
    )


def find_bi_violation(h: np.ndarray) -> Certificate:
    """Compare ``max Ih`` on the bi-tree with its max over ``supp h``.

    ``passed`` is True when the two agree (no violation); otherwise the
    witness is a bi-node where the global maximum is attained.
    """
    h = _require_nonnegative(h, "h")
    ih = up_sum_bi(h)
    supp = h > 0
    top = ih.max().item()
    on_supp = ih[supp].max().item() if supp.any() else 0
    witness = None
    if top > on_supp:
        p1, p2 = np.unravel_index(int(np.argmax(ih)), ih.shape)
        witness = BiNodeRef.from_heap(int(p1), int(p2))
    return Certificate("bi_max_principle", top, on_supp, top <= on_supp, witness)


def upset_domination_holds(h: np.ndarray, upset: np.ndarray) -> bool:
    """``1_E * Ih <= I(1_E * h)`` pointwise, for an up-set ``E``."""
    lhs = np.where(upset, up_sum_bi(h), 0)
    rhs = up_sum_bi(np.where(upset, h, 0))
    return bool(np.all(lhs <= rhs))
