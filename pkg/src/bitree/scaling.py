"""Energy-scaling certificates on concrete measures.

Everything here reduces to truncated energies ``E_delta[mu]`` evaluated along
a ladder of thresholds. The geometric induction ladder is
``delta_k = A * (4 A0) ** -(k (k+1) / 2)`` with ``A = E[mu] / |mu|``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .certificates import Certificate, PreconditionError, leq, leq_array, within_sixth
from .hardy import down_sum_tree, up_sum_tree
from .majorant import A0
from .potentials import PotentialBundle, as_bundle
from .tree import BiShape, NodeRef


@dataclass(frozen=True)
class ScalingConstants:
    A0: float = A0
    c0: float = 6.0
    tau: float = 0.5

    def __post_init__(self):
        if not self.A0 > 0:
            raise ValueError("A0 must be positive")
        if self.c0 < 6:
            raise ValueError("c0 must be >= 6")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")

    @property
    def T_stop(self) -> float:
        return self.c0 ** (1 / self.tau)


def _profile(bundle: PotentialBundle):
    # cache the sorted profile on the (frozen) bundle object
    prof = bundle.__dict__.get("_profile")
    if prof is None:
        prof = bundle.energy_profile()
        object.__setattr__(bundle, "_profile", prof)
    return prof


def truncated_energy(bundle: PotentialBundle, delta: float) -> float:
    return _profile(bundle)(delta)


def check_two_scale(mu, delta: float, lam: float, a0: float = A0) -> Certificate:
    """``E_delta <= 2 A0 (delta / 3 lam) E_{3 lam} + 10 lam |mu|`` for ``delta <= lam/6``."""
    if not (delta > 0 and lam > 0) or not within_sixth(delta, lam):
        raise PreconditionError("need 0 < delta <= lambda/6")
    b = as_bundle(mu)
    lhs = truncated_energy(b, delta)
    rhs = 2 * a0 * (delta / (3 * lam)) * truncated_energy(b, 3 * lam) + 10 * lam * b.mass
    return Certificate("two_scale", lhs, rhs, leq(lhs, rhs),
                       details={"delta": delta, "lambda": lam})


def implicit_two_scale_ratio(mu, delta: float, lam: float) -> float:
    """Smallest ``c`` with ``E_delta <= c ((delta/lam) E_lam + lam |mu|)``."""
    b = as_bundle(mu)
    denom = (delta / lam) * truncated_energy(b, lam) + lam * b.mass
    return truncated_energy(b, delta) / denom if denom > 0 else 0.0


def induction_ladder(A: float, a0: float, kmax: int) -> list[float]:
    return [A * (4 * a0) ** (-(k * (k + 1) / 2)) for k in range(kmax + 1)]


def surrogate_bound(delta: float, mass: float, energy: float, a0: float = A0) -> float:
    """``(4 A0)**(k+1) * delta_k * |mu|`` for the largest ``k`` with ``delta_k >= delta``.

    By monotonicity of ``E_delta`` in ``delta`` this bounds ``E_delta[mu]``.
    Requires ``E[mu] >= 2 delta |mu|`` and ``|mu| > 0``.
    """
    if not (mass > 0 and delta > 0):
        raise PreconditionError("need mass > 0 and delta > 0")
    if energy < 2 * delta * mass:
        raise PreconditionError("need E[mu] >= 2 delta |mu|")
    A = energy / mass
    q = 4 * a0
    if delta > A:
        return energy
    k = 0
    # delta_{k+1} = delta_k / q**(k+1)
    dk = A
    while dk / q ** (k + 1) >= delta:
        dk /= q ** (k + 1)
        k += 1
    return q ** (k + 1) * dk * mass


def check_surrogate(mu, delta: float, a0: float = A0) -> Certificate:
    b = as_bundle(mu)
    bound = surrogate_bound(delta, b.mass, b.energy, a0)
    lhs = truncated_energy(b, delta)
    return Certificate("surrogate_bound", lhs, bound, leq(lhs, bound), details={"delta": delta})


def check_theorem_eps(mu, delta: float, tau: float, c0: float = 6.0) -> Certificate:
    """``E_delta <= c0**(1/tau) delta**(1-tau) |mu|**(1-tau) E**tau``."""
    b = as_bundle(mu)
    if not (0 < b.mass <= b.energy < math.inf):
        raise PreconditionError("need 0 < |mu| <= E[mu] < inf")
    if not 0 < tau < 1 or not delta > 0:
        raise PreconditionError("need 0 < tau < 1 and delta > 0")
    C = ScalingConstants(c0=c0, tau=tau).T_stop
    lhs = truncated_energy(b, delta)
    rhs = C * delta ** (1 - tau) * b.mass ** (1 - tau) * b.energy ** tau
    return Certificate("theorem_eps", lhs, rhs, leq(lhs, rhs),
                       details={"delta": delta, "tau": tau, "C_tau": C})


def minimal_corollary_constant(mu, delta: float) -> float:
    """Smallest ``c >= 0`` with ``E_delta <= delta exp(c sqrt(log 1/delta)) E``."""
    b = as_bundle(mu)
    if not b.mass <= b.energy:
        raise PreconditionError("need |mu| <= E[mu]")
    if not 0 < delta < 1:
        raise PreconditionError("need 0 < delta < 1")
    ed = truncated_energy(b, delta)
    if ed <= 0:
        return 0.0
    return max(0.0, math.log(ed / (delta * b.energy)) / math.sqrt(math.log(1 / delta)))


def check_corollary_vmu(mu, delta: float, c_max: float = 10.0) -> Certificate:
    c = minimal_corollary_constant(mu, delta)
    return Certificate("corollary_vmu", c, c_max, c <= c_max, details={"delta": delta})


def check_tree_energy(mu: np.ndarray, delta: float) -> Certificate:
    """On a simple tree: ``E_delta <= delta * E`` whenever ``|mu| <= E``."""
    mu = np.asarray(mu)
    if np.any(mu < 0) or mu.ndim != 1:
        raise PreconditionError("need a non-negative tree measure")
    h = down_sum_tree(mu)
    v = up_sum_tree(h)
    energy = float((h * h).sum())
    if not float(mu.sum()) <= energy:
        raise PreconditionError("need |mu| <= E[mu]")
    lhs = float(np.where(v <= delta, h * h, 0).sum())
    return Certificate("tree_energy", lhs, delta * energy, leq(lhs, delta * energy),
                       details={"delta": delta})


# -- ladders -------------------------------------------------------------------


@dataclass
class LadderRow:
    delta: float
    energy_delta: float
    bound_surrogate: float | None
    bound_tau: dict[float, float]
    pass_surrogate: bool
    pass_tau: dict[float, bool]


@dataclass
class LadderReport:
    mu_id: str
    mass: float
    energy: float
    A: float
    c0: float
    rows: list[LadderRow] = field(default_factory=list)
    corollary_c: float | None = None

    @property
    def passed(self) -> bool:
        return all(r.pass_surrogate and all(r.pass_tau.values()) for r in self.rows)

    def to_csv(self) -> str:
        taus = sorted(self.rows[0].bound_tau) if self.rows else []
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "energy_delta", "bound_surrogate"]
                   + [f"bound_tau_{t:g}" for t in taus]
                   + ["pass_surrogate"] + [f"pass_tau_{t:g}" for t in taus])
        for r in self.rows:
            w.writerow([repr(float(r.delta)), repr(float(r.energy_delta)),
                        "" if r.bound_surrogate is None else repr(float(r.bound_surrogate))]
                       + [repr(float(r.bound_tau[t])) for t in taus]
                       + [int(r.pass_surrogate)] + [int(r.pass_tau[t]) for t in taus])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "mu_id": self.mu_id, "mass": self.mass, "energy": self.energy, "A": self.A,
            "c0": self.c0, "corollary_c": self.corollary_c, "pass": self.passed,
            "rows": [
                {"delta": r.delta, "energy_delta": r.energy_delta,
                 "bound_surrogate": r.bound_surrogate,
                 "bound_tau": {f"{t:g}": v for t, v in sorted(r.bound_tau.items())},
                 "pass_surrogate": r.pass_surrogate,
                 "pass_tau": {f"{t:g}": v for t, v in sorted(r.pass_tau.items())}}
                for r in self.rows
            ],
        }


def default_deltas(A: float, lo: int = 1, hi: int = 20, steps: int | None = None) -> list[float]:
    """Geometric grid ``2**-lo * A, ..., 2**-hi * A``."""
    steps = steps or (hi - lo + 1)
    return [float(A * 2.0 ** -e) for e in np.linspace(lo, hi, steps)]


def breakpoint_deltas(bundle: PotentialBundle) -> list[float]:
    """Distinct potential values on ``supp I* mu``: the jumps of ``delta -> E_delta``.

    ``E_delta`` is a right-continuous step function, so evaluating at these
    points (plus the induction rungs) covers every ``delta`` for bounds that
    are non-decreasing in ``delta``.
    """
    return np.unique(bundle.potential[bundle.istar_mu > 0]).tolist()


def exhaustive_deltas(bundle: PotentialBundle, a0: float = A0) -> list[float]:
    A = bundle.energy / bundle.mass
    rungs = [d for d in induction_ladder(A, a0, 8) if d > 0]
    return sorted(set(default_deltas(A)) | set(breakpoint_deltas(bundle)) | set(rungs))


def _pair_grid(bundle: PotentialBundle, deltas):
    d = np.asarray(sorted(deltas), dtype=np.float64)
    e = np.array([truncated_energy(bundle, x) for x in d])
    pairs = within_sixth(d[:, None], d[None, :])
    return d, e, pairs


def two_scale_on_ladder(mu, deltas, a0: float = A0) -> Certificate:
    """``check_two_scale`` over every ladder pair ``delta <= lam / 6`` at once."""
    b = as_bundle(mu)
    d, e, pairs = _pair_grid(b, deltas)
    e3 = np.array([truncated_energy(b, 3 * x) for x in d])
    rhs = 2 * a0 * (d[:, None] / (3 * d[None, :])) * e3[None, :] + 10 * d[None, :] * b.mass
    lhs = np.broadcast_to(e[:, None], rhs.shape)
    ok = leq_array(lhs, rhs) | ~pairs
    ratio = np.where(pairs & (rhs > 0), lhs / np.where(rhs > 0, rhs, 1), 0.0)
    worst = float(ratio.max(initial=0.0))
    witness = None
    if not ok.all():
        i, j = np.argwhere(~ok)[0]
        witness = (float(d[i]), float(d[j]))
    return Certificate("two_scale_ladder", worst, 1.0, bool(ok.all()), witness,
                       details={"pairs": int(pairs.sum())})


def observed_two_scale_constant(mu, deltas) -> float:
    """Largest implicit two-scale ratio over all ladder pairs ``delta <= lam/6``."""
    b = as_bundle(mu)
    d, e, pairs = _pair_grid(b, deltas)
    denom = (d[:, None] / d[None, :]) * e[None, :] + d[None, :] * b.mass
    ratio = np.where(pairs & (denom > 0), e[:, None] / np.where(denom > 0, denom, 1), 0.0)
    return float(ratio.max(initial=0.0))


def build_ladder(mu, mu_id: str = "mu", deltas=None, taus=(0.1, 0.25, 0.5),
                 a0: float = A0, c0: float | None = None) -> LadderReport:
    """Surrogate and theorem bounds along a ladder; defaults to ``exhaustive_deltas``."""
    b = as_bundle(mu)
    if not b.mass > 0:
        raise PreconditionError("ladder needs a non-zero measure")
    A = b.energy / b.mass
    deltas = sorted(float(d) for d in (deltas if deltas is not None else exhaustive_deltas(b, a0)))
    if c0 is None:
        c0 = max(6.0, observed_two_scale_constant(b, deltas))
    rep = LadderReport(mu_id, b.mass, b.energy, A, c0)
    theorem_ok = b.mass <= b.energy
    for d in deltas:
        ed = truncated_energy(b, d)
        sb = None
        ok_s = True
        if b.energy >= 2 * d * b.mass:
            sb = surrogate_bound(d, b.mass, b.energy, a0)
            ok_s = leq(ed, sb)
        bt, pt = {}, {}
        for t in taus:
            if theorem_ok:
                c = check_theorem_eps(b, d, t, c0)
                bt[t], pt[t] = float(c.rhs), bool(c.passed)
            else:
                bt[t], pt[t] = math.nan, True
        rep.rows.append(LadderRow(d, ed, sb, bt, ok_s, pt))
    if theorem_ok:
        cs = [minimal_corollary_constant(b, d) for d in deltas if 0 < d < 1]
        rep.corollary_c = max(cs, default=0.0)
    return rep


def fit_exponent(report: LadderReport) -> float:
    """Least-squares slope of ``log E_delta`` against ``log delta``."""
    pts = [(r.delta, r.energy_delta) for r in report.rows if r.energy_delta > 0]
    if len(pts) < 3:
        raise ValueError("need at least 3 ladder rows with positive truncated energy")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


# -- measure generators ------------------------------------------------------------


class MeasureKind(str, Enum):
    uniform_leaves = "uniform_leaves"
    sparse_random = "sparse_random"
    diagonal = "diagonal"
    single_node = "single_node"


def generate_measure(kind: MeasureKind | str, bishape: BiShape, seed: int = 0) -> np.ndarray:
    """Non-negative dyadic-rational masses, deterministic in ``seed``."""
    kind = MeasureKind(kind)
    rng = np.random.default_rng(seed)
    mu = bishape.zeros()
    s1, s2 = bishape.shape1, bishape.shape2
    if kind is MeasureKind.single_node:
        mu[0, 0] = 1.0
    elif kind is MeasureKind.uniform_leaves:
        n_leaves = (1 << s1.depth) * (1 << s2.depth)
        mu[s1.level_slice(s1.depth), s2.level_slice(s2.depth)] = 1.0 / n_leaves
    elif kind is MeasureKind.diagonal:
        d = min(s1.depth, s2.depth)
        for i in range(1 << d):
            node = NodeRef(d, i)
            mu[node.heap, node.heap] = int(rng.integers(1, 17)) / 16
    else:
        keep = rng.random(bishape.dims) < 0.03
        keep[-1, -1] = True
        mu = np.where(keep, rng.integers(1, 65, size=bishape.dims) / 64, 0.0)
    return mu


def normalize_for_theorem(mu: np.ndarray) -> np.ndarray:
    """Scale by a power of two so that ``|mu| <= E[mu]`` (energy is quadratic)."""
    b = as_bundle(mu)
    if b.mass <= 0 or b.mass <= b.energy:
        return mu
    k = math.ceil(math.log2(b.mass / b.energy))
    return mu * 2.0 ** k
