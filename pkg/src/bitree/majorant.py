"""Majorant construction for truncated bi-tree potentials, plus two standalone
inequality verifiers (superadditive down-sums and positive-kernel energies).

With ``n = I*mu`` and ``m = 1_{E_delta} n`` the majorant is

    phi = (I1 m * I2 n + I2 m * I1 n) * 1_{E_{3 lam} \\ E_delta} / lam

where ``I1``/``I2`` sum up along one coordinate only. Its three certified
properties are majorization of ``V_delta`` where that is large, support in the
band ``{delta < V <= 3 lam}``, and an energy bound ``sum phi**2 <= A0 (delta /
3 lam) E_delta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .certificates import REL_SLACK, Certificate, PreconditionError, leq, leq_array, within_sixth
from .hardy import (
    down_max_tree,
    down_sum_bi,
    down_sum_tree,
    up_sum_1,
    up_sum_2,
    up_sum_bi,
    up_sum_tree,
)
from .potentials import (
    PotentialBundle,
    TruncatedBundle,
    as_bundle,
    build_truncated,
    is_up_set,
)
from .tree import BiNodeRef, BiShape, NodeRef

# energy constant: each of the two symmetric terms is at most (2/lam^2) * 3 delta lam * E_delta
A0 = 36.0


@dataclass(frozen=True)
class MajorantInput:
    mu: np.ndarray
    delta: float
    lam: float

    def __post_init__(self):
        if not (self.delta > 0 and self.lam > 0):
            raise PreconditionError("delta and lambda must be positive")
        if not within_sixth(self.delta, self.lam):
            raise PreconditionError(f"need delta <= lambda/6, got delta={self.delta}, lambda={self.lam}")


@dataclass
class MajorantCertificate:
    phi: np.ndarray
    delta: float
    lam: float
    claim1_pass: bool = False
    claim1_strong_pass: bool = False
    claim1_local_pass: bool = False
    claim2_pass: bool = False
    claim3_pass: bool = False
    claim3_ratio: float = 0.0
    worst_node: dict = field(default_factory=dict)
    domain_sizes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.claim1_pass and self.claim1_strong_pass and self.claim1_local_pass
                and self.claim2_pass and self.claim3_pass)

    def summary(self) -> dict:
        return {
            "delta": self.delta,
            "lambda": self.lam,
            "claim1_pass": self.claim1_pass,
            "claim1_strong_pass": self.claim1_strong_pass,
            "claim1_local_pass": self.claim1_local_pass,
            "claim2_pass": self.claim2_pass,
            "claim3_pass": self.claim3_pass,
            "claim3_ratio": self.claim3_ratio,
            "worst_node": self.worst_node,
            "domain_sizes": self.domain_sizes,
        }


@dataclass
class MajorantParts:
    """Intermediate arrays of the construction, kept for diagnostics."""

    bundle: PotentialBundle
    truncated: TruncatedBundle
    m: np.ndarray
    n: np.ndarray
    band: np.ndarray
    I1m: np.ndarray
    I2m: np.ndarray
    I1n: np.ndarray
    I2n: np.ndarray


def _heap_node(flat: int, shape) -> BiNodeRef:
    p1, p2 = np.unravel_index(flat, shape)
    return BiNodeRef.from_heap(int(p1), int(p2))


def majorant_parts(inp: MajorantInput, bundle: PotentialBundle | None = None) -> MajorantParts:
    bundle = bundle if bundle is not None else as_bundle(inp.mu)
    tb = build_truncated(bundle, inp.delta)
    n = bundle.istar_mu.astype(np.float64)
    m = tb.masked_istar.astype(np.float64)
    pot = bundle.potential
    band = (pot <= 3 * inp.lam) & ~(pot <= inp.delta)
    return MajorantParts(bundle, tb, m, n, band, up_sum_1(m), up_sum_2(m), up_sum_1(n), up_sum_2(n))


def build_majorant(inp: MajorantInput, bundle: PotentialBundle | None = None) -> MajorantCertificate:
    parts = majorant_parts(inp, bundle)
    phi = np.where(parts.band, parts.I1m * parts.I2n + parts.I2m * parts.I1n, 0.0) / inp.lam
    cert = MajorantCertificate(phi, inp.delta, inp.lam)
    verify_majorization(cert, parts.bundle, parts.truncated)
    verify_support(cert, parts.bundle)
    verify_energy(cert, parts.truncated)
    return cert


def _check_matches(cert: MajorantCertificate, arr: np.ndarray):
    if cert.phi.shape != arr.shape:
        raise ValueError("certificate and bundle live on different bi-trees")


def verify_majorization(cert: MajorantCertificate, bundle: PotentialBundle, truncated: TruncatedBundle) -> bool:
    """Claim (1) with constants (1/4, 40 lam), the everywhere form with the
    additive ``10 lam``, and the sharper (19/20, 20 lam) local form."""
    _check_matches(cert, truncated.truncated_potential)
    if truncated.delta != cert.delta:
        raise ValueError("truncation level does not match the certificate")
    lam = cert.lam
    iphi = up_sum_bi(cert.phi)
    vd = truncated.truncated_potential.astype(np.float64)

    dom40 = vd >= 40 * lam
    dom20 = vd >= 20 * lam
    ok1 = leq_array(vd / 4, iphi) | ~dom40
    ok_strong = leq_array(vd / 2, iphi + 10 * lam)
    ok_local = leq_array(19 * vd / 20, iphi) | ~dom20

    cert.claim1_pass = bool(ok1.all())
    cert.claim1_strong_pass = bool(ok_strong.all())
    cert.claim1_local_pass = bool(ok_local.all())
    cert.domain_sizes = {
        "V_delta_ge_40lam": int(dom40.sum()),
        "V_delta_ge_20lam": int(dom20.sum()),
        "max_V_delta_over_lam": float(vd.max() / lam),
    }
    for key, ok, gap in (
        ("claim1", ok1, np.where(dom40, iphi - vd / 4, np.inf)),
        ("claim1_strong", ok_strong, iphi + 10 * lam - vd / 2),
        ("claim1_local", ok_local, np.where(dom20, iphi - 19 * vd / 20, np.inf)),
    ):
        if np.isfinite(gap).any():
            cert.worst_node[key] = _heap_node(int(np.argmin(gap)), gap.shape).as_tuple()
    return cert.claim1_pass and cert.claim1_strong_pass and cert.claim1_local_pass


def verify_support(cert: MajorantCertificate, bundle: PotentialBundle) -> bool:
    _check_matches(cert, bundle.potential)
    pot = bundle.potential
    band = (pot <= 3 * cert.lam) & ~(pot <= cert.delta)
    bad = (cert.phi > 0) & ~band
    cert.claim2_pass = bool(np.all(cert.phi >= 0)) and not bad.any()
    if bad.any():
        cert.worst_node["claim2"] = _heap_node(int(np.argmax(bad)), bad.shape).as_tuple()
    return cert.claim2_pass


def verify_energy(cert: MajorantCertificate, truncated: TruncatedBundle, a0: float = A0) -> bool:
    e_delta = float(truncated.truncated_energy)
    phi2 = float(np.sum(cert.phi ** 2))
    if e_delta > 0:
        cert.claim3_ratio = phi2 * 3 * cert.lam / (cert.delta * e_delta)
        cert.claim3_pass = leq(cert.claim3_ratio, a0)
    else:
        cert.claim3_ratio = 0.0
        cert.claim3_pass = phi2 == 0
    return cert.claim3_pass


# -- ray diagnostics ---------------------------------------------------------


@dataclass
class RayDiagnostics:
    """Ancestor rays of a base node ``(beta0, alpha0)``.

    ``L`` are the second-coordinate ancestors ``alpha`` of ``alpha0`` with
    ``V(beta0, alpha) > 3 lam``; ``R`` the first-coordinate ancestors ``beta``
    of ``beta0`` with ``V(beta, alpha0) > 3 lam``. Both are listed bottom-up.
    """

    base: BiNodeRef
    L: list[NodeRef]
    R: list[NodeRef]
    L_contiguous: bool
    R_contiguous: bool
    sum_L: float
    sum_R: float
    truncated_potential: float
    corner_in_E_delta: bool | None
    band_min: float | None


def ray_diagnostics(parts: MajorantParts, lam: float, base: BiNodeRef) -> RayDiagnostics:
    pot = parts.bundle.potential
    delta = parts.truncated.delta
    b0, a0 = base.first, base.second
    chain2 = a0.ancestors()
    chain1 = b0.ancestors()
    in_L = [pot[b0.heap, a.heap] > 3 * lam for a in chain2]
    in_R = [pot[b.heap, a0.heap] > 3 * lam for b in chain1]
    L = [a for a, x in zip(chain2, in_L) if x]
    R = [b for b, x in zip(chain1, in_R) if x]
    L_cont = in_L == [True] * len(L) + [False] * (len(in_L) - len(L))
    R_cont = in_R == [True] * len(R) + [False] * (len(in_R) - len(R))
    sum_L = float(sum(parts.I1m[b0.heap, a.heap] for a in L))
    sum_R = float(sum(parts.I2m[b.heap, a0.heap] for b in R))
    corner = None
    if L and R:
        corner = bool(pot[R[-1].heap, L[-1].heap] <= delta)
    band_min = None
    if L:
        N = parts.I2n
        vals = []
        for a in L:
            vals.append(sum(N[b.heap, a.heap] for b in chain1
                            if delta < pot[b.heap, a.heap] <= 3 * lam))
        band_min = float(min(vals))
    return RayDiagnostics(base, L, R, L_cont, R_cont, sum_L, sum_R,
                          float(parts.truncated.truncated_potential[base.heap]), corner, band_min)


def covering_holds(rd: RayDiagnostics, delta: float, rel: float = REL_SLACK) -> bool | None:
    """``sum_L + sum_R >= V_delta(base) - delta`` when the corner ``(r, l)`` lies
    in ``E_delta``; None when that case does not apply."""
    if not rd.corner_in_E_delta:
        return None
    return leq(rd.truncated_potential - delta, rd.sum_L + rd.sum_R, rel)


def ray_summary(parts: MajorantParts, lam: float) -> dict:
    """Vectorized ray diagnostics over every base node.

    Reports contiguity of all rays, the covering inequality at bases whose
    corner ``(r, l)`` lies in ``E_delta``, and how often the band lower bound
    ``I1(N 1_band)(beta0, alpha) >= 3/2 lam - 2 delta`` holds for ``alpha`` in L.
    """
    pot = parts.bundle.potential
    delta = parts.truncated.delta
    above = pot > 3 * lam
    # complement of an up-set is a down-set: rays are then automatically prefixes
    contiguous = is_up_set(~above)
    cnt2 = up_sum_2(above.astype(np.int64))
    cnt1 = up_sum_1(above.astype(np.int64))
    sum_L = up_sum_2(np.where(above, parts.I1m, 0.0))
    sum_R = up_sum_1(np.where(above, parts.I2m, 0.0))

    n1, n2 = pot.shape
    lv1 = np.floor(np.log2(np.arange(n1) + 1)).astype(np.int64)
    lv2 = np.floor(np.log2(np.arange(n2) + 1)).astype(np.int64)
    idx1 = np.arange(n1) + 1 - (1 << lv1)
    idx2 = np.arange(n2) + 1 - (1 << lv2)
    P1, P2 = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    has = (cnt1 > 0) & (cnt2 > 0)
    # top of R: ancestor of beta0 at level lv1 - cnt1 + 1
    r_lv = lv1[P1] - cnt1 + 1
    l_lv = lv2[P2] - cnt2 + 1
    r_lv = np.where(has, r_lv, 0)
    l_lv = np.where(has, l_lv, 0)
    r_heap = (1 << r_lv) - 1 + (idx1[P1] >> (lv1[P1] - r_lv))
    l_heap = (1 << l_lv) - 1 + (idx2[P2] >> (lv2[P2] - l_lv))
    corner = has & (pot[r_heap, l_heap] <= delta)
    vd = parts.truncated.truncated_potential
    cover_ok = leq_array(vd - delta, sum_L + sum_R) | ~corner

    band_sum = up_sum_1(np.where(parts.band, parts.I2n, 0.0))
    band_bound = 1.5 * lam - 2 * delta
    band_ok = (band_sum >= band_bound) | ~above
    return {
        "rays_contiguous": bool(contiguous),
        "covering_cases": int(corner.sum()),
        "covering_pass": bool(cover_ok.all()),
        "band_cases": int(above.sum()),
        "band_bound_failures": int((~band_ok).sum()),
    }


# -- standalone verifiers ----------------------------------------------------


def is_superadditive(g: np.ndarray) -> bool:
    """``g(b) >= g(b+) + g(b-)`` at every internal node."""
    d = (g.shape[0] + 1).bit_length() - 2
    for lv in range(d):
        parent = g[(1 << lv) - 1:(1 << (lv + 1)) - 1]
        child = g[(1 << (lv + 1)) - 1:(1 << (lv + 2)) - 1]
        if np.any(parent < child[0::2] + child[1::2]):
            return False
    return True


def verify_superadditive_bound(g: np.ndarray, h: np.ndarray, lam: float) -> Certificate:
    """For superadditive ``g`` with ``Ih <= lam`` on ``supp g``:
    ``I*(gh) <= lam * g`` and the sharper ``I*(gh)(b) <= g(b) * max_{a<=b} Ih(a)``.

    Precondition failures raise :class:`PreconditionError`; conclusion
    failures are returned as a failed certificate.
    """
    g = np.asarray(g)
    h = np.asarray(h)
    if np.any(g < 0) or np.any(h < 0):
        raise PreconditionError("g and h must be non-negative")
    if not is_superadditive(g):
        raise PreconditionError("g is not superadditive")
    ih = up_sum_tree(h)
    supp = g > 0
    if supp.any() and ih[supp].max() > lam:
        raise PreconditionError("Ih exceeds lambda on supp g")
    lhs = down_sum_tree(g * h)
    sharp_rhs = g * down_max_tree(ih)
    ok = np.all(lhs <= lam * g)
    ok_sharp = np.all(lhs <= sharp_rhs)
    gap = lam * g - lhs
    worst = NodeRef.from_heap(int(np.argmin(gap)))
    return Certificate(
        "superadditive_bound", lhs.max().item(), lam, bool(ok and ok_sharp),
        witness=None if ok and ok_sharp else worst,
        details={"plain_pass": bool(ok), "sharp_pass": bool(ok_sharp)},
    )


def verify_kernel_energy_bound(kernel: np.ndarray, f: np.ndarray, g: np.ndarray,
                               rel: float = REL_SLACK) -> Certificate:
    """``sum (Kf)**2 g <= sup_{supp g} (K K^T g) * sum f**2`` and the stronger
    form with ``K diag(1_{supp f}) K^T`` inside the supremum."""
    K = np.asarray(kernel, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if np.any(K < 0) or np.any(f < 0) or np.any(g < 0):
        raise PreconditionError("kernel, f and g must be non-negative")
    Kf = K @ f
    lhs = float(np.sum(Kf ** 2 * g))
    f2 = float(np.sum(f ** 2))
    supp = g > 0
    if not supp.any():
        return Certificate("kernel_energy_bound", lhs, 0.0, lhs == 0.0,
                           details={"strong_rhs": 0.0, "strong_pass": lhs == 0.0})
    plain = K @ (K.T @ g)
    strong = K @ ((f > 0) * (K.T @ g))
    rhs = float(plain[supp].max()) * f2
    rhs_strong = float(strong[supp].max()) * f2
    ok = leq(lhs, rhs, rel)
    ok_strong = leq(lhs, rhs_strong, rel)
    return Certificate("kernel_energy_bound", lhs, rhs, bool(ok and ok_strong),
                       details={"strong_rhs": rhs_strong, "plain_pass": bool(ok),
                                "strong_pass": bool(ok_strong)})


# -- random inputs -------------------------------------------------------------


def random_dyadic_measure(rng: np.random.Generator, bishape: BiShape, density: float = 0.05,
                          max_numer: int = 64, precision: int = 4) -> np.ndarray:
    """Sparse non-negative masses ``k * 2**-precision`` biased toward deep nodes."""
    lv1 = bishape.shape1.levels()
    lv2 = bishape.shape2.levels()
    depth_weight = (lv1[:, None] + lv2[None, :] + 1) / (bishape.shape1.depth + bishape.shape2.depth + 1)
    keep = rng.random(bishape.dims) < density * 2 * depth_weight ** 2
    if not keep.any():
        keep[-1, -1] = True
    k = rng.integers(1, max_numer + 1, size=bishape.dims)
    return np.where(keep, k, 0) * 2.0 ** -precision


def clustered_dyadic_measure(rng: np.random.Generator, bishape: BiShape, atoms: int = 3,
                             max_numer: int = 64, precision: int = 4) -> np.ndarray:
    """A few dyadic atoms on deep nodes inside one random sub-rectangle."""
    mu = bishape.zeros()
    d1, d2 = bishape.shape1.depth, bishape.shape2.depth
    c1 = NodeRef(max(d1 - 2, 0), int(rng.integers(0, 1 << max(d1 - 2, 0))))
    c2 = NodeRef(max(d2 - 2, 0), int(rng.integers(0, 1 << max(d2 - 2, 0))))
    for _ in range(atoms):
        l1 = int(rng.integers(max(c1.level, d1 - 1), d1 + 1))
        l2 = int(rng.integers(max(c2.level, d2 - 1), d2 + 1))
        i1 = (c1.index << (l1 - c1.level)) + int(rng.integers(0, 1 << (l1 - c1.level)))
        i2 = (c2.index << (l2 - c2.level)) + int(rng.integers(0, 1 << (l2 - c2.level)))
        mu[NodeRef(l1, i1).heap, NodeRef(l2, i2).heap] += int(rng.integers(1, max_numer + 1)) * 2.0 ** -precision
    return mu


def random_superadditive(rng: np.random.Generator, depth: int, budget: int = 1 << 20) -> np.ndarray:
    """Integer superadditive function: each node splits at most its own value
    between its two children."""
    n = (1 << (depth + 1)) - 1
    g = np.zeros(n, dtype=np.int64)
    g[0] = rng.integers(0, budget + 1)
    for lv in range(depth):
        for p in range((1 << lv) - 1, (1 << (lv + 1)) - 1):
            left = int(rng.integers(0, g[p] + 1))
            right = int(rng.integers(0, g[p] - left + 1))
            g[2 * p + 1], g[2 * p + 2] = left, right
    return g


def random_majorant_case(rng: np.random.Generator, max_depth: int = 5) -> MajorantInput:
    """A random ``(mu, delta, lam)`` with ``delta <= lam / 6``.

    ``E_delta`` meets ``supp I*mu`` only when ``delta >= |mu|`` (the root's
    potential), so most cases draw ``delta`` from ``[|mu|, max V / 18]``, which
    keeps both ``E_delta`` and the band ``{delta < V <= 3 lam}`` non-empty.
    """
    d1 = int(rng.integers(max(1, max_depth - 2), max_depth + 1))
    d2 = int(rng.integers(max(1, max_depth - 2), max_depth + 1))
    shape = BiShape.of(d1, d2)
    if rng.random() < 0.75:
        mu = clustered_dyadic_measure(rng, shape, atoms=int(rng.integers(1, 4)))
    else:
        density = float(rng.choice([0.002, 0.01, 0.05, 0.2]))
        mu = random_dyadic_measure(rng, shape, density=density)
    pot = up_sum_bi(down_sum_bi(mu))
    mass, vmax = float(mu.sum()), float(pot.max())
    if vmax >= 18 * mass and rng.random() < 0.85:
        delta = mass * 2.0 ** rng.uniform(0, np.log2(vmax / (18 * mass)))
        lam = 6 * delta * 2.0 ** rng.uniform(0, np.log2(vmax / (18 * delta)) + 1e-12)
    else:
        lam = float(rng.uniform(0.05, 1.0)) * vmax / 3
        delta = lam / 6 / 2.0 ** int(rng.integers(0, 6))
    return MajorantInput(mu, min(delta, lam / 6), lam)
