"""Bi-tree capacity ``cap(E) = min { sum f**2 : f >= 0, I f >= 1 on E }``.

``I f`` is monotone along the order (a descendant sees every ancestor of its
parent), so only the maximal elements of ``E`` carry constraints. With the
constraint matrix ``B`` (rows are ancestor indicators) the dual problem is

    min_{nu >= 0}  1/2 nu^T G nu - sum(nu),   G = B B^T,

where ``G[a, b]`` counts common ancestors, ``(c1 + 1) * (c2 + 1)`` for least
common levels ``c1, c2``. The primal optimum is ``f = B^T nu``, which is
non-negative automatically, and ``cap(E) = sum(nu)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .hardy import down_sum_bi, up_sum_bi
from .tree import BiNodeRef, BiShape, bishape_of, common_level_matrix


class CapacityNotConverged(RuntimeError):
    def __init__(self, message: str, residuals: dict):
        super().__init__(f"{message}: {residuals}")
        self.residuals = residuals


@dataclass
class CapacityProblem:
    target: np.ndarray
    f: np.ndarray
    value: float
    constraints: list[BiNodeRef] = field(default_factory=list)
    multipliers: np.ndarray | None = None
    feasibility_residual: float = 0.0
    slackness_residual: float = 0.0
    iterations: int = 0

    def summary(self) -> dict:
        return {
            "value": float(self.value),
            "constraints": len(self.constraints),
            "target_size": int(self.target.sum()),
            "feasibility_residual": float(self.feasibility_residual),
            "slackness_residual": float(self.slackness_residual),
            "iterations": int(self.iterations),
        }


def maximal_elements(mask: np.ndarray) -> np.ndarray:
    """Nodes of ``mask`` with no strict ancestor in ``mask``."""
    mask = np.asarray(mask, dtype=bool)
    # count of ancestors-or-self in mask, then keep those with exactly one
    return mask & (up_sum_bi(mask.astype(np.int64)) == 1)


def _gram(shape: BiShape, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    c1 = common_level_matrix(shape.shape1)[np.ix_(p1, p1)]
    c2 = common_level_matrix(shape.shape2)[np.ix_(p2, p2)]
    return ((c1 + 1) * (c2 + 1)).astype(np.float64)


def _kkt(G: np.ndarray, nu: np.ndarray) -> tuple[float, float]:
    g = G @ nu
    feas = float(np.max(np.maximum(0.0, 1.0 - g), initial=0.0))
    slack = float(np.max(np.abs(nu * (g - 1.0)), initial=0.0))
    return feas, slack


def _polish(G: np.ndarray, nu: np.ndarray, tol: float) -> np.ndarray:
    # re-solve the equality system on the current support, accept if it stays optimal
    for _ in range(len(nu) + 1):
        act = nu > tol
        if not act.any():
            return nu
        sol, *_ = np.linalg.lstsq(G[np.ix_(act, act)], np.ones(int(act.sum())), rcond=None)
        cand = np.zeros_like(nu)
        cand[act] = sol
        if np.any(sol < 0):
            return nu
        g = G @ cand
        viol = (~act) & (g < 1.0 - tol)
        if not viol.any():
            return cand
        # bring in the worst violated constraint and try again
        nu = cand.copy()
        nu[int(np.argmin(np.where(viol, g, np.inf)))] = tol * 10
    return nu


def solve_dual(G: np.ndarray, tol: float = 1e-10, max_sweeps: int = 20000) -> tuple[np.ndarray, int]:
    """Projected coordinate descent for ``min 1/2 nu G nu - sum nu, nu >= 0``."""
    k = G.shape[0]
    nu = np.zeros(k)
    g = np.zeros(k)
    diag = np.diag(G).copy()
    obj_prev = 0.0
    for sweep in range(1, max_sweeps + 1):
        for a in range(k):
            new = max(0.0, nu[a] + (1.0 - g[a]) / diag[a])
            step = new - nu[a]
            if step != 0.0:
                g += step * G[:, a]
                nu[a] = new
        obj = 0.5 * nu @ g - nu.sum()
        feas, slack = _kkt(G, nu)
        if feas < tol and slack < tol and abs(obj - obj_prev) <= tol * max(1.0, abs(obj)):
            return nu, sweep
        obj_prev = obj
        if sweep % 50 == 0:
            cand = _polish(G, nu, tol)
            if max(_kkt(G, cand)) < tol:
                return cand, sweep
    raise CapacityNotConverged("coordinate descent hit the sweep cap",
                               dict(zip(("feasibility", "slackness"), _kkt(G, nu))))


def estimate_capacity(target, shape: BiShape | None = None, tol: float = 1e-10,
                      max_sweeps: int = 20000) -> CapacityProblem:
    """Capacity of a set of bi-nodes, given as a boolean mask or a node list."""
    if isinstance(target, np.ndarray):
        mask = target.astype(bool)
        shape = shape or bishape_of(mask)
    else:
        if shape is None:
            raise ValueError("shape is required when target is a node list")
        mask = np.zeros(shape.dims, dtype=bool)
        for node in target:
            if not shape.contains(node):
                raise ValueError(f"{node} outside {shape}")
            mask[node.heap] = True
    if not mask.any():
        return CapacityProblem(mask, np.zeros(mask.shape), 0.0)
    top = maximal_elements(mask)
    p1, p2 = np.nonzero(top)
    G = _gram(shape, p1, p2)
    nu, sweeps = solve_dual(G, tol, max_sweeps)
    weights = np.zeros(mask.shape)
    weights[p1, p2] = nu
    f = down_sum_bi(weights)
    feas_full = float(np.max(np.maximum(0.0, 1.0 - up_sum_bi(f)[mask])))
    _, slack = _kkt(G, nu)
    return CapacityProblem(
        mask, f, float((f * f).sum()),
        [BiNodeRef.from_heap(int(a), int(b)) for a, b in zip(p1, p2)],
        nu, feas_full, slack, sweeps,
    )


def brute_force_capacity(G: np.ndarray) -> float:
    """Enumerate active sets of the dual (tiny problems only)."""
    k = G.shape[0]
    if k > 8:
        raise ValueError("brute force limited to 8 constraints")
    best = 0.0 if k == 0 else np.inf
    for r in range(1, k + 1):
        for act in itertools.combinations(range(k), r):
            idx = list(act)
            try:
                sol = np.linalg.solve(G[np.ix_(idx, idx)], np.ones(r))
            except np.linalg.LinAlgError:
                continue
            if np.any(sol < -1e-12):
                continue
            nu = np.zeros(k)
            nu[idx] = sol
            if np.all(G @ nu >= 1 - 1e-12):
                best = min(best, float(nu.sum()))
    return best


def gram_of(nodes: list[BiNodeRef], shape: BiShape) -> np.ndarray:
    p1 = np.array([n.first.heap for n in nodes], dtype=np.int64)
    p2 = np.array([n.second.heap for n in nodes], dtype=np.int64)
    return _gram(shape, p1, p2)


def superlevel_capacities(potential: np.ndarray, lams, tol: float = 1e-10) -> list[tuple[float, float]]:
    """``(lam, cap{V >= lam})`` for each threshold, in the given order."""
    out = []
    for lam in lams:
        prob = estimate_capacity(potential >= lam, tol=tol)
        out.append((float(lam), prob.value))
    return out


def is_non_increasing(values, rel: float = 1e-9) -> bool:
    return all(b <= a + rel * max(1.0, abs(a)) for a, b in zip(values, values[1:]))
