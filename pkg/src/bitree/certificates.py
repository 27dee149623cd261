from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .tree import BiNodeRef, NodeRef

# relative slack for floating comparisons in the certification suites
REL_SLACK = 1e-9


@dataclass
class Certificate:
    """Outcome of checking one inequality ``lhs <= rhs`` (or an equality)."""

    name: str
    lhs: Any
    rhs: Any
    passed: bool
    witness: Any = None
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.passed)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "lhs": jsonable(self.lhs),
            "rhs": jsonable(self.rhs),
            "pass": bool(self.passed),
            "witness": jsonable(self.witness),
        }
        if self.details:
            out["details"] = jsonable(self.details)
        return out


class PreconditionError(ValueError):
    """A hypothesis of the checked statement does not hold for the input."""


def within_sixth(delta, lam):
    """``delta <= lam / 6``, accepting either rounding of the boundary."""
    return (delta <= lam / 6) | (6 * delta <= lam)


def leq(a, b, rel: float = REL_SLACK) -> bool:
    """``a <= b`` up to a relative slack (exact when ``rel == 0``)."""
    return a <= b + rel * max(abs(a), abs(b))


def leq_array(a: np.ndarray, b: np.ndarray, rel: float = REL_SLACK) -> np.ndarray:
    return a <= b + rel * np.maximum(np.abs(a), np.abs(b))


def jsonable(x: Any) -> Any:
    if isinstance(x, BiNodeRef):
        return list(x.as_tuple())
    if isinstance(x, NodeRef):
        return [x.level, x.index]
    if isinstance(x, Certificate):
        return x.to_dict()
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x
