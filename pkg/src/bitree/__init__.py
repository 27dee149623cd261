"""Hardy operators, potentials and energy certificates on dyadic trees and bi-trees."""

from .certificates import Certificate, PreconditionError
from .hardy import down_sum_bi, down_sum_tree, up_sum_bi, up_sum_tree
from .potentials import PotentialBundle, build_potential, build_truncated
from .tree import BI_ROOT, ROOT, BiNodeRef, BiShape, NodeRef, TreeShape

__all__ = [
    "BI_ROOT", "ROOT", "BiNodeRef", "BiShape", "Certificate", "NodeRef", "PotentialBundle",
    "PreconditionError", "TreeShape", "build_potential", "build_truncated",
    "down_sum_bi", "down_sum_tree", "up_sum_bi", "up_sum_tree",
]
