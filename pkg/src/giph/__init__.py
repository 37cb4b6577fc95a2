"""Comparing filtering functions up to a group action via persistence of operator outputs."""
from .pl_core import AffineMap, PLFunction, compose_affine, evaluate, sup_distance
from .persistence import PersistenceDiagram, diagram_1d, diagram_2d, diagram_of_pl
from .bottleneck import bottleneck_distance
from .groups import GroupSpec, SquareSymmetry

__all__ = [
    "AffineMap",
    "PLFunction",
    "compose_affine",
    "evaluate",
    "sup_distance",
    "PersistenceDiagram",
    "diagram_1d",
    "diagram_2d",
    "diagram_of_pl",
    "bottleneck_distance",
    "GroupSpec",
    "SquareSymmetry",
]
