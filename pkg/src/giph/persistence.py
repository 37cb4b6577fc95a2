"""Degree-0 sublevel-set persistence by union-find with the elder rule.

Grid nodes are swept in increasing value order (stable, so ties resolve
left-to-right or row-major). A node with no processed neighbour starts a
component; when two components meet at value ``t`` the one born later dies
at ``t``. Pairs with zero persistence are dropped.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numba
import numpy as np

from .pl_core import PLFunction, padded_grid, sample


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Finite ``(birth, death)`` pairs plus births of essential classes."""

    finite: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    essential: np.ndarray = field(default_factory=lambda: np.empty(0))
    degree: int = 0

    def __post_init__(self):
        finite = np.asarray(self.finite, dtype=float).reshape(-1, 2)
        essential = np.asarray(self.essential, dtype=float).reshape(-1)
        if finite.size and np.any(finite[:, 1] <= finite[:, 0]):
            raise ValueError("finite points need death > birth")
        object.__setattr__(self, "finite", finite)
        object.__setattr__(self, "essential", essential)

    def __len__(self):
        return len(self.finite) + len(self.essential)

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return (
            self.degree == other.degree
            and np.array_equal(_sorted_rows(self.finite), _sorted_rows(other.finite))
            and np.array_equal(np.sort(self.essential), np.sort(other.essential))
        )

    def __repr__(self):
        pts = [f"({b:.4g}, {d:.4g})" for b, d in _sorted_rows(self.finite)]
        pts += [f"({b:.4g}, inf)" for b in np.sort(self.essential)]
        return f"PersistenceDiagram([{', '.join(pts)}])"

    def shifted(self, c: float) -> "PersistenceDiagram":
        return PersistenceDiagram(self.finite + c, self.essential + c, self.degree)

    def to_record(self, id=None, operator=None) -> dict:
        return {
            "id": id,
            "operator": operator,
            "finite": _sorted_rows(self.finite).tolist(),
            "essential": np.sort(self.essential).tolist(),
        }

    def to_json(self, id=None, operator=None) -> str:
        return json.dumps(self.to_record(id, operator))

    @classmethod
    def from_record(cls, record: dict) -> "PersistenceDiagram":
        return cls(record["finite"], record["essential"])


def _sorted_rows(a: np.ndarray) -> np.ndarray:
    if len(a) == 0:
        return a
    return a[np.lexsort((a[:, 1], a[:, 0]))]


@numba.njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@numba.njit(cache=True)
def _merge(parent, birth, a, b, t, out, k):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return k
    if birth[ra] <= birth[rb]:
        old, young = ra, rb
    else:
        old, young = rb, ra
    if t > birth[young]:
        out[k, 0] = birth[young]
        out[k, 1] = t
        k += 1
    parent[young] = old
    return k


@numba.njit(cache=True)
def _sweep_1d(values, order):
    n = values.shape[0]
    parent = np.full(n, -1, np.int64)
    birth = np.empty(n)
    out = np.empty((n, 2))
    k = 0
    for i in order:
        v = values[i]
        parent[i] = i
        birth[i] = v
        if i > 0 and parent[i - 1] >= 0:
            k = _merge(parent, birth, i, i - 1, v, out, k)
        if i + 1 < n and parent[i + 1] >= 0:
            k = _merge(parent, birth, i, i + 1, v, out, k)
    return out[:k], birth[_find(parent, order[0])]


@numba.njit(cache=True)
def _sweep_2d(values, order, width):
    n = values.shape[0]
    parent = np.full(n, -1, np.int64)
    birth = np.empty(n)
    out = np.empty((n, 2))
    k = 0
    for i in order:
        v = values[i]
        parent[i] = i
        birth[i] = v
        col = i % width
        if col > 0 and parent[i - 1] >= 0:
            k = _merge(parent, birth, i, i - 1, v, out, k)
        if col + 1 < width and parent[i + 1] >= 0:
            k = _merge(parent, birth, i, i + 1, v, out, k)
        if i >= width and parent[i - width] >= 0:
            k = _merge(parent, birth, i, i - width, v, out, k)
        if i + width < n and parent[i + width] >= 0:
            k = _merge(parent, birth, i, i + width, v, out, k)
    return out[:k], birth[_find(parent, order[0])]


def diagram_1d(values) -> PersistenceDiagram:
    """Degree-0 diagram of the sublevel filtration of a sampled 1D function."""
    values = np.ascontiguousarray(values, dtype=float).reshape(-1)
    if values.size == 0:
        raise ValueError("empty array")
    order = np.argsort(values, kind="stable")
    finite, ess = _sweep_1d(values, order)
    return PersistenceDiagram(finite.copy(), [ess])


def diagram_2d(grid) -> PersistenceDiagram:
    """Degree-0 diagram of a 2D grid function with 4-connectivity.

    ``grid`` is a :class:`~giph.dataset.GridFunction2D` or a 2D array.
    """
    values = np.asarray(getattr(grid, "values", grid), dtype=float)
    if values.ndim != 2 or values.size == 0:
        raise ValueError("need a non-empty 2D grid")
    flat = np.ascontiguousarray(values).reshape(-1)
    order = np.argsort(flat, kind="stable")
    finite, ess = _sweep_2d(flat, order, values.shape[1])
    return PersistenceDiagram(finite.copy(), [ess])


def pl_nodes(f: PLFunction, resolution: int) -> np.ndarray:
    """Uniform padded-window nodes merged with the breakpoints of ``f``."""
    return np.union1d(padded_grid(f, resolution).nodes, f.xs)


def diagram_of_pl(f: PLFunction, resolution: int = 1024) -> PersistenceDiagram:
    """Diagram of a PL function, sampled on its padded window.

    Breakpoints are added to the uniform nodes, which makes the result exact:
    sublevel components of a PL function change only at breakpoints.
    """
    return diagram_1d(sample(f, pl_nodes(f, resolution)))
