"""Exact piecewise-linear functions on the real line.

A :class:`PLFunction` is stored by its breakpoints and vanishes outside the
interval spanned by the first and last breakpoint. Composition with affine
maps and the sup-norm distance are computed exactly from breakpoints, so no
discretization error enters the natural pseudo-distance oracles.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class AffineMap:
    """The map ``x -> a * x + b``."""

    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if self.a == 0 or not np.isfinite(self.a) or not np.isfinite(self.b):
            raise ValueError(f"invalid affine map a={self.a}, b={self.b}")

    def __call__(self, x):
        return self.a * np.asarray(x, dtype=float) + self.b

    def __matmul__(self, other: "AffineMap") -> "AffineMap":
        """Composition ``self o other`` (``other`` is applied first)."""
        return AffineMap(self.a * other.a, self.a * other.b + self.b)

    def inverse(self) -> "AffineMap":
        return AffineMap(1.0 / self.a, -self.b / self.a)


IDENTITY = AffineMap(1.0, 0.0)


@dataclass(frozen=True, eq=False)
class PLFunction:
    """Continuous piecewise-linear function with compact support.

    Parameters
    ----------
    xs, ys : array_like
        Breakpoint coordinates. ``xs`` must be strictly increasing and the
        first and last ``ys`` must be zero.
    id : str, optional
        Identifier carried through serialization and caching.
    """

    xs: np.ndarray
    ys: np.ndarray
    id: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ValueError("need at least two breakpoints with matching x and y")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("breakpoints must be finite")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("breakpoint x-coordinates must be strictly increasing")
        if ys[0] != 0 or ys[-1] != 0:
            raise ValueError("first and last breakpoint must have y = 0")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]], id: Optional[str] = None) -> "PLFunction":
        pts = np.asarray(list(points), dtype=float).reshape(-1, 2)
        return cls(pts[:, 0], pts[:, 1], id=id)

    @classmethod
    def zero(cls, lo: float = 0.0, hi: float = 1.0) -> "PLFunction":
        return cls([lo, hi], [0.0, 0.0])

    @classmethod
    def tent(cls, center: float = 0.5, height: float = 1.0, half_width: float = 0.5) -> "PLFunction":
        return cls([center - half_width, center, center + half_width], [0.0, height, 0.0])

    @property
    def support(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    @property
    def breakpoints(self) -> np.ndarray:
        return np.column_stack([self.xs, self.ys])

    def __call__(self, x):
        return evaluate(self, x)

    def __eq__(self, other):
        if not isinstance(other, PLFunction):
            return NotImplemented
        return np.array_equal(self.xs, other.xs) and np.array_equal(self.ys, other.ys)

    def __hash__(self):
        return hash((self.xs.tobytes(), self.ys.tobytes()))

    def __repr__(self):
        pts = ", ".join(f"({x:.4g}, {y:.4g})" for x, y in zip(self.xs, self.ys))
        return f"PLFunction([{pts}])"

    def with_id(self, id: str) -> "PLFunction":
        return PLFunction(self.xs, self.ys, id=id)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.ys)))

    def integral(self) -> float:
        return float(np.trapezoid(self.ys, self.xs))

    def to_json(self) -> str:
        return json.dumps({"id": self.id, "breakpoints": self.breakpoints.tolist()})

    @classmethod
    def from_record(cls, record: dict) -> "PLFunction":
        return cls.from_points(record["breakpoints"], id=record.get("id"))


def evaluate(f: PLFunction, x):
    """Evaluate ``f`` at ``x`` (scalar or array); zero outside the support."""
    out = np.interp(x, f.xs, f.ys, left=0.0, right=0.0)
    if np.ndim(out) == 0:
        return float(out)
    return out


def compose_affine(f: PLFunction, g: AffineMap) -> PLFunction:
    """Exact representation of ``x -> f(g.a * x + g.b)``."""
    if g.a == 0:
        raise ValueError("affine map must have a != 0")
    xs = (f.xs - g.b) / g.a
    ys = f.ys
    if g.a < 0:
        xs, ys = xs[::-1], ys[::-1]
    return PLFunction(xs, ys, id=f.id)


def sup_distance(f1: PLFunction, f2: PLFunction) -> float:
    """Exact ``max |f1 - f2|``; the extremum of a PL difference sits on a breakpoint."""
    xs = np.union1d(f1.xs, f2.xs)
    return float(np.max(np.abs(evaluate(f1, xs) - evaluate(f2, xs))))


def lipschitz_constant(f: PLFunction) -> float:
    return float(np.max(np.abs(np.diff(f.ys) / np.diff(f.xs))))


@dataclass(frozen=True)
class UniformGrid:
    """``n`` equispaced nodes from ``start`` to ``stop`` inclusive."""

    start: float
    stop: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("grid must have at least one node")
        if self.n > 1 and not self.stop > self.start:
            raise ValueError("grid stop must exceed start")

    @property
    def cell(self) -> float:
        return (self.stop - self.start) / (self.n - 1) if self.n > 1 else 0.0

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n)

    def extended(self, lo: float, hi: float) -> "UniformGrid":
        """Same cell, grown by whole cells so that ``[lo, hi]`` is covered."""
        h = self.cell
        left = max(0, int(np.ceil((self.start - lo) / h - 1e-9)))
        right = max(0, int(np.ceil((hi - self.stop) / h - 1e-9)))
        return UniformGrid(self.start - left * h, self.stop + right * h, self.n + left + right)


def padded_window(f: PLFunction) -> tuple[float, float]:
    """Support widened by one support width on each side."""
    lo, hi = f.support
    delta = hi - lo
    return lo - delta, hi + delta


def padded_grid(f: PLFunction, resolution: int) -> UniformGrid:
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    lo, hi = padded_window(f)
    return UniformGrid(lo, hi, resolution)


def sample(f: PLFunction, grid) -> np.ndarray:
    """Values of ``f`` at the nodes of ``grid`` (a UniformGrid or an array of nodes)."""
    nodes = grid.nodes if isinstance(grid, UniformGrid) else np.asarray(grid, dtype=float)
    if nodes.size == 0:
        raise ValueError("empty grid")
    return np.interp(nodes, f.xs, f.ys, left=0.0, right=0.0)
