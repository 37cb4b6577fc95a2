"""Pseudo-distances between filtering functions.

* ``d_match_sup``: the supremum, over a finite operator set, of bottleneck
  distances between degree-0 diagrams of the operator outputs. A lower bound
  for the natural pseudo-distance.
* ``natural_pseudo_distance``: brute-force minimum of the exact sup-distance
  over a finite sample of group elements. An upper bound for the natural
  pseudo-distance.
* ``mu_S``, ``construct_F_psi``, ``estimate_dF``, ``approximation_gap``:
  small tools used to illustrate and check the theory.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .bottleneck import bottleneck_distance
from .dataset import GridFunction2D, atomic_write_text
from .groups import GroupSpec
from .operators import ConstantFunctional, Operator, OperatorCache, apply
from .persistence import PersistenceDiagram, diagram_1d, diagram_2d
from .pl_core import AffineMap, PLFunction, compose_affine, padded_grid, sup_distance

DEFAULT_LIPSCHITZ = 5.0


def diagram_tolerance(resolution: int = 1024, lipschitz: float = DEFAULT_LIPSCHITZ, width: float = 1.0) -> float:
    """``2 * cell * C`` for the padded grid of a function supported on an interval of ``width``."""
    cell = 3.0 * width / (resolution - 1)
    return 2.0 * cell * lipschitz


# ---------------------------------------------------------------------------
# D^F_match


@dataclass(frozen=True)
class DmatchResult:
    value: float
    argmax: Optional[str]
    per_operator: Dict[str, float] = field(default_factory=dict)


def operator_diagram(op: Operator, f, resolution: int = 1024, cache: Optional[OperatorCache] = None) -> PersistenceDiagram:
    """Degree-0 diagram of ``op(f)``, optionally memoized by function id."""

    def compute():
        out = apply(op, f, resolution)
        return diagram_2d(out) if isinstance(out, GridFunction2D) else diagram_1d(out.values)

    fid = getattr(f, "id", None)
    if cache is None or fid is None:
        return compute()
    return cache.get_or_compute(("diagram", fid, op.name, resolution), compute)


def common_group(ops: Sequence[Operator]) -> GroupSpec:
    """The smallest group among the operators' groups, which all of them must contain."""
    groups = {op.group for op in ops}
    for g in groups:
        if all(g.is_subgroup_of(h) for h in groups):
            return g
    raise ValueError(f"operators do not share a group: {sorted(map(str, groups))}")


def _validate_ops(ops: Sequence[Operator], f) -> None:
    if not ops:
        raise ValueError("empty operator set")
    common_group(ops)
    domain = "2d" if isinstance(f, GridFunction2D) else "1d"
    bad = [op.name for op in ops if domain not in op.domains]
    if bad:
        raise ValueError(f"operators {bad} do not act on {domain} inputs")


def dmatch_from_diagrams(d1: Sequence[PersistenceDiagram], d2: Sequence[PersistenceDiagram], names: Sequence[str]) -> DmatchResult:
    per = {}
    best, arg = -math.inf, None
    for name, a, b in zip(names, d1, d2):
        v = bottleneck_distance(a, b)
        # every diagram here has exactly one essential point
        assert math.isfinite(v), f"infinite bottleneck distance for operator {name}"
        per[name] = v
        if v > best:
            best, arg = v, name
    return DmatchResult(float(best), arg, per)


def d_match_sup(f1, f2, ops: Sequence[Operator], resolution: int = 1024, cache: Optional[OperatorCache] = None) -> DmatchResult:
    """``max_F d_match(r_0(F(f1)), r_0(F(f2)))`` over the operator set."""
    _validate_ops(ops, f1)
    if isinstance(f1, GridFunction2D) != isinstance(f2, GridFunction2D):
        raise ValueError("cannot compare a 1D function with an image")
    d1 = [operator_diagram(op, f1, resolution, cache) for op in ops]
    d2 = [operator_diagram(op, f2, resolution, cache) for op in ops]
    return dmatch_from_diagrams(d1, d2, [op.name for op in ops])


# ---------------------------------------------------------------------------
# natural pseudo-distance


@dataclass(frozen=True)
class GroupGrid:
    """Finite sample of a group of affine maps, searched coarse-to-fine.

    Level ``l`` uses spacing ``step / shrink**l``. The first level takes every
    multiple of ``step`` in ``[1/c, c]`` as slope (plus ``1/c`` itself, and the
    negatives when the group has them) and every multiple of ``step`` as
    offset over the range where the supports of ``f1`` and ``f2 o g`` can
    overlap, clipped to ``[-c, c]``. Each further level searches the
    ``shrink``-times finer lattice within one previous step of the ``top_k``
    best elements found so far. With the defaults the last level has spacing
    0.01, so every element lies on the flat grid of :meth:`exact`.

    With explicit ``a_values``/``b_values`` the grid is their product
    (slopes outside the group are dropped) and no refinement is done.
    The identity is always included.
    """

    group: GroupSpec
    c: float = 10 * DEFAULT_LIPSCHITZ
    step: float = 1.0
    levels: int = 3
    shrink: int = 10
    top_k: int = 1
    a_values: Optional[Tuple[float, ...]] = None
    b_values: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "group", GroupSpec.parse(self.group))
        if self.group is GroupSpec.ISO2:
            raise ValueError("GroupGrid samples affine groups of the line")
        if self.levels < 1 or self.shrink < 2 or self.top_k < 1 or not self.step > 0:
            raise ValueError("need levels >= 1, shrink >= 2, top_k >= 1 and a positive step")
        if self.a_values is not None:
            a = [x for x in map(float, self.a_values) if x != 0 and self.group.contains(AffineMap(x, 0.0))]
            object.__setattr__(self, "a_values", tuple(a))
        if self.b_values is not None:
            b = (0.0,) if self.group is GroupSpec.G5 else tuple(float(x) for x in self.b_values)
            object.__setattr__(self, "b_values", b)
        if self.is_flat and (not self.a_values or not self.b_values):
            raise ValueError("empty group grid")

    @property
    def is_flat(self) -> bool:
        return self.a_values is not None or self.b_values is not None

    @classmethod
    def flat(cls, group, a_values, b_values) -> "GroupGrid":
        return cls(group, a_values=tuple(a_values), b_values=tuple(b_values), levels=1)

    @classmethod
    def exact(cls, group, c: float = 10 * DEFAULT_LIPSCHITZ, step: float = 0.01) -> "GroupGrid":
        """The flat grid with spacing ``step`` on ``[1/c, c]`` (slopes) and ``[-c, c]`` (offsets)."""
        group = GroupSpec.parse(group)
        n = int(round(c / step))
        pos = np.round(np.arange(1, n + 1) * step, 12)
        pos = np.union1d(pos[pos >= 1 / c - 1e-12], [1 / c])
        a = {GroupSpec.G1: np.concatenate([-pos[::-1], pos]), GroupSpec.G2: pos, GroupSpec.G3: [-1.0, 1.0]}.get(group, [1.0])
        return cls.flat(group, a, np.round(np.arange(-n, n + 1) * step, 12))

    @property
    def continuous_slope(self) -> bool:
        return self.group in (GroupSpec.G1, GroupSpec.G2)

    def slopes(self) -> np.ndarray:
        """First-level slopes (all of them for a flat grid)."""
        if self.a_values is not None:
            return np.asarray(self.a_values)
        if self.group in (GroupSpec.G4, GroupSpec.G5):
            return np.array([1.0])
        if self.group is GroupSpec.G3:
            return np.array([-1.0, 1.0])
        pos = np.union1d(_multiples(1 / self.c, self.c, self.step), [1 / self.c, 1.0])
        return np.concatenate([-pos[::-1], pos]) if self.group is GroupSpec.G1 else pos


def _multiples(lo: float, hi: float, step: float) -> np.ndarray:
    """Multiples of ``step`` in ``[lo, hi]``, rounded so nested lattices share nodes."""
    k = np.arange(np.ceil(lo / step - 1e-9), np.floor(hi / step + 1e-9) + 1)
    return np.round(k * step, 12)


def _sup_batch(f1: PLFunction, f2: PLFunction, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``|f1 - f2 o (a x + b)|_inf`` for each pair ``(a[k], b[k])``, exactly."""
    out = np.empty(len(a))
    # the difference is PL with kinks at f1.xs and (f2.xs - b) / a
    step = 20000
    for s in range(0, len(a), step):
        aa, bb = a[s : s + step, None], b[s : s + step, None]
        x = np.concatenate([np.broadcast_to(f1.xs, (len(aa), len(f1.xs))), (f2.xs - bb) / aa], axis=1)
        v1 = np.interp(x, f1.xs, f1.ys, left=0.0, right=0.0)
        v2 = np.interp(aa * x + bb, f2.xs, f2.ys, left=0.0, right=0.0)
        out[s : s + step] = np.abs(v1 - v2).max(axis=1)
    return out


def _offset_range(f1: PLFunction, f2: PLFunction, a: float, c: float) -> Tuple[float, float]:
    """Offsets for which ``a x + b`` maps part of supp(f1) into supp(f2), clipped to ``[-c, c]``."""
    lo1, hi1 = f1.support
    lo2, hi2 = f2.support
    ends = (a * lo1, a * hi1)
    return max(lo2 - max(ends), -c), min(hi2 - min(ends), c)


def _first_level(f1, f2, grid: GroupGrid) -> Tuple[np.ndarray, np.ndarray, bool]:
    """Slopes and offsets of the first level; flags whether some element has disjoint supports."""
    A, B = [np.array([1.0])], [np.array([0.0])]
    disjoint = False
    bvals = np.asarray(grid.b_values) if grid.b_values is not None else None
    for a in grid.slopes():
        lo, hi = _offset_range(f1, f2, a, grid.c)
        if grid.group is GroupSpec.G5:
            bs = np.array([0.0])
        elif bvals is not None:
            inside = (bvals >= lo) & (bvals <= hi)
            disjoint |= not inside.all()
            bs = bvals[inside]
        else:
            bs = _multiples(lo, hi, grid.step)
            disjoint |= lo > -grid.c or hi < grid.c
        A.append(np.full(len(bs), a))
        B.append(bs)
    return np.concatenate(A), np.concatenate(B), disjoint


def natural_pseudo_distance(f1: PLFunction, f2: PLFunction, grid: GroupGrid, return_element: bool = False):
    """Minimum of ``|f1 - f2 o g|_inf`` over the grid: an upper bound for ``d_G``.

    Elements whose support image misses ``supp(f1)`` all give
    ``max(|f1|, |f2|)``; that value is included whenever such an element is
    in the grid rather than enumerating them.
    """
    if not isinstance(f1, PLFunction) or not isinstance(f2, PLFunction):
        raise TypeError("natural_pseudo_distance needs PLFunctions")
    A, B, disjoint = _first_level(f1, f2, grid)
    vals = _sup_batch(f1, f2, A, B)
    k = int(vals.argmin())
    best, best_g = float(vals[k]), (A[k], B[k])
    if disjoint:
        far = max(f1.sup_norm(), f2.sup_norm())
        if far < best:
            best, best_g = far, None

    if not grid.is_flat and grid.group is not GroupSpec.G5:
        step = grid.step
        for _ in range(grid.levels - 1):
            order = np.argsort(vals, kind="stable")[: grid.top_k]
            fine = step / grid.shrink
            offsets = np.arange(-grid.shrink, grid.shrink + 1) * fine
            A_new, B_new = [A[order]], [B[order]]
            for a0, b0 in zip(A[order], B[order]):
                if grid.continuous_slope:
                    aa = np.round(a0 + offsets, 12)
                    aa = aa[(np.abs(aa) >= 1 / grid.c - 1e-12) & (np.abs(aa) <= grid.c) & (np.sign(aa) == np.sign(a0))]
                else:
                    aa = np.array([a0])
                bb = np.round(b0 + offsets, 12)
                bb = bb[np.abs(bb) <= grid.c]
                ga, gb = np.meshgrid(aa, bb, indexing="ij")
                A_new.append(ga.ravel())
                B_new.append(gb.ravel())
            A, B = np.concatenate(A_new), np.concatenate(B_new)
            vals = _sup_batch(f1, f2, A, B)
            k = int(vals.argmin())
            if vals[k] < best:
                best, best_g = float(vals[k]), (A[k], B[k])
            step = fine

    if return_element:
        return best, None if best_g is None else AffineMap(float(best_g[0]), float(best_g[1]))
    return best

# ---------------------------------------------------------------------------
# non-group comparison


@dataclass(frozen=True)
class Rotation:
    """``s(t) = t + angle`` on the circle ``[0, 2 pi)``."""

    angle: float

    def compose(self, values: np.ndarray) -> np.ndarray:
        """Samples of ``phi o s`` from uniform periodic samples of ``phi``."""
        n = len(values)
        theta = 2 * np.pi * np.arange(n) / n
        nodes = np.append(theta, 2 * np.pi)
        return np.interp(np.mod(theta + self.angle, 2 * np.pi), nodes, np.append(values, values[0]))


def periodic_samples(func: Callable, n: int = 4096) -> np.ndarray:
    return func(2 * np.pi * np.arange(n) / n)


def mu_S(f1, f2, elements: Sequence) -> float:
    """``min_s |f1 - f2 o s|_inf`` over the listed transformations.

    For PLFunctions ``elements`` are AffineMaps and the distance is exact;
    for periodic sample arrays they are :class:`Rotation` objects.
    """
    if not elements:
        raise ValueError("no transformations given")
    if isinstance(f1, PLFunction):
        return min(sup_distance(f1, compose_affine(f2, g)) for g in elements)
    f1 = np.asarray(f1, dtype=float)
    return float(min(np.max(np.abs(f1 - s.compose(np.asarray(f2, dtype=float)))) for s in elements))


# ---------------------------------------------------------------------------
# operator-space tools


def construct_F_psi(psi, dG_oracle: Callable, group=GroupSpec.G5, name: Optional[str] = None) -> ConstantFunctional:
    """Operator sending ``phi`` to the constant function ``dG_oracle(phi, psi)``."""
    label = name or f"F_psi[{getattr(psi, 'id', None) or 'psi'}]"
    return ConstantFunctional(label, group, functional=lambda phi: dG_oracle(phi, psi))


def _output_pair(op1: Operator, op2: Operator, f, resolution: int):
    if isinstance(f, GridFunction2D):
        a, b = op1.apply_image(f).values, op2.apply_image(f).values
        if a.shape != b.shape:
            raise ValueError("image operators produced outputs on different canvases")
        return a, b
    lo1, hi1 = op1.window(*f.support)
    lo2, hi2 = op2.window(*f.support)
    grid = padded_grid(f, resolution).extended(min(lo1, lo2), max(hi1, hi2))
    nodes = np.union1d(grid.nodes, np.concatenate([op1.knots(f), op2.knots(f)]))
    return op1.evaluate(f, nodes), op2.evaluate(f, nodes)


def estimate_dF(op1: Operator, op2: Operator, probe_functions: Iterable, resolution: int = 1024) -> float:
    """``max_phi |F1(phi) - F2(phi)|_inf`` over the probes: a lower bound for ``d_F``."""
    best = None
    for f in probe_functions:
        a, b = _output_pair(op1, op2, f, resolution)
        v = float(np.max(np.abs(a - b)))
        best = v if best is None else max(best, v)
    if best is None:
        raise ValueError("no probe functions")
    return best


def approximation_gap(f1, f2, ops_small: Sequence[Operator], ops_large: Sequence[Operator], resolution: int = 1024, cache=None) -> float:
    """``|D over ops_small - D over ops_large|``."""
    small = d_match_sup(f1, f2, ops_small, resolution, cache).value
    large = d_match_sup(f1, f2, ops_large, resolution, cache).value
    return abs(small - large)


# ---------------------------------------------------------------------------
# distance matrices

DISTANCE_COLUMNS = ("id1", "id2", "dmatch", "argmax_op", "dG_upper", "resolution")


def distance_rows(functions: Sequence[PLFunction], ops: Sequence[Operator], grid: Optional[GroupGrid], resolution: int = 1024):
    """One row per unordered pair; ``dG_upper`` is empty without a grid."""
    cache = OperatorCache()
    rows = []
    for i in range(len(functions)):
        for j in range(i + 1, len(functions)):
            f1, f2 = functions[i], functions[j]
            res = d_match_sup(f1, f2, ops, resolution, cache)
            dg = natural_pseudo_distance(f1, f2, grid) if grid is not None else None
            rows.append((f1.id, f2.id, res.value, res.argmax, dg, resolution))
    return rows


def write_distance_csv(path, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DISTANCE_COLUMNS)
    for id1, id2, dm, arg, dg, res in rows:
        w.writerow([id1, id2, repr(float(dm)), arg, "" if dg is None else repr(float(dg)), res])
    atomic_write_text(path, buf.getvalue())
