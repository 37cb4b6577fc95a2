"""Non-expansive group-equivariant operators on filtering functions.

One-dimensional operators act on :class:`~giph.pl_core.PLFunction` and are
evaluated exactly at any point (``Operator.evaluate``); ``apply`` samples the
result on the function's padded window, extended far enough that the output
is constant outside it. Image operators act on
:class:`~giph.dataset.GridFunction2D`.

Every operator has a manifest record ``{"name", "group", "kind", "params"}``
so that custom operator sets can be loaded from a JSON-lines file.
"""
from __future__ import annotations

import functools
import json
import threading
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import fftconvolve

from .dataset import GridFunction2D
from .groups import GroupSpec
from .pl_core import PLFunction, UniformGrid, padded_grid, sup_distance


@dataclass(frozen=True)
class Sampled1D:
    """Operator output sampled at ``nodes``."""

    nodes: np.ndarray
    values: np.ndarray

    @property
    def cell(self) -> float:
        return float(np.max(np.diff(self.nodes))) if len(self.nodes) > 1 else 0.0


@dataclass(frozen=True)
class Operator:
    name: str
    group: GroupSpec

    kind: ClassVar[str] = ""
    domains: ClassVar[frozenset] = frozenset({"1d"})

    def __post_init__(self):
        object.__setattr__(self, "group", GroupSpec.parse(self.group))

    # -- 1D ---------------------------------------------------------------
    def evaluate(self, f: PLFunction, x) -> np.ndarray:
        """Exact value of ``F(f)`` at the points ``x``."""
        raise TypeError(f"{self.kind} operator {self.name!r} does not act on 1D functions")

    def window(self, lo: float, hi: float) -> Tuple[float, float]:
        """Interval outside which ``F(f)`` is constant, for ``f`` supported in ``[lo, hi]``."""
        return lo, hi

    def knots(self, f: PLFunction) -> np.ndarray:
        """Points that make the sampled output exact (breakpoints of a PL output)."""
        return np.empty(0)

    def output_grid(self, f: PLFunction, resolution: int) -> UniformGrid:
        return padded_grid(f, resolution).extended(*self.window(*f.support))

    # -- 2D ---------------------------------------------------------------
    def apply_image(self, img: GridFunction2D) -> GridFunction2D:
        raise TypeError(f"{self.kind} operator {self.name!r} does not act on images")

    # -- manifest ---------------------------------------------------------
    def params(self) -> dict:
        return {}

    def to_record(self) -> dict:
        return {"name": self.name, "group": str(self.group), "kind": self.kind, "params": self.params()}


def apply(op: Operator, f, resolution: int = 1024):
    """Apply ``op`` to a PLFunction (returns :class:`Sampled1D`) or an image."""
    if isinstance(f, GridFunction2D):
        if "2d" not in op.domains:
            raise TypeError(f"operator {op.name!r} does not act on images")
        return op.apply_image(f)
    if isinstance(f, PLFunction):
        if "1d" not in op.domains:
            raise TypeError(f"operator {op.name!r} does not act on 1D functions")
        nodes = op.output_grid(f, resolution).nodes
        extra = op.knots(f)
        if extra.size:
            nodes = np.union1d(nodes, extra[(extra > nodes[0]) & (extra < nodes[-1])])
        return Sampled1D(nodes, np.asarray(op.evaluate(f, nodes), dtype=float))
    raise TypeError(f"cannot apply an operator to {type(f).__name__}")


def _interp(f: PLFunction, x):
    return np.interp(x, f.xs, f.ys, left=0.0, right=0.0)


@dataclass(frozen=True)
class Pointwise(Operator):
    """``F(f)(x) = scale * f(x)``; ``scale = 1`` is the identity, ``-1`` negation."""

    scale: float = 1.0
    kind: ClassVar[str] = "pointwise"
    domains: ClassVar[frozenset] = frozenset({"1d", "2d"})

    def evaluate(self, f, x):
        return self.scale * _interp(f, x)

    def knots(self, f):
        return f.xs

    def apply_image(self, img):
        return img.replace(self.scale * img.values)

    def params(self):
        return {"scale": self.scale}


@dataclass(frozen=True)
class ShiftCombine(Operator):
    """Weighted sum or maximum of translated copies, ``f(x + s_i)``."""

    shifts: Tuple[float, ...] = (0.0,)
    weights: Optional[Tuple[float, ...]] = None
    mode: str = "sum"
    kind: ClassVar[str] = "shift-combine"

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "shifts", tuple(float(s) for s in self.shifts))
        if self.mode not in ("sum", "max"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
            if len(self.weights) != len(self.shifts):
                raise ValueError("need one weight per shift")
        elif self.mode == "sum":
            object.__setattr__(self, "weights", (1.0 / len(self.shifts),) * len(self.shifts))

    def evaluate(self, f, x):
        x = np.asarray(x, dtype=float)
        vals = _interp(f, x[..., None] + np.asarray(self.shifts))
        if self.mode == "max":
            if self.weights is not None:
                vals = vals * np.asarray(self.weights)
            return vals.max(axis=-1)
        return vals @ np.asarray(self.weights)

    def window(self, lo, hi):
        return lo - max(self.shifts), hi - min(self.shifts)

    def knots(self, f):
        if self.mode == "max":
            return np.empty(0)
        return np.unique((f.xs[:, None] - np.asarray(self.shifts)).ravel())

    def params(self):
        return {"shifts": list(self.shifts), "weights": None if self.weights is None else list(self.weights), "mode": self.mode}


@dataclass(frozen=True)
class AffineSup(Operator):
    """``F(f)(x) = sup_r sum_i w_i f(x + r c_i)``, over all real ``r`` or ``r > 0``.

    With ``r_grid=None`` the supremum is exact: for fixed ``x`` the inner sum is
    piecewise linear in ``r`` with kinks at ``r = (p - x) / c_i`` (``p`` a
    breakpoint of ``f``) and vanishes for large ``|r|``, so the supremum is the
    largest of 0 and the values at those kinks (plus ``r -> 0`` when oriented).
    With an explicit ``r_grid`` the maximum runs over that finite set instead.
    """

    weights: Tuple[float, ...] = ()
    centers: Tuple[float, ...] = ()
    oriented: bool = False
    r_grid: Optional[Tuple[float, ...]] = None

    @property
    def kind(self):
        return "oriented-affine-sup" if self.oriented else "affine-sup"

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        if len(self.weights) != len(self.centers) or not self.weights:
            raise ValueError("need matching, non-empty weights and centers")
        if self.r_grid is not None:
            grid = np.asarray(self.r_grid, dtype=float)
            if self.oriented:
                grid = grid[grid > 0]
            object.__setattr__(self, "r_grid", tuple(np.unique(grid)))

    def evaluate(self, f, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        w = np.asarray(self.weights)
        c = np.asarray(self.centers)
        if self.r_grid is None:
            cnz = np.unique(c[c != 0])
            r = ((f.xs[None, :, None] - x[:, None, None]) / cnz).reshape(len(x), -1)
            if self.oriented:
                r = np.where(r > 0, r, 0.0)
            else:
                r = np.concatenate([r, np.zeros((len(x), 1))], axis=1)
        else:
            r = np.broadcast_to(np.asarray(self.r_grid), (len(x), len(self.r_grid)))
        best = np.zeros(len(x))
        # chunk over x to bound memory
        step = max(1, 2_000_000 // max(1, r.shape[1] * len(c)))
        for s in range(0, len(x), step):
            xs, rs = x[s : s + step], r[s : s + step]
            h = _interp(f, xs[:, None, None] + rs[:, :, None] * c) @ w
            best[s : s + step] = np.maximum(h.max(axis=1), 0.0)
        return best

    def window(self, lo, hi):
        c = np.unique(np.asarray(self.centers))
        rho = 0.0
        for i in range(len(c)):
            for j in range(i + 1, len(c)):
                rho = max(rho, max(abs(c[i]), abs(c[j])) / abs(c[i] - c[j]))
        w = hi - lo
        return lo - w * rho, hi + w * rho

    def params(self):
        return {
            "weights": list(self.weights),
            "centers": list(self.centers),
            "oriented": self.oriented,
            "r_grid": None if self.r_grid is None else list(self.r_grid),
        }


def log_r_grid(lo: float = 1 / 64, hi: float = 64.0, n: int = 257, both_signs: bool = True) -> Tuple[float, ...]:
    """Logarithmic grid over ``|r|`` in ``[lo, hi]``."""
    pos = np.geomspace(lo, hi, n)
    return tuple(np.concatenate([-pos[::-1], pos]) if both_signs else pos)


def _profile(terms: Sequence[dict], x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for t in terms:
        coef = t.get("coef", 1.0)
        if t["type"] == "sine":
            out = out + coef * np.sin(t["freq"] * np.pi * x)
        elif t["type"] == "gauss":
            out = out + coef * np.exp(-(((x - t["mu"]) / t["width"]) ** 2))
        elif t["type"] == "const":
            out = out + coef
        else:
            raise ValueError(f"unknown profile term {t['type']!r}")
    return out


def _profile_window(terms, lo, hi):
    for t in terms:
        if t["type"] == "gauss":
            lo = min(lo, t["mu"] - 10 * t["width"])
            hi = max(hi, t["mu"] + 10 * t["width"])
    return lo, hi


@dataclass(frozen=True)
class MultiplicativeProfile(Operator):
    """``F(f)(x) = (f(x) + offset) * p(x)`` with a fixed profile ``|p| <= 1``.

    ``terms`` describe ``p`` as a sum of ``{"type": "sine", "freq": k}``
    (``sin(k pi x)``) and ``{"type": "gauss", "mu": m, "width": s}``
    (``exp(-((x - m) / s)^2)``) pieces, each with an optional ``coef``.
    Only equivariant for the trivial group.
    """

    offset: float = 0.0
    terms: Tuple[dict, ...] = ()
    kind: ClassVar[str] = "multiplicative-profile"

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "terms", tuple(dict(t) for t in self.terms))

    def __hash__(self):
        return hash((self.name, self.offset, json.dumps(self.terms, sort_keys=True)))

    def evaluate(self, f, x):
        return (_interp(f, x) + self.offset) * _profile(self.terms, x)

    def window(self, lo, hi):
        return _profile_window(self.terms, lo, hi) if self.offset else (lo, hi)

    def params(self):
        return {"offset": self.offset, "terms": [dict(t) for t in self.terms]}


@dataclass(frozen=True)
class ConstantIntegral(Operator):
    """``F(f)`` is the constant function equal to the integral of ``f``."""

    kind: ClassVar[str] = "constant-integral"
    domains: ClassVar[frozenset] = frozenset({"1d", "2d"})

    def value(self, f) -> float:
        if isinstance(f, GridFunction2D):
            # zero on the boundary of the support, so the node sum is the trapezoid rule
            return float(np.sum(f.values) * f.cell**2)
        return f.integral()

    def evaluate(self, f, x):
        return np.full(np.shape(x), self.value(f))

    def apply_image(self, img):
        return img.replace(np.full(img.values.shape, self.value(img)))


@dataclass(frozen=True)
class ConstantMax(Operator):
    """``F(f)`` is the constant function equal to ``max f``."""

    kind: ClassVar[str] = "constant-max"
    domains: ClassVar[frozenset] = frozenset({"1d", "2d"})

    def value(self, f) -> float:
        if isinstance(f, GridFunction2D):
            return float(np.max(f.values))
        return float(np.max(f.ys))

    def evaluate(self, f, x):
        return np.full(np.shape(x), self.value(f))

    def apply_image(self, img):
        return img.replace(np.full(img.values.shape, self.value(img)))


@dataclass(frozen=True)
class ConstantFunctional(Operator):
    """``F(f)`` is the constant ``functional(f)``; not serializable."""

    functional: Callable = field(default=None, compare=False)
    kind: ClassVar[str] = "constant-functional"
    domains: ClassVar[frozenset] = frozenset({"1d", "2d"})

    def evaluate(self, f, x):
        return np.full(np.shape(x), float(self.functional(f)))

    def apply_image(self, img):
        return img.replace(np.full(img.values.shape, float(self.functional(img))))

    def to_record(self):
        raise TypeError("constant-functional operators wrap a Python callable and cannot be serialized")


@dataclass(frozen=True)
class Negation(Operator):
    """``F(f) = -base(f)``."""

    base: Operator = None
    kind: ClassVar[str] = "negation-wrapper"

    @property
    def domains(self):
        return self.base.domains

    def evaluate(self, f, x):
        return -self.base.evaluate(f, x)

    def window(self, lo, hi):
        return self.base.window(lo, hi)

    def knots(self, f):
        return self.base.knots(f)

    def apply_image(self, img):
        out = self.base.apply_image(img)
        return out.replace(-out.values)

    def params(self):
        return {"base": self.base.to_record()}


@dataclass(frozen=True)
class Offset(Operator):
    """``F(f)(x) = base(f)(x) + eps * p(x)`` with ``|p| <= 1`` (``p = 1`` if no terms).

    The distance between ``base`` and this operator in the operator metric is
    exactly ``eps * max|p|``. A non-constant profile is only equivariant for
    the trivial group.
    """

    base: Operator = None
    eps: float = 0.0
    terms: Tuple[dict, ...] = ()
    kind: ClassVar[str] = "offset"

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "terms", tuple(dict(t) for t in self.terms))

    def __hash__(self):
        return hash((self.name, self.eps, json.dumps(self.terms, sort_keys=True)))

    @property
    def domains(self):
        return self.base.domains

    def _p(self, x):
        return _profile(self.terms, x) if self.terms else np.ones(np.shape(x))

    def evaluate(self, f, x):
        return self.base.evaluate(f, x) + self.eps * self._p(x)

    def window(self, lo, hi):
        return self.base.window(lo, hi)

    def apply_image(self, img):
        if self.terms:
            raise TypeError("profiled offsets are 1D only")
        out = self.base.apply_image(img)
        return out.replace(out.values + self.eps)

    def params(self):
        return {"base": self.base.to_record(), "eps": self.eps, "terms": [dict(t) for t in self.terms]}


@functools.lru_cache(maxsize=64)
def radial_kernel(radii: Tuple[float, ...], levels: Tuple[float, ...], cell: float, oversample: int = 5) -> np.ndarray:
    """Rasterize ``beta(|y|)`` times the cell area, then scale so ``sum|k| <= 1``.

    ``beta`` is ``levels[i]`` on ``(radii[i], radii[i+1]]`` (``radii[0] = 0``)
    and zero beyond ``radii[-1]``. Each cell averages ``oversample**2``
    sub-samples; sub-sample values are sorted before summing so the kernel is
    bitwise symmetric under the square's symmetries.
    """
    reach = int(np.ceil(radii[-1] / cell))
    offs = (np.arange(oversample) + 0.5) / oversample - 0.5
    idx = np.arange(-reach, reach + 1)
    sub = (idx[:, None] + offs[None, :]).ravel() * cell
    yy, xx = np.meshgrid(sub, sub, indexing="ij")
    d2 = yy * yy + xx * xx
    beta = np.zeros_like(d2)
    bounds = np.asarray(radii, dtype=float)
    for i, level in enumerate(levels):
        inside = (d2 <= bounds[i + 1] ** 2) & ((d2 > bounds[i] ** 2) if i > 0 else True)
        beta[inside] = level
    n = len(idx)
    cells = beta.reshape(n, oversample, n, oversample).transpose(0, 2, 1, 3).reshape(n, n, -1)
    kernel = np.sort(cells, axis=-1).sum(axis=-1) / oversample**2 * cell**2
    total = np.abs(kernel).sum()
    if total > 1:
        kernel = kernel / total
    return kernel


@dataclass(frozen=True)
class RadialConvolution(Operator):
    """``F(f)(x) = integral f(x - y) beta(|y|) dy`` with a piecewise-constant ``beta``.

    The discrete kernel is renormalized so its absolute sum is at most one,
    which keeps the sampled operator non-expansive. The output canvas grows
    by the kernel radius so the whole (compact) support of the result is kept.
    """

    radii: Tuple[float, ...] = (0.0, 0.25)
    levels: Tuple[float, ...] = (16 / np.pi,)
    kind: ClassVar[str] = "convolution-2d"
    domains: ClassVar[frozenset] = frozenset({"2d"})

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if len(self.radii) != len(self.levels) + 1 or self.radii[0] != 0:
            raise ValueError("radii must start at 0 and have one more entry than levels")

    def kernel(self, cell: float) -> np.ndarray:
        return radial_kernel(self.radii, self.levels, cell)

    def apply_image(self, img):
        k = self.kernel(img.cell)
        reach = (k.shape[0] - 1) // 2
        out = fftconvolve(img.values, k, mode="full")
        # snap FFT round-off so exact plateaus (zero background) stay flat
        out = np.round(out, 12) + 0.0
        out = np.pad(out, 1)
        shift = (reach + 1) * img.cell
        return GridFunction2D(out, img.cell, (img.origin[0] - shift, img.origin[1] - shift), img.id)

    def params(self):
        return {"radii": list(self.radii), "levels": list(self.levels)}


# ---------------------------------------------------------------------------
# manifests

_KINDS: Dict[str, type] = {
    "pointwise": Pointwise,
    "shift-combine": ShiftCombine,
    "affine-sup": AffineSup,
    "oriented-affine-sup": AffineSup,
    "multiplicative-profile": MultiplicativeProfile,
    "constant-integral": ConstantIntegral,
    "constant-max": ConstantMax,
    "negation-wrapper": Negation,
    "offset": Offset,
    "convolution-2d": RadialConvolution,
}


def from_record(record: dict) -> Operator:
    kind = record["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown operator kind {kind!r}")
    params = dict(record.get("params") or {})
    if "base" in params:
        params["base"] = from_record(params["base"])
    for key in ("shifts", "weights", "centers", "r_grid", "radii", "levels", "terms"):
        if params.get(key) is not None:
            params[key] = tuple(params[key])
    if kind == "oriented-affine-sup":
        params["oriented"] = True
    return _KINDS[kind](name=record["name"], group=record["group"], **params)


def save_manifest(path, ops: Sequence[Operator]) -> None:
    from .dataset import atomic_write_text

    atomic_write_text(path, "".join(json.dumps(op.to_record()) + "\n" for op in ops))


def load_manifest(path) -> List[Operator]:
    ops = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    ops.append(from_record(json.loads(line)))
                except (ValueError, KeyError, TypeError) as exc:
                    raise ValueError(f"{path}:{lineno}: bad operator record: {exc}") from exc
    if not ops:
        raise ValueError(f"{path}: empty operator manifest")
    return ops


# ---------------------------------------------------------------------------
# built-in sets

_W3 = (0.3, 0.4, 0.3)
_W3N = (-0.3, 0.4, -0.3)
_C3 = (0.3, 0.6, 0.9)
_C5 = (0.2, 0.4, 0.6, 0.8, 1.0)


def _g1(r_grid=None) -> List[Operator]:
    G = GroupSpec.G1
    return [
        Pointwise("F1a", G, 1.0),
        Pointwise("F1b", G, -1.0),
        AffineSup("F1c", G, _W3, _C3, r_grid=r_grid),
        AffineSup("F1d", G, _W3N, _C3, r_grid=r_grid),
        AffineSup("F1e", G, (-0.2, 0.2, -0.2, 0.2, -0.2), _C5, r_grid=r_grid),
    ]


def _g2(r_grid=None) -> List[Operator]:
    G = GroupSpec.G2
    return _g1()[:2] + [
        AffineSup("F2a", G, _W3, _C3, oriented=True, r_grid=r_grid),
        AffineSup("F2b", G, _W3N, _C3, oriented=True, r_grid=r_grid),
        AffineSup("F2c", G, (-0.2, 0.2, -0.2, 0.2, -0.2), _C5, oriented=True, r_grid=r_grid),
        AffineSup("F2d", G, (0.2, -0.2, 0.2, -0.2, 0.2), _C5, oriented=True, r_grid=r_grid),
        AffineSup("F2e", G, (-0.1, 0.2, -0.4, 0.2, -0.1), _C5, oriented=True, r_grid=r_grid),
    ]


def _g3_extra() -> List[Operator]:
    G = GroupSpec.G3
    q, t = 1 / 4, 1 / 3
    return [
        ShiftCombine("F3a", G, (-q, 0.0, q), mode="max"),
        ShiftCombine("F3b", G, (-q, 0.0, q)),
        ShiftCombine("F3c", G, (-t, 0.0, t)),
        ShiftCombine("F3d", G, (-t, -q, 0.0, q, t)),
        ShiftCombine("F3e", G, (-t, -q, 0.0, q, t), mode="max"),
    ]


def _g4_extra() -> List[Operator]:
    G = GroupSpec.G4
    return [
        ShiftCombine("F4a", G, (0.0, 1 / 4), mode="max"),
        ShiftCombine("F4b", G, (-1 / 4, 0.0)),
        ShiftCombine("F4c", G, (0.0, 1 / 4)),
        ShiftCombine("F4d", G, (0.0, 1 / 5, 2 / 5)),
        ShiftCombine("F4e", G, (0.0, 1 / 5, 2 / 5), mode="max"),
    ]


def _gauss(mu, coef=1.0):
    return {"type": "gauss", "mu": mu, "width": 0.1, "coef": coef}


def _g5_extra() -> List[Operator]:
    G = GroupSpec.G5
    return [
        MultiplicativeProfile("F5a", G, 0.0, ({"type": "sine", "freq": 5},)),
        MultiplicativeProfile("F5b", G, 0.0, ({"type": "sine", "freq": 9},)),
        MultiplicativeProfile("F5c", G, 2.0, (_gauss(1 / 4),)),
        MultiplicativeProfile("F5d", G, 2.0, (_gauss(1 / 2),)),
        MultiplicativeProfile("F5e", G, 2.0, (_gauss(3 / 8, 0.5), _gauss(5 / 8, 0.5))),
    ]


BETA_KERNELS = {
    "conv_disc": ((0.0, 1 / 4), (16 / np.pi,)),
    "conv_ring2": ((0.0, 1 / 8, 1 / 4), (16 / np.pi, -16 / np.pi)),
    "conv_ring4": ((0.0, 1 / 16, 1 / 8, 3 / 16, 1 / 4), (16 / np.pi, -16 / np.pi, 16 / np.pi, -16 / np.pi)),
    "conv_wide": ((0.0, 1 / 4, 1 / 2), (4 / np.pi, -4 / np.pi)),
}


def _iso2() -> List[Operator]:
    G = GroupSpec.ISO2
    first = [Pointwise("identity", G, 1.0), ConstantIntegral("integral", G)]
    first += [RadialConvolution(name, G, radii, levels) for name, (radii, levels) in BETA_KERNELS.items()]
    return first + [Negation(f"neg_{op.name}", G, op) for op in first]


def builtin_set(group, r_grid: Optional[Tuple[float, ...]] = None) -> List[Operator]:
    """The operator family used for ``group``.

    G3 reuses the G1 family, G4 the G3 family and G5 the G4 family, each
    adding five operators of its own. ``r_grid`` replaces the exact supremum
    of the affine operators by a maximum over that grid.
    """
    group = GroupSpec.parse(group)
    if group is GroupSpec.G1:
        return _g1(r_grid)
    if group is GroupSpec.G2:
        return _g2(r_grid)
    if group is GroupSpec.G3:
        return _g1(r_grid) + _g3_extra()
    if group is GroupSpec.G4:
        return builtin_set(GroupSpec.G3, r_grid) + _g4_extra()
    if group is GroupSpec.G5:
        return builtin_set(GroupSpec.G4, r_grid) + _g5_extra()
    return _iso2()


# ---------------------------------------------------------------------------
# caching


class OperatorCache:
    """Thread-safe get-or-compute map keyed by ``(function id, operator, grid)``."""

    def __init__(self):
        self._data = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._data)

    def get_or_compute(self, key, compute: Callable):
        with self._lock:
            if key in self._data:
                return self._data[key]
        value = compute()
        with self._lock:
            return self._data.setdefault(key, value)

    def apply(self, op: Operator, f, resolution: int = 1024):
        fid = getattr(f, "id", None)
        if fid is None:
            return apply(op, f, resolution)
        return self.get_or_compute((fid, op.name, resolution), lambda: apply(op, f, resolution))


# ---------------------------------------------------------------------------
# property checks


def _sup(values) -> float:
    return float(np.max(np.abs(values))) if np.size(values) else 0.0


def _input_distance(f1, f2) -> float:
    if isinstance(f1, PLFunction):
        return sup_distance(f1, f2)
    return _sup(f1.values - f2.values)


def _common_nodes(op: Operator, fs: Sequence[PLFunction], resolution: int) -> np.ndarray:
    grids = [op.output_grid(f, resolution) for f in fs]
    lo = min(g.start for g in grids)
    hi = max(g.stop for g in grids)
    cell = min(g.cell for g in grids)
    nodes = np.linspace(lo, hi, int(np.ceil((hi - lo) / cell)) + 1)
    knots = np.concatenate([op.knots(f) for f in fs] + [np.empty(0)])
    return np.union1d(nodes, knots)


def _outputs(op, f1, f2, resolution):
    if isinstance(f1, PLFunction):
        nodes = _common_nodes(op, [f1, f2], resolution)
        return op.evaluate(f1, nodes), op.evaluate(f2, nodes)
    return op.apply_image(f1).values, op.apply_image(f2).values


def check_nonexpansive(op: Operator, sample_pairs, resolution: int = 1024) -> float:
    """Largest ``|F(f1) - F(f2)|_inf - |f1 - f2|_inf`` over the pairs (sampled)."""
    worst = -np.inf
    for f1, f2 in sample_pairs:
        a, b = _outputs(op, f1, f2, resolution)
        worst = max(worst, _sup(a - b) - _input_distance(f1, f2))
    return float(worst)


def check_equivariance(op: Operator, group_samples, functions, resolution: int = 1024) -> float:
    """Largest ``|F(f o g) - F(f) o g|_inf`` over the samples.

    For 1D operators both sides are evaluated exactly at the nodes of the
    output grid of ``f o g``; for images ``g`` is a grid symmetry.
    """
    from .pl_core import compose_affine

    worst = 0.0
    for f in functions:
        for g in group_samples:
            if isinstance(f, PLFunction):
                fg = compose_affine(f, g)
                nodes = op.output_grid(fg, resolution).nodes
                lhs = op.evaluate(fg, nodes)
                rhs = op.evaluate(f, g(nodes))
            else:
                lhs = op.apply_image(f.replace(g(f.values))).values
                rhs = g(op.apply_image(f).values)
            worst = max(worst, _sup(lhs - rhs))
    return float(worst)


def check_norm_bound(op: Operator, functions, resolution: int = 1024) -> float:
    """Largest ``|F(f)| - |f| - |F(0)|`` (sup norms, on the sampling nodes)."""
    worst = -np.inf
    for f in functions:
        if isinstance(f, PLFunction):
            nodes = _common_nodes(op, [f], resolution)
            out = op.evaluate(f, nodes)
            zero = op.evaluate(PLFunction.zero(*f.support), nodes)
            norm = f.sup_norm()
        else:
            out = op.apply_image(f).values
            zero = op.apply_image(f.replace(np.zeros_like(f.values))).values
            norm = _sup(f.values)
        worst = max(worst, _sup(out) - norm - _sup(zero))
    return float(worst)
