"""Seeded generation and JSON-lines storage of the two synthetic datasets.

* random piecewise-linear functions on ``[0, 1]`` through six interior
  points, filtered by a Lipschitz cap;
* grey-level images on ``[0, 1]^2`` made of three to six radial bumps.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .pl_core import PLFunction


@dataclass(frozen=True, eq=False)
class GridFunction2D:
    """Function on the plane sampled on a regular grid.

    ``values[i, j]`` is the value at ``(origin[0] + j * cell, origin[1] + i * cell)``
    and the function is zero off the grid. By default the origin puts the
    unit square in the middle of the grid, which is what the generators produce.
    """

    values: np.ndarray
    cell: float
    origin: Optional[Tuple[float, float]] = None
    id: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("values must be a non-empty 2D array")
        if not self.cell > 0:
            raise ValueError("cell size must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.origin is None:
            h, w = values.shape
            span = 1.0 / self.cell
            origin = (-(w - 1 - span) / 2 * self.cell, -(h - 1 - span) / 2 * self.cell)
            object.__setattr__(self, "origin", origin)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GridFunction2D):
            return NotImplemented
        return self.cell == other.cell and np.array_equal(self.values, other.values)

    def replace(self, values: np.ndarray, origin=None) -> "GridFunction2D":
        return GridFunction2D(values, self.cell, self.origin if origin is None else origin, self.id)

    def to_json(self) -> str:
        return json.dumps(
            {"id": self.id, "w": self.width, "h": self.height, "cell": self.cell, "values": self.values.ravel().tolist()}
        )

    @classmethod
    def from_record(cls, record: dict) -> "GridFunction2D":
        values = np.asarray(record["values"], dtype=float).reshape(int(record["h"]), int(record["w"]))
        return cls(values, float(record["cell"]), id=record.get("id"))


def image_grid(size: int = 128, pad: int = 8) -> Tuple[np.ndarray, float]:
    """Node coordinates along one axis: ``size`` nodes on [0, 1] plus ``pad`` on each side."""
    cell = 1.0 / (size - 1)
    return (np.arange(-pad, size + pad) * cell), cell


# ---------------------------------------------------------------------------
# 1D dataset


@dataclass(frozen=True)
class GenSpec1D:
    count: int
    interior_points: int = 6
    lipschitz_cap: float = 5.0
    seed: int = 0
    max_attempts: Optional[int] = None

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if not self.lipschitz_cap > 0:
            raise ValueError("Lipschitz cap must be positive")


def generate_1d(spec: GenSpec1D) -> List[PLFunction]:
    """Random PL functions through ``(0,0), (x1,y1), ..., (x6,y6), (1,0)``.

    Interior points are uniform in ``[0,1] x [-1,1]``; x-coordinates are sorted
    and draws with repeated or boundary x are rejected, as are functions whose
    Lipschitz constant exceeds the cap.
    """
    rng = np.random.default_rng(spec.seed)
    max_attempts = spec.max_attempts or 100_000 * spec.count
    k = spec.interior_points
    out: List[PLFunction] = []
    attempts = 0
    while len(out) < spec.count:
        if attempts >= max_attempts:
            raise RuntimeError(
                f"only {len(out)} of {spec.count} functions after {attempts} draws; "
                f"Lipschitz cap {spec.lipschitz_cap} is too tight"
            )
        # fixed batch size keeps the output a function of the seed alone
        batch = min(_BATCH, max_attempts - attempts)
        attempts += batch
        xs = np.sort(rng.uniform(0.0, 1.0, (batch, k)), axis=1)
        ys = rng.uniform(-1.0, 1.0, (batch, k))
        xs = np.hstack([np.zeros((batch, 1)), xs, np.ones((batch, 1))])
        ys = np.hstack([np.zeros((batch, 1)), ys, np.zeros((batch, 1))])
        dx = np.diff(xs, axis=1)
        ok = np.all(dx > 0, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            slopes = np.abs(np.diff(ys, axis=1) / dx)
        ok &= np.all(slopes <= spec.lipschitz_cap, axis=1)
        for i in np.flatnonzero(ok):
            if len(out) == spec.count:
                break
            out.append(PLFunction(xs[i], ys[i], id=f"f{len(out):05d}"))
    return out


_BATCH = 8192


# ---------------------------------------------------------------------------
# 2D dataset


@dataclass(frozen=True)
class Bump:
    cx: float
    cy: float
    radius: float
    height: float

    def __call__(self, x, y):
        d = np.hypot(x - self.cx, y - self.cy)
        return np.where(d < self.radius, self.height * 0.5 * (1 + np.cos(np.pi * d / self.radius)), 0.0)


def draw_bumps(
    rng: np.random.Generator,
    bump_range: Tuple[int, int] = (3, 6),
    radius_range: Tuple[float, float] = (0.05, 0.2),
    height_range: Tuple[float, float] = (0.3, 1.0),
) -> List[Bump]:
    n = int(rng.integers(bump_range[0], bump_range[1] + 1))
    bumps = []
    for _ in range(n):
        r = float(rng.uniform(*radius_range))
        # keep the whole disc inside the unit square so the support stays in [0,1]^2
        cx, cy = rng.uniform(r, 1 - r, 2)
        bumps.append(Bump(float(cx), float(cy), r, float(rng.uniform(*height_range))))
    return bumps


def render_bumps(bumps: Sequence[Bump], size: int = 128, pad: int = 8) -> np.ndarray:
    axis, _ = image_grid(size, pad)
    x, y = np.meshgrid(axis, axis)
    img = np.zeros_like(x)
    for b in bumps:
        img += b(x, y)
    return np.clip(img, 0.0, 1.0)


def generate_2d(
    count: int,
    bump_range: Tuple[int, int] = (3, 6),
    size: int = 128,
    pad: int = 8,
    seed: int = 0,
    radius_range: Tuple[float, float] = (0.05, 0.2),
    height_range: Tuple[float, float] = (0.3, 1.0),
    return_bumps: bool = False,
):
    """Random bump images; each is the clamped sum of raised-cosine caps.

    Returns a list of :class:`GridFunction2D`, or ``(images, bumps)`` when
    ``return_bumps`` is set.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    _, cell = image_grid(size, pad)
    images, all_bumps = [], []
    for i in range(count):
        bumps = draw_bumps(rng, bump_range, radius_range, height_range)
        images.append(GridFunction2D(render_bumps(bumps, size, pad), cell, id=f"img{i:05d}"))
        all_bumps.append(bumps)
    return (images, all_bumps) if return_bumps else images


# ---------------------------------------------------------------------------
# storage


Record = Union[PLFunction, GridFunction2D]


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(path, items: Iterable[Record]) -> None:
    atomic_write_text(path, "".join(item.to_json() + "\n" for item in items))


def parse_record(record: dict) -> Record:
    if "breakpoints" in record:
        return PLFunction.from_record(record)
    if "values" in record:
        return GridFunction2D.from_record(record)
    raise ValueError("record has neither 'breakpoints' nor 'values'")


def load(path) -> List[Record]:
    """Read a JSON-lines dataset; errors name the offending line."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(parse_record(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed record: {exc}") from exc
    return out


def write_pgm(img: GridFunction2D, path, lo: float = 0.0, hi: float = 1.0) -> None:
    """Binary 8-bit PGM; ``hi`` maps to black, as in the usual bump pictures."""
    scaled = np.clip((img.values - lo) / (hi - lo), 0, 1)
    pixels = np.round(255 * (1 - scaled)).astype(np.uint8)[::-1]
    header = f"P5\n{img.width} {img.height}\n255\n".encode()
    Path(path).write_bytes(header + pixels.tobytes())
