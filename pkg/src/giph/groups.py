"""Invariance groups acting on the line (affine subgroups) and on images."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .pl_core import AffineMap


class GroupSpec(str, enum.Enum):
    G1 = "G1"  # affine maps x -> a x + b, a != 0
    G2 = "G2"  # orientation-preserving affine maps, a > 0
    G3 = "G3"  # isometries of the line, a = +-1
    G4 = "G4"  # translations, a = 1
    G5 = "G5"  # identity only
    ISO2 = "ISO2"  # isometries of the plane

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, tag) -> "GroupSpec":
        if isinstance(tag, cls):
            return tag
        return cls(str(tag).upper())

    def contains(self, g: AffineMap) -> bool:
        if self is GroupSpec.G1:
            return True
        if self is GroupSpec.G2:
            return g.a > 0
        if self is GroupSpec.G3:
            return abs(g.a) == 1
        if self is GroupSpec.G4:
            return g.a == 1
        if self is GroupSpec.G5:
            return g.a == 1 and g.b == 0
        raise ValueError("ISO2 acts on images, not on the line")

    def is_subgroup_of(self, other: "GroupSpec") -> bool:
        return self in _SUBGROUPS[GroupSpec.parse(other)]

    def sample(self, rng: np.random.Generator, max_scale: float = 5.0, max_shift: float = 2.0):
        """Draw a random element: an AffineMap, or a SquareSymmetry for ISO2."""
        if self is GroupSpec.ISO2:
            return SquareSymmetry(int(rng.integers(4)), bool(rng.integers(2)))
        if self is GroupSpec.G5:
            return AffineMap(1.0, 0.0)
        b = float(rng.uniform(-max_shift, max_shift))
        if self is GroupSpec.G4:
            return AffineMap(1.0, b)
        if self is GroupSpec.G3:
            return AffineMap(float(rng.choice([-1.0, 1.0])), b)
        a = float(np.exp(rng.uniform(-np.log(max_scale), np.log(max_scale))))
        if self is GroupSpec.G1 and rng.integers(2):
            a = -a
        return AffineMap(a, b)


_SUBGROUPS = {
    GroupSpec.G1: {GroupSpec.G1, GroupSpec.G2, GroupSpec.G3, GroupSpec.G4, GroupSpec.G5},
    GroupSpec.G2: {GroupSpec.G2, GroupSpec.G4, GroupSpec.G5},
    GroupSpec.G3: {GroupSpec.G3, GroupSpec.G4, GroupSpec.G5},
    GroupSpec.G4: {GroupSpec.G4, GroupSpec.G5},
    GroupSpec.G5: {GroupSpec.G5},
    GroupSpec.ISO2: {GroupSpec.ISO2},
}


@dataclass(frozen=True)
class SquareSymmetry:
    """Isometry of the plane preserving a centred square grid.

    ``quarter_turns`` counter-clockwise rotations, preceded by a horizontal
    reflection when ``reflect`` is set. These are the isometries that map a
    pixel grid symmetric about the centre of ``[0, 1]^2`` onto itself.
    """

    quarter_turns: int = 0
    reflect: bool = False

    def __call__(self, values: np.ndarray) -> np.ndarray:
        out = np.fliplr(values) if self.reflect else values
        return np.rot90(out, self.quarter_turns % 4)

    @classmethod
    def all(cls) -> list["SquareSymmetry"]:
        return [cls(k, r) for r in (False, True) for k in range(4)]
