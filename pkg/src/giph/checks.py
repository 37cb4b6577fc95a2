"""Property suites and small worked examples, as used by ``giph check``.

Each check returns a :class:`CheckResult`; none of them raise on failure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .bottleneck import bottleneck_distance
from .dataset import GenSpec1D, generate_1d, generate_2d
from .groups import GroupSpec, SquareSymmetry
from .metrics import (
    Rotation,
    d_match_sup,
    diagram_tolerance,
    estimate_dF,
    mu_S,
    periodic_samples,
    construct_F_psi,
)
from .operators import (
    ConstantIntegral,
    ConstantMax,
    builtin_set,
    check_equivariance,
    check_nonexpansive,
    check_norm_bound,
)
from .persistence import diagram_of_pl
from .pl_core import PLFunction, sup_distance

QUARTER_TURN = Rotation(-np.pi / 2)
IDENTITY_TURN = Rotation(0.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.6g} {self.detail}".rstrip()


def disjoint_bumps():
    """Two unit tents on disjoint parts of [0, 1]."""
    return PLFunction.tent(0.25, 1.0, 0.2), PLFunction.tent(0.75, 1.0, 0.2)


def check_disjoint_bumps(resolution: int = 1024) -> CheckResult:
    f1, f2 = disjoint_bumps()
    b = bottleneck_distance(diagram_of_pl(f1, resolution), diagram_of_pl(f2, resolution))
    d = sup_distance(f1, f2)
    return CheckResult("disjoint bumps: same diagram, sup distance 1", b == 0.0 and d == 1.0, b, f"(d_inf={d:g})")


def rotation_mu_values(n: int = 4096):
    sin = periodic_samples(np.sin, n)
    cos = periodic_samples(np.cos, n)
    S = [IDENTITY_TURN, QUARTER_TURN]
    return mu_S(sin, cos, S), mu_S(cos, -sin, S), mu_S(sin, -sin, S)


def check_rotation_triangle(n: int = 4096) -> CheckResult:
    a, b, c = rotation_mu_values(n)
    ok = a <= 0.01 and b <= 0.01 and abs(c - math.sqrt(2)) <= 0.01 and c > a + b
    return CheckResult("rotation set: triangle inequality fails", ok, c, f"(mu(sin,cos)={a:.2g}, mu(cos,-sin)={b:.2g})")


def narrowing_tents(count: int = 200) -> List[PLFunction]:
    """Tents of height 1 and integral ``1/i`` on [0, 1]."""
    return [PLFunction.tent(0.5, 1.0, 1.0 / i) for i in range(1, count + 1)]


def check_max_vs_integral(count: int = 200) -> CheckResult:
    G = GroupSpec.G5
    v = estimate_dF(ConstantMax("max", G), ConstantIntegral("integral", G), narrowing_tents(count))
    return CheckResult("max vs integral operator distance reaches 1", v >= 0.99, v)


def check_F_psi(count: int = 20, seed: int = 0) -> CheckResult:
    fs = generate_1d(GenSpec1D(2 * count, seed=seed))
    worst = 0.0
    for f1, f2 in zip(fs[::2], fs[1::2]):
        op = construct_F_psi(f2, sup_distance)
        worst = max(worst, abs(d_match_sup(f1, f2, [op]).value - sup_distance(f1, f2)))
    return CheckResult("F_psi realizes d_inf at G5", worst <= 1e-9, worst)


def check_operators(group, count: int = 20, seed: int = 0, resolution: int = 1024) -> List[CheckResult]:
    """Non-expansiveness, equivariance and norm bound for the group's builtin operators."""
    group = GroupSpec.parse(group)
    rng = np.random.default_rng(seed)
    tol = 1e-6 + diagram_tolerance(resolution) / 2
    results = []
    if group is GroupSpec.ISO2:
        imgs = generate_2d(count, size=48, pad=8, seed=seed)
        pairs = list(zip(imgs[::2], imgs[1::2]))
        elements = SquareSymmetry.all()
        functions = imgs
    else:
        functions = generate_1d(GenSpec1D(count, seed=seed))
        pairs = list(zip(functions[::2], functions[1::2]))
        elements = None
    for op in builtin_set(group):
        gs = elements or [op.group.sample(rng) for _ in range(4)]
        ne = check_nonexpansive(op, pairs, resolution)
        eq = check_equivariance(op, gs, functions[:4], resolution)
        nb = check_norm_bound(op, functions, resolution)
        worst = max(ne, eq, nb)
        results.append(CheckResult(f"{group} {op.name} axioms", worst <= tol, worst, f"(nonexp={ne:.2g}, equiv={eq:.2g}, norm={nb:.2g})"))
    return results


def run_all(group="G3", count: int = 20, seed: int = 0) -> List[CheckResult]:
    results = check_operators(group, count, seed)
    results += [check_disjoint_bumps(), check_rotation_triangle(), check_max_vs_integral(), check_F_psi(seed=seed)]
    return results
