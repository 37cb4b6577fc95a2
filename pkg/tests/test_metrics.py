import csv
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import dG_brute
from giph.dataset import GenSpec1D, generate_1d
from giph.groups import GroupSpec
from giph.metrics import (
    GroupGrid,
    Rotation,
    approximation_gap,
    construct_F_psi,
    d_match_sup,
    diagram_tolerance,
    distance_rows,
    estimate_dF,
    mu_S,
    natural_pseudo_distance,
    periodic_samples,
    write_distance_csv,
)
from giph.operators import ConstantIntegral, ConstantMax, Offset, OperatorCache, Pointwise, builtin_set
from giph.pl_core import AffineMap, PLFunction, compose_affine, sup_distance

TOL = diagram_tolerance(1024)


@pytest.fixture(scope="module")
def pairs():
    fs = generate_1d(GenSpec1D(40, seed=21))
    return list(zip(fs[::2], fs[1::2]))


class TestDmatch:
    def test_identical(self, functions):
        assert d_match_sup(functions[0], functions[0], builtin_set("G5")).value == 0

    def test_disjoint_bumps(self):
        f1, f2 = PLFunction.tent(0.25, 1, 0.2), PLFunction.tent(0.75, 1, 0.2)
        assert d_match_sup(f1, f2, [Pointwise("id", "G1")]).value == 0
        assert sup_distance(f1, f2) == 1

    def test_result_is_max_of_breakdown(self, pairs):
        r = d_match_sup(*pairs[0], builtin_set("G4"))
        assert r.value == max(r.per_operator.values())
        assert r.per_operator[r.argmax] == r.value

    def test_empty_ops(self, pairs):
        with pytest.raises(ValueError):
            d_match_sup(*pairs[0], [])

    def test_mixed_domains(self, pairs):
        with pytest.raises(ValueError):
            d_match_sup(*pairs[0], builtin_set("ISO2"))

    def test_symmetry_and_triangle(self):
        fs = generate_1d(GenSpec1D(30, seed=4))
        ops = builtin_set("G3")
        cache = OperatorCache()
        for a, b, c in zip(fs[::3], fs[1::3], fs[2::3]):
            ab = d_match_sup(a, b, ops, cache=cache).value
            assert ab == d_match_sup(b, a, ops, cache=cache).value
            ac = d_match_sup(a, c, ops, cache=cache).value
            bc = d_match_sup(b, c, ops, cache=cache).value
            assert ac <= ab + bc + 1e-9

    @pytest.mark.parametrize("group", ["G1", "G2", "G3", "G4"])
    def test_strong_invariance(self, group, pairs):
        rng = np.random.default_rng(7)
        ops = builtin_set(group)
        for f1, f2 in pairs[:5]:
            g = GroupSpec.parse(group).sample(rng, max_scale=2.0, max_shift=1.0)
            base = d_match_sup(f1, f2, ops).value
            moved = d_match_sup(f1, compose_affine(f2, g), ops).value
            # the sampling grid of f2 o g is up to twice as coarse
            assert abs(moved - base) <= 2 * TOL


class TestNaturalPseudoDistance:
    def test_self(self, functions):
        assert natural_pseudo_distance(functions[0], functions[0], GroupGrid("G1")) == 0

    def test_translated_copy(self, functions):
        f = functions[3]
        g = compose_affine(f, AffineMap(1.0, -0.1))
        grid = GroupGrid.flat("G4", [1.0], np.round(np.arange(-100, 101) * 0.01, 12))
        assert natural_pseudo_distance(f, g, grid) <= 0.01 * 5
        assert natural_pseudo_distance(f, g, GroupGrid("G4")) <= 1e-12

    def test_g5_is_sup_distance(self, pairs):
        for f1, f2 in pairs:
            assert natural_pseudo_distance(f1, f2, GroupGrid("G5")) == sup_distance(f1, f2)

    def test_matches_brute_force_on_flat_grid(self, pairs):
        a = [-2.0, -1.0, -0.5, 0.5, 1.0, 1.5, 3.0]
        b = np.linspace(-3, 3, 25)
        for f1, f2 in pairs[:6]:
            got = natural_pseudo_distance(f1, f2, GroupGrid.flat("G1", a, b))
            assert got == pytest.approx(dG_brute(f1, f2, a, b), abs=1e-12)

    def test_returns_element(self, functions):
        f = functions[5]
        g = compose_affine(f, AffineMap(-1.0, 1.0))
        d, elem = natural_pseudo_distance(f, g, GroupGrid("G3"), return_element=True)
        assert d <= 1e-12
        assert sup_distance(f, compose_affine(g, elem)) == pytest.approx(d, abs=1e-12)

    def test_subgroup_monotonicity_nested_grids(self, pairs):
        b = np.round(np.arange(-60, 61) * 0.05, 12)
        a = [-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0]
        for f1, f2 in pairs:
            g4 = natural_pseudo_distance(f1, f2, GroupGrid.flat("G4", a, b))
            g3 = natural_pseudo_distance(f1, f2, GroupGrid.flat("G3", a, b))
            g1 = natural_pseudo_distance(f1, f2, GroupGrid.flat("G1", a, b))
            assert g4 >= g3 >= g1

    def test_refined_grid_lies_on_exact_grid(self, pairs):
        f1, f2 = pairs[0]
        d, g = natural_pseudo_distance(f1, f2, GroupGrid("G1"), return_element=True)
        assert g is None or (abs(g.a * 100 - round(g.a * 100)) < 1e-6 and abs(g.b * 100 - round(g.b * 100)) < 1e-6)

    def test_exact_grid_small(self):
        f1 = PLFunction.tent(0.5, 1, 0.5)
        f2 = PLFunction.tent(0.3, 0.8, 0.2)
        grid = GroupGrid.exact("G4", c=1.0, step=0.01)
        assert natural_pseudo_distance(f1, f2, grid) == pytest.approx(dG_brute(f1, f2, [1.0], grid.b_values), abs=1e-12)

    def test_sandwich(self, pairs):
        cache = OperatorCache()
        for group in ("G1", "G2", "G3", "G4", "G5"):
            ops, grid = builtin_set(group), GroupGrid(group)
            for f1, f2 in pairs:
                D = d_match_sup(f1, f2, ops, cache=cache).value
                dg = natural_pseudo_distance(f1, f2, grid)
                assert D <= dg + TOL
                assert dg <= sup_distance(f1, f2) + 1e-12

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            GroupGrid.flat("G4", [2.0], [0.0])


class TestMuS:
    def test_identity_only(self, pairs):
        f1, f2 = pairs[0]
        assert mu_S(f1, f2, [AffineMap(1.0, 0.0)]) == sup_distance(f1, f2)

    def test_rotation_set_breaks_triangle(self):
        sin, cos = periodic_samples(np.sin), periodic_samples(np.cos)
        S = [Rotation(0.0), Rotation(-np.pi / 2)]
        assert mu_S(sin, cos, S) <= 1e-9
        assert mu_S(cos, -sin, S) <= 1e-9
        assert mu_S(sin, -sin, S) == pytest.approx(math.sqrt(2), abs=1e-3)

    def test_rotation_interpolates(self):
        v = periodic_samples(np.sin, 1000)
        assert_allclose(Rotation(0.3).compose(v), np.sin(2 * np.pi * np.arange(1000) / 1000 + 0.3), atol=1e-4)


class TestOperatorSpace:
    def test_F_psi_identity(self, functions):
        op = construct_F_psi(functions[0], sup_distance)
        x = np.linspace(-1, 2, 7)
        assert_allclose(op.evaluate(functions[0], x), 0)

    def test_F_psi_bottleneck_is_difference(self, pairs):
        psi = pairs[-1][0]
        grid = GroupGrid("G4")
        op = construct_F_psi(psi, lambda f, p: natural_pseudo_distance(f, p, grid), group="G4")
        for f1, f2 in pairs[:4]:
            expected = abs(natural_pseudo_distance(f1, psi, grid) - natural_pseudo_distance(f2, psi, grid))
            assert d_match_sup(f1, f2, [op]).value == pytest.approx(expected, abs=1e-12)

    def test_F_psi_g5(self, pairs):
        for f1, f2 in pairs:
            assert abs(d_match_sup(f1, f2, [construct_F_psi(f2, sup_distance)]).value - sup_distance(f1, f2)) <= 1e-9

    def test_dF_self(self, functions):
        op = builtin_set("G1")[2]
        assert estimate_dF(op, op, functions[:5]) == 0

    def test_dF_constant_offset(self, functions):
        op = builtin_set("G3")[6]
        assert estimate_dF(op, Offset("o", op.group, op, 0.05), functions[:5]) == pytest.approx(0.05)

    def test_max_vs_integral(self):
        probes = [PLFunction.tent(0.5, 1.0, 1.0 / i) for i in range(1, 201)]
        v = estimate_dF(ConstantMax("m", "G5"), ConstantIntegral("i", "G5"), probes)
        assert 0.99 <= v < 1

    def test_gap_zero_for_same_sets(self, pairs):
        ops = builtin_set("G3")
        assert approximation_gap(*pairs[0], ops, ops) == 0

    def test_gap_bounded_by_twice_eps(self, pairs):
        ops = builtin_set("G5")
        for eps in (0.01, 0.05, 0.1):
            perturbed = [Offset(f"{op.name}+", "G5", op, eps, ({"type": "sine", "freq": 3},)) for op in ops]
            for f1, f2 in pairs[:5]:
                assert approximation_gap(f1, f2, ops, ops + perturbed) <= 2 * eps + 1e-12

    def test_gap_subset(self, pairs):
        ops = builtin_set("G3")
        rng = np.random.default_rng(0)
        for f1, f2 in pairs[:5]:
            sub = [ops[i] for i in sorted(rng.choice(len(ops), 4, replace=False))]
            assert approximation_gap(f1, f2, sub, ops) <= d_match_sup(f1, f2, ops).value


def test_distance_csv(tmp_path, functions):
    rows = distance_rows(functions[:4], builtin_set("G4"), GroupGrid("G4"))
    path = tmp_path / "d.csv"
    write_distance_csv(path, rows)
    with open(path) as fh:
        recs = list(csv.DictReader(fh))
    assert list(recs[0]) == ["id1", "id2", "dmatch", "argmax_op", "dG_upper", "resolution"]
    assert len(recs) == 6
    assert all(float(r["dmatch"]) <= float(r["dG_upper"]) + TOL for r in recs)


def test_wider_refinement_finds_reflection(functions):
    f = functions[7]
    copy = compose_affine(f, AffineMap(-1.0, 1.2))
    narrow = natural_pseudo_distance(f, copy, GroupGrid("G3"))
    wide = natural_pseudo_distance(f, copy, GroupGrid("G3", top_k=4))
    assert wide <= 1e-12 and wide <= narrow
