import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from conftest import pl_functions
from giph.dataset import GridFunction2D, generate_2d
from giph.groups import GroupSpec, SquareSymmetry
from giph.operators import (
    AffineSup,
    ConstantIntegral,
    MultiplicativeProfile,
    OperatorCache,
    Pointwise,
    RadialConvolution,
    ShiftCombine,
    apply,
    builtin_set,
    check_equivariance,
    check_nonexpansive,
    check_norm_bound,
    from_record,
    load_manifest,
    log_r_grid,
    radial_kernel,
    save_manifest,
)
from giph.pl_core import AffineMap, PLFunction, compose_affine, padded_grid

TOL = 1e-6 + padded_grid(PLFunction.zero(), 1024).cell * 5


class TestBuiltinSets:
    @pytest.mark.parametrize("group,size", [("G1", 5), ("G2", 7), ("G3", 10), ("G4", 15), ("G5", 20), ("ISO2", 12)])
    def test_sizes(self, group, size):
        assert len(builtin_set(group)) == size

    def test_nested(self):
        names = {g: [op.name for op in builtin_set(g)] for g in ("G1", "G3", "G4", "G5")}
        assert names["G1"] == names["G3"][:5]
        assert names["G3"] == names["G4"][:10]
        assert names["G4"] == names["G5"][:15]

    def test_g2_keeps_identity_and_negation(self):
        assert [op.name for op in builtin_set("G2")][:2] == ["F1a", "F1b"]

    def test_operator_groups_contain_target_group(self):
        for g in ("G1", "G2", "G3", "G4", "G5"):
            for op in builtin_set(g):
                assert GroupSpec.parse(g).is_subgroup_of(op.group)

    @pytest.mark.parametrize("group", ["G1", "G2", "G3", "G4", "G5"])
    def test_weights_nonexpansive(self, group):
        for op in builtin_set(group):
            w = getattr(op, "weights", None)
            if w is not None and op.kind != "multiplicative-profile":
                assert np.sum(np.abs(w)) <= 1 + 1e-12

    def test_published_parameters(self):
        ops = {op.name: op for op in builtin_set("G5")}
        assert ops["F1c"].weights == (0.3, 0.4, 0.3) and ops["F1c"].centers == (0.3, 0.6, 0.9)
        assert ops["F1d"].weights == (-0.3, 0.4, -0.3)
        assert ops["F1e"].centers == (0.2, 0.4, 0.6, 0.8, 1.0)
        assert ops["F3c"].shifts == (-1 / 3, 0.0, 1 / 3)
        assert ops["F4d"].shifts == (0.0, 0.2, 0.4)
        assert ops["F5b"].terms[0]["freq"] == 9
        g2 = {op.name: op for op in builtin_set("G2")}
        assert g2["F2e"].weights == (-0.1, 0.2, -0.4, 0.2, -0.1) and g2["F2e"].oriented


class TestApply:
    f = PLFunction([0, 0.2, 0.45, 0.7, 1], [0, 0.6, -0.4, 0.9, 0])

    def test_identity(self):
        out = apply(Pointwise("id", "G1", 1.0), self.f)
        assert_allclose(out.values, self.f(out.nodes))

    def test_negation(self):
        out = apply(Pointwise("neg", "G1", -1.0), self.f)
        assert_allclose(out.values, -self.f(out.nodes))

    def test_shift_max_pointwise_value(self):
        # phi(x - 1/4) = 0.2, phi(x) = 0.5, phi(x + 1/4) = 0.1 -> 0.5
        f = PLFunction.from_points([(0, 0), (0.25, 0.2), (0.5, 0.5), (0.75, 0.1), (1, 0)])
        op = ShiftCombine("F3a", "G3", (-0.25, 0, 0.25), mode="max")
        assert op.evaluate(f, 0.5) == pytest.approx(0.5)

    def test_constant_integral_zero_image(self):
        img = GridFunction2D(np.zeros((20, 20)), 0.1)
        assert_array_equal(apply(ConstantIntegral("i", "ISO2"), img).values, 0)

    def test_domain_mismatch(self):
        img = GridFunction2D(np.zeros((5, 5)), 0.25)
        with pytest.raises(TypeError):
            apply(builtin_set("G1")[2], img)
        with pytest.raises(TypeError):
            apply(builtin_set("ISO2")[2], self.f)

    def test_output_constant_outside_window(self):
        for op in builtin_set("G5"):
            lo, hi = op.window(*self.f.support)
            far = np.array([lo - 0.3, lo - 5, hi + 0.3, hi + 5])
            if op.kind == "multiplicative-profile":
                continue
            v = op.evaluate(self.f, far)
            assert np.ptp(v) <= 1e-12, op.name

    def test_affine_sup_exact_matches_fine_grid(self):
        op = builtin_set("G1")[2]
        x = np.linspace(-1, 2, 50)
        dense = AffineSup("dense", "G1", op.weights, op.centers, r_grid=log_r_grid(1e-3, 1e3, 20001))
        exact = op.evaluate(self.f, x)
        approx = dense.evaluate(self.f, x)
        assert np.all(approx <= exact + 1e-12)
        assert np.max(exact - approx) < 5e-3

    def test_r_grid_refinement_is_monotone(self):
        op = builtin_set("G2")[2]
        coarse = AffineSup("c", "G2", op.weights, op.centers, oriented=True, r_grid=log_r_grid(n=65, both_signs=False))
        fine_grid = np.union1d(coarse.r_grid, log_r_grid(n=257, both_signs=False))
        fine = AffineSup("f", "G2", op.weights, op.centers, oriented=True, r_grid=tuple(fine_grid))
        x = np.linspace(-2, 3, 200)
        assert np.all(fine.evaluate(self.f, x) >= coarse.evaluate(self.f, x))

    def test_cache_get_or_compute(self):
        cache = OperatorCache()
        f = self.f.with_id("a")
        op = builtin_set("G1")[2]
        first = cache.apply(op, f)
        assert cache.apply(op, f) is first and len(cache) == 1


class TestAxioms:
    @pytest.mark.parametrize("group", ["G1", "G2", "G3", "G4", "G5"])
    def test_builtin_1d(self, group, functions):
        rng = np.random.default_rng(0)
        pairs = list(zip(functions[:20:2], functions[1:20:2]))
        for op in builtin_set(group):
            gs = [op.group.sample(rng) for _ in range(3)]
            assert check_nonexpansive(op, pairs) <= TOL, op.name
            assert check_equivariance(op, gs, functions[:4]) <= TOL, op.name
            assert check_norm_bound(op, functions[:10]) <= TOL, op.name

    def test_builtin_iso2(self):
        imgs = generate_2d(6, size=32, pad=4, seed=1)
        pairs = list(zip(imgs[::2], imgs[1::2]))
        for op in builtin_set("ISO2"):
            assert check_nonexpansive(op, pairs) <= 1e-9, op.name
            assert check_equivariance(op, SquareSymmetry.all(), imgs[:2]) <= 1e-9, op.name
            assert check_norm_bound(op, imgs) <= 1e-9, op.name
            out = op.apply_image(imgs[0]).values
            assert out.min() >= -1 and out.max() <= 1

    def test_identity_exact(self, functions):
        op = Pointwise("id", "G1")
        assert check_nonexpansive(op, [(functions[0], functions[1])]) == 0
        assert check_equivariance(op, [AffineMap(2.0, 0.3)], functions[:3]) <= 1e-15

    def test_invalid_weights_detected(self):
        # |w| sums to 1.5: two nearby bumps differing by d give an output gap of 1.5 d
        op = ShiftCombine("bad", "G4", (0.0, 0.25), weights=(0.75, 0.75))
        f1 = PLFunction([0, 0.25, 0.5, 1], [0, 0.5, 0.5, 0])
        f2 = PLFunction([0, 0.25, 0.5, 1], [0, 0.7, 0.7, 0])
        assert check_nonexpansive(op, [(f1, f2)]) > 0.05

    def test_translation_f3a(self, functions):
        op = builtin_set("G3")[5]
        assert check_equivariance(op, [AffineMap(1.0, 0.1)], functions[:5]) <= TOL

    def test_reflection_breaks_oriented(self):
        op = builtin_set("G2")[2]
        f = PLFunction([0, 0.1, 0.3, 0.8, 1], [0, 0.9, -0.2, 0.3, 0])
        assert check_equivariance(op, [AffineMap(-1.0, 1.0)], [f]) > 0.01

    @given(pl_functions(), st.floats(0.2, 5), st.floats(-2, 2))
    def test_affine_sup_equivariance_property(self, f, a, b):
        for op in builtin_set("G1")[2:]:
            g = AffineMap(-a, b)
            x = np.linspace(-3, 3, 41)
            assert_allclose(op.evaluate(compose_affine(f, g), x), op.evaluate(f, g(x)), atol=1e-12)

    def test_f5c_norm_bound(self, functions):
        op = {o.name: o for o in builtin_set("G5")}["F5c"]
        assert check_norm_bound(op, functions[:60]) <= TOL


class TestKernels:
    def test_abs_sum_at_most_one(self):
        for op in builtin_set("ISO2")[2:6]:
            for cell in (1 / 31, 1 / 127, 1 / 255):
                assert np.abs(op.kernel(cell)).sum() <= 1 + 1e-12

    def test_square_symmetric(self):
        for op in builtin_set("ISO2")[2:6]:
            k = op.kernel(1 / 127)
            for s in SquareSymmetry.all():
                assert_array_equal(s(k), k)

    def test_disc_integral(self):
        # 16/pi over a disc of radius 1/4 integrates to one
        k = radial_kernel((0.0, 0.25), (16 / np.pi,), 1 / 255)
        assert k.sum() == pytest.approx(1.0, abs=0.01)

    def test_convolution_matches_direct_sum(self):
        rng = np.random.default_rng(0)
        img = GridFunction2D(np.pad(rng.uniform(0, 1, (8, 8)), 2), 1 / 11)
        op = RadialConvolution("r", "ISO2", (0.0, 0.15, 0.3), (10.0, -10.0))
        out = op.apply_image(img).values
        k = op.kernel(img.cell)
        r = (k.shape[0] - 1) // 2
        padded = np.pad(img.values, 2 * r)
        direct = np.array(
            [[np.sum(padded[i : i + 2 * r + 1, j : j + 2 * r + 1] * k[::-1, ::-1]) for j in range(img.width + 2 * r)] for i in range(img.height + 2 * r)]
        )
        assert_allclose(out[1:-1, 1:-1], direct, atol=1e-11)


class TestManifest:
    def test_roundtrip(self, tmp_path):
        ops = builtin_set("G5") + builtin_set("ISO2") + [AffineSup("g", "G1", (0.5, -0.5), (1.0, 2.0), r_grid=(0.5, 1.0, -1.0))]
        path = tmp_path / "ops.jsonl"
        save_manifest(path, ops)
        loaded = load_manifest(path)
        assert [o.to_record() for o in loaded] == [o.to_record() for o in ops]
        rec = json.loads(path.read_text().splitlines()[2])
        assert set(rec) == {"name", "group", "kind", "params"} and rec["kind"] == "affine-sup"

    def test_bad_record(self, tmp_path):
        path = tmp_path / "ops.jsonl"
        path.write_text('{"name": "x", "group": "G1", "kind": "mystery", "params": {}}\n')
        with pytest.raises(ValueError, match=":1:"):
            load_manifest(path)

    def test_oriented_kind(self):
        op = from_record({"name": "o", "group": "G2", "kind": "oriented-affine-sup", "params": {"weights": [1.0], "centers": [1.0]}})
        assert op.oriented and op.kind == "oriented-affine-sup"

    def test_multiplicative_profile_record(self):
        op = MultiplicativeProfile("m", "G5", 2.0, ({"type": "gauss", "mu": 0.5, "width": 0.1},))
        assert from_record(op.to_record()).evaluate(PLFunction.zero(), 0.5) == pytest.approx(2.0)
