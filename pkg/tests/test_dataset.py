import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_array_equal
from scipy.stats import chisquare

from giph.dataset import (
    GenSpec1D,
    GridFunction2D,
    draw_bumps,
    generate_1d,
    generate_2d,
    image_grid,
    load,
    save,
    write_pgm,
)
from giph.pl_core import lipschitz_constant


class TestGenerate1D:
    def test_count_and_shape(self):
        fs = generate_1d(GenSpec1D(50, seed=3))
        assert len(fs) == 50
        for f in fs:
            assert len(f.xs) == 8
            assert f.xs[0] == 0 and f.xs[-1] == 1 and f.ys[0] == 0 and f.ys[-1] == 0
            assert np.all(np.diff(f.xs) > 0)
            assert np.all(np.abs(f.ys) <= 1)

    @given(st.floats(3.0, 20.0), st.integers(0, 2**32 - 1))
    def test_lipschitz_filter(self, cap, seed):
        for f in generate_1d(GenSpec1D(20, lipschitz_cap=cap, seed=seed)):
            assert lipschitz_constant(f) <= cap

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save(a, generate_1d(GenSpec1D(30, seed=7)))
        save(b, generate_1d(GenSpec1D(30, seed=7)))
        assert a.read_bytes() == b.read_bytes()
        save(b, generate_1d(GenSpec1D(30, seed=8)))
        assert a.read_bytes() != b.read_bytes()

    def test_prefix_stable(self):
        short = generate_1d(GenSpec1D(5, seed=1))
        long = generate_1d(GenSpec1D(40, seed=1))
        assert short == long[:5]

    def test_unique_ids(self):
        fs = generate_1d(GenSpec1D(100, seed=0))
        assert len({f.id for f in fs}) == 100

    def test_impossible_cap(self):
        with pytest.raises(RuntimeError):
            generate_1d(GenSpec1D(1, lipschitz_cap=0.1, max_attempts=10_000))

    @pytest.mark.parametrize("kw", [{"count": 0}, {"count": 3, "lipschitz_cap": 0.0}])
    def test_bad_spec(self, kw):
        with pytest.raises(ValueError):
            GenSpec1D(**kw)


class TestGenerate2D:
    def test_deterministic(self):
        a, b = generate_2d(1, bump_range=(3, 3), seed=5), generate_2d(1, bump_range=(3, 3), seed=5)
        assert_array_equal(a[0].values, b[0].values)

    def test_range_and_support(self):
        imgs = generate_2d(20, size=64, pad=4, seed=2)
        axis, _ = image_grid(64, 4)
        outside = (axis < 0) | (axis > 1)
        for img in imgs:
            v = img.values
            assert v.min() >= 0 and v.max() <= 1 and v.max() > 0
            assert np.all(v[outside, :] == 0) and np.all(v[:, outside] == 0)

    def test_grid_geometry(self):
        img = generate_2d(1, size=128, pad=8)[0]
        assert img.values.shape == (144, 144)
        assert img.cell == pytest.approx(1 / 127)
        assert img.origin == pytest.approx((-8 / 127, -8 / 127))

    def test_bump_count_uniform(self):
        rng = np.random.default_rng(0)
        counts = np.bincount([len(draw_bumps(rng)) for _ in range(10_000)], minlength=7)[3:]
        assert counts.sum() == 10_000
        assert chisquare(counts).pvalue > 1e-3

    def test_return_bumps(self):
        imgs, bumps = generate_2d(4, seed=1, size=32, pad=2, return_bumps=True)
        assert len(imgs) == len(bumps) == 4
        for b in bumps:
            assert 3 <= len(b) <= 6
            for bump in b:
                assert bump.radius <= bump.cx <= 1 - bump.radius

    def test_count_zero(self):
        with pytest.raises(ValueError):
            generate_2d(0)


class TestStorage:
    def test_roundtrip_1d(self, tmp_path):
        fs = generate_1d(GenSpec1D(25, seed=9))
        path = tmp_path / "d.jsonl"
        save(path, fs)
        back = load(path)
        assert back == fs
        assert [f.id for f in back] == [f.id for f in fs]
        for f, g in zip(fs, back):
            assert_array_equal(f.xs, g.xs)
            assert_array_equal(f.ys, g.ys)

    def test_roundtrip_2d(self, tmp_path):
        imgs = generate_2d(3, size=16, pad=2, seed=4)
        path = tmp_path / "i.jsonl"
        save(path, imgs)
        back = load(path)
        assert back == imgs and back[1].id == imgs[1].id

    def test_empty_file(self, tmp_path):
        path = tmp_path / "e.jsonl"
        path.write_text("")
        assert load(path) == []

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "t.jsonl"
        save(path, generate_1d(GenSpec1D(3, seed=0)))
        text = path.read_text()
        path.write_text(text[: len(text) - 20])
        with pytest.raises(ValueError, match=r":3:"):
            load(path)

    def test_unknown_record(self, tmp_path):
        path = tmp_path / "u.jsonl"
        path.write_text('{"id": "x"}\n')
        with pytest.raises(ValueError, match=r":1:"):
            load(path)

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        save(tmp_path / "d.jsonl", generate_1d(GenSpec1D(2, seed=0)))
        assert [p.name for p in tmp_path.iterdir()] == ["d.jsonl"]

    def test_pgm(self, tmp_path):
        img = GridFunction2D(np.array([[0.0, 1.0], [0.5, 0.0]]), 1.0)
        path = tmp_path / "x.pgm"
        write_pgm(img, path)
        data = path.read_bytes()
        assert data.startswith(b"P5\n2 2\n255\n")
        assert list(data[-4:]) == [128, 255, 255, 0]
