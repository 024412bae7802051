import numpy as np
import pytest

import locomp


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def test_ratios_and_feasibility():
    assert locomp.compression_ratios(7, 2, 1) == (12.25, 12.25)
    assert locomp.compression_ratios(7, 2, 4) == (12.25, 3.0625)
    assert not locomp.pca_feasible(7, 4, 1)
    assert locomp.pca_feasible(7, 5, 1)


def test_compress_shapes_and_dtypes(rng):
    x = rng.integers(0, 256, (3, 224, 224), dtype=np.uint8)
    for method, dtype in [("percentile", np.uint8), ("downgrade", np.uint8),
                          ("rmm", np.float32), ("ms", np.float32)]:
        y = locomp.compress(x, method, 7, 2, seed=3)
        assert y.shape == (3, 64, 64)
        assert y.dtype == dtype


def test_rmm_matches_numpy(rng):
    x = rng.integers(0, 256, (1, 7, 7), dtype=np.uint8)
    mat = locomp.rmm_matrix(7, 2, 1.0, 9)
    assert mat.shape == (4, 49)
    y = locomp.compress(x, "rmm", 7, 2, matrix=mat)
    ref = (mat.astype(np.float64) @ x.reshape(49).astype(np.float64)).reshape(2, 2)
    np.testing.assert_allclose(y[0], ref, rtol=1e-5, atol=1e-3)


def test_ms_matches_numpy(rng):
    x = rng.standard_normal((1, 7, 7)).astype(np.float32)
    mat = locomp.ms_matrix(7, 2, 1.0, 4)
    y = locomp.compress(x, "ms", 7, 2, matrix=mat)
    ref = mat.astype(np.float64) @ x[0].astype(np.float64) @ mat.T.astype(np.float64)
    np.testing.assert_allclose(y[0], ref, rtol=1e-5, atol=1e-6)


def test_percentile_flip_commutes(rng):
    x = rng.integers(0, 256, (3, 28, 35), dtype=np.uint8)
    lhs = locomp.compress(np.ascontiguousarray(x[:, :, ::-1]))
    rhs = locomp.limited_flip(locomp.compress(x), 2)
    np.testing.assert_array_equal(lhs, rhs)


def test_errors_carry_codes(rng, tmp_path):
    x = rng.integers(0, 256, (3, 21, 21), dtype=np.uint8)
    with pytest.raises(locomp.ValidationError) as e:
        locomp.compress(x, "percentile", 7, 7)
    assert e.value.code == "InvalidBlockSizes"
    with pytest.raises(locomp.ValidationError):
        locomp.compress(x[:, :20, :], "percentile", 7, 2)
    bad = tmp_path / "bad.lcim"
    bad.write_bytes(b"LCIM" + b"\0" * 10)
    with pytest.raises(locomp.FormatError) as e:
        locomp.read_lcim(bad)
    assert e.value.code == "LengthMismatch"
    with pytest.raises(locomp.IoError):
        locomp.read_lcim(tmp_path / "absent.lcim")


def test_lcim_round_trip(rng, tmp_path):
    grid = rng.integers(0, 256, (3, 64, 64), dtype=np.uint8)
    path = tmp_path / "x.lcim"
    locomp.write_lcim(path, grid, "percentile", 7, 2)
    back = locomp.read_lcim(path)
    assert back["m"] == 7 and back["n"] == 2
    np.testing.assert_array_equal(back["grid"], grid)
    assert path.stat().st_size == 48 + 12288


def test_prepare_and_sample(rng, tmp_path):
    src = tmp_path / "src" / "cls"
    src.mkdir(parents=True)
    for i in range(3):
        locomp.write_png(src / f"im{i}.png", rng.integers(0, 256, (3, 240, 250), dtype=np.uint8))
    out = tmp_path / "out"
    info = locomp.prepare_default(tmp_path / "src", out, copies=2, seed=17, arch=(11, 4))
    assert info["sources"] == 3 and info["entries"] == 6
    grid, label, copy = locomp.sample(info["manifest"], 1, seed=5, crop_blocks=28)
    assert grid.shape == (3, 56, 56)
    assert label == "cls" and copy in (0, 1)
    again = locomp.sample(info["manifest"], 1, seed=5, crop_blocks=28)[0]
    np.testing.assert_array_equal(grid, again)
    with pytest.raises(locomp.ValidationError) as e:
        locomp.prepare_default(tmp_path / "src", tmp_path / "o2", arch=(11, 3))
    assert e.value.code == "StrideIncompatible"


def test_run_inline(rng, tmp_path):
    src = tmp_path / "src" / "a"
    src.mkdir(parents=True)
    locomp.write_png(src / "x.png", rng.integers(0, 256, (3, 256, 256), dtype=np.uint8))
    seen = []
    rep = locomp.run_inline(tmp_path / "src", tmp_path / "work",
                            lambda epoch, sid, label, grid: seen.append((epoch, sid, grid.shape)),
                            epochs=2)
    assert rep["emitted"] == 2 and rep["stride_ok"]
    assert seen == [(0, "a/x.png", (3, 64, 64)), (1, "a/x.png", (3, 64, 64))]


def test_fc_sketch(rng):
    v = rng.standard_normal(6400).astype(np.float32)
    assert locomp.sketch_fc_inputs(v, 25, 256, 13).shape == (3328,)
