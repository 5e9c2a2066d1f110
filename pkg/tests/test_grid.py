import json

import numpy as np
import pytest

from sdph.grid import (
    BinaryMask,
    GridDims,
    InputError,
    ScalarField,
    close_boundary,
    load_field,
    load_mask,
    save_field,
    save_mask,
    threshold_mask,
)


def test_dims_validation():
    GridDims(1, 1, 1)
    with pytest.raises(InputError):
        GridDims(0, 4, 4)
    with pytest.raises(InputError):
        GridDims(4, 4, 4, spacing=0.0)
    with pytest.raises(InputError):
        GridDims(100_000, 100_000, 100_000)


def test_scalar_field_rejects_nonfinite():
    dims = GridDims(2, 2, 2)
    vals = np.zeros((2, 2, 2))
    vals[1, 0, 1] = np.nan
    with pytest.raises(InputError, match="linear index 5"):
        ScalarField(dims, vals)


def test_npy_roundtrip_trivial(tmp_path):
    dims = GridDims(4, 4, 4)
    fld = ScalarField(dims, np.zeros((4, 4, 4)))
    p = tmp_path / "zeros.npy"
    save_field(fld, p)
    back = load_field(p)
    assert back.dims == dims
    assert np.array_equal(back.values, fld.values)


def test_npy_roundtrip_bitexact_random(tmp_path):
    rng = np.random.default_rng(20240817)
    vals = rng.standard_normal((16, 16, 16))
    fld = ScalarField(GridDims(16, 16, 16), vals)
    p = tmp_path / "r.npy"
    save_field(fld, p)
    back = load_field(p)
    assert back.values.tobytes() == fld.values.tobytes()


def test_npy_roundtrip_enumerated_cube(tmp_path):
    fld = ScalarField(GridDims(2, 2, 2), np.arange(1.0, 9.0).reshape(2, 2, 2))
    p = tmp_path / "cube.npy"
    save_field(fld, p)
    assert np.array_equal(load_field(p).values, fld.values)


def test_on_disk_dtypes(tmp_path):
    dims = GridDims(3, 3, 3)
    save_field(ScalarField(dims, np.zeros((3, 3, 3))), tmp_path / "f.npy")
    assert np.load(tmp_path / "f.npy").dtype == np.dtype("<f8")
    mask = BinaryMask.from_array(dims, np.ones((3, 3, 3), bool))
    save_mask(mask, tmp_path / "m.npy")
    assert np.load(tmp_path / "m.npy").dtype == np.dtype("u1")


def test_npy_rejects_nan_with_position(tmp_path):
    arr = np.zeros((3, 3, 3))
    arr[2, 1, 0] = np.nan  # linear index x + nx*(y + ny*z) = 2 + 3*1 = 5
    p = tmp_path / "bad.npy"
    np.save(p, arr)
    with pytest.raises(InputError, match="linear index 5"):
        load_field(p)


def test_npy_rejects_wrong_rank_and_dtype(tmp_path):
    p = tmp_path / "flat.npy"
    np.save(p, np.zeros(8))
    with pytest.raises(InputError, match="3D"):
        load_field(p)
    p2 = tmp_path / "i32.npy"
    np.save(p2, np.zeros((2, 2, 2), dtype=np.int32))
    with pytest.raises(InputError, match="dtype"):
        load_field(p2)


def test_missing_file():
    with pytest.raises(InputError, match="no such file"):
        load_field("/nonexistent/field.npy")


def test_raw_sidecar_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    fld = ScalarField(GridDims(5, 6, 7, spacing=2.5), rng.standard_normal((5, 6, 7)))
    p = tmp_path / "field.raw"
    save_field(fld, p, format="raw")
    meta = json.loads((tmp_path / "field.raw.json").read_text())
    assert meta["nx"] == 5 and meta["spacing"] == 2.5
    back = load_field(p)
    assert back.dims == fld.dims
    assert back.values.tobytes() == fld.values.tobytes()


def test_raw_requires_sidecar(tmp_path):
    p = tmp_path / "naked.raw"
    p.write_bytes(b"\x00" * 8)
    with pytest.raises(InputError, match="sidecar"):
        load_field(p)


def test_mask_roundtrip_and_threshold(tmp_path):
    rng = np.random.default_rng(11)
    dims = GridDims(8, 8, 8)
    mask = BinaryMask.from_array(dims, rng.random((8, 8, 8)) < 0.4)
    p = tmp_path / "m.npy"
    save_mask(mask, p)
    assert load_mask(p) == mask
    # saving the mask as a 0/1 field and thresholding at 0.5 recovers it
    fld = ScalarField(dims, mask.as_array().astype(float))
    save_field(fld, tmp_path / "f.npy")
    back = threshold_mask(load_field(tmp_path / "f.npy"), 0.5, "above_or_equal")
    assert back == mask


def test_threshold_examples():
    dims = GridDims(3, 1, 1)
    fld = ScalarField(dims, np.array([-1.0, 0.0, 2.0]).reshape(3, 1, 1))
    m = threshold_mask(fld, 0.0, "above_or_equal")
    assert m.as_array().ravel(order="F").tolist() == [False, True, True]

    const = ScalarField(dims, np.full((3, 1, 1), 5.0))
    assert threshold_mask(const, 0.0, "above_or_equal").count_foreground() == 3

    below = threshold_mask(fld, 0.0, "below")
    assert below.as_array().ravel(order="F").tolist() == [True, False, False]


def test_threshold_shifted_field_equivalence():
    # f - 0.5 at level 0 equals f at level 0.5, voxel for voxel
    rng = np.random.default_rng(5)
    dims = GridDims(10, 10, 10)
    vals = rng.standard_normal((10, 10, 10))
    f = ScalarField(dims, vals)
    f_shift = ScalarField(dims, vals - 0.5)
    assert threshold_mask(f_shift, 0.0, "above_or_equal") == threshold_mask(
        f, 0.5, "above_or_equal"
    )


def test_threshold_shift_equivariance():
    rng = np.random.default_rng(6)
    dims = GridDims(6, 6, 6)
    vals = rng.integers(-4, 5, size=(6, 6, 6)).astype(float)
    f = ScalarField(dims, vals)
    for c in (-2.0, 0.25, 1.5):
        shifted = ScalarField(dims, vals + c)
        assert threshold_mask(f, 0.5, "above_or_equal") == threshold_mask(
            shifted, 0.5 + c, "above_or_equal"
        )


def test_close_boundary_all_ones():
    dims = GridDims(10, 10, 10)
    m = BinaryMask.from_array(dims, np.ones((10, 10, 10), bool))
    closed = close_boundary(m, 3)
    arr = closed.as_array()
    assert arr.sum() == 4**3
    assert arr[3:7, 3:7, 3:7].all()


def test_close_boundary_zeros_and_idempotence(rng):
    dims = GridDims(12, 12, 12)
    zeros = BinaryMask.from_array(dims, np.zeros((12, 12, 12), bool))
    assert close_boundary(zeros, 4) == zeros

    m = BinaryMask.from_array(dims, rng.random((12, 12, 12)) < 0.5)
    once = close_boundary(m, 3)
    assert close_boundary(once, 3) == once


def test_close_boundary_width_errors():
    dims = GridDims(10, 10, 10)
    m = BinaryMask.from_array(dims, np.ones((10, 10, 10), bool))
    with pytest.raises(InputError):
        close_boundary(m, 5)
    with pytest.raises(InputError):
        close_boundary(m, 0)


@pytest.mark.slow
def test_grf_field_roundtrip_bitexact(cache, tmp_path):
    fld = cache.preset_field("F1", 0)
    p = tmp_path / "f1.npy"
    save_field(fld, p)
    assert float(np.abs(load_field(p).values - fld.values).max()) == 0.0


@pytest.mark.slow
def test_close_boundary_grf_shell_empty(cache):
    fld = cache.preset_field("F1", 0)
    m = threshold_mask(fld, 0.0, "above_or_equal")
    closed = close_boundary(m, 3)
    arr = closed.as_array()
    shell = arr.copy()
    shell[3:-3, 3:-3, 3:-3] = False
    assert shell.sum() == 0
    assert arr.sum() > 0
