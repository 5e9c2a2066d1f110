import numpy as np
import pytest
from oracles import axis_neighbor_max_step, brute_edt_sq

from sdph.grid import BinaryMask, GridDims, threshold_mask
from sdph.sdt import EmptyPhase, edt_sq, mask_hash, signed_distance
from sdph.synth import Ball, rasterize


def mask_of(arr):
    arr = np.asarray(arr, dtype=bool)
    return BinaryMask.from_array(GridDims(*arr.shape), arr)


def test_edt_all_foreground_is_zero():
    m = mask_of(np.ones((4, 4, 4)))
    assert not edt_sq(m, "foreground").values.any()


def test_edt_single_seed_formula():
    arr = np.zeros((3, 3, 3), bool)
    arr[0, 0, 0] = True
    d = edt_sq(mask_of(arr), "foreground").values
    for x in range(3):
        for y in range(3):
            for z in range(3):
                assert d[x, y, z] == x * x + y * y + z * z


def test_edt_empty_phase():
    with pytest.raises(EmptyPhase):
        edt_sq(mask_of(np.ones((3, 3, 3))), "background")
    with pytest.raises(EmptyPhase):
        edt_sq(mask_of(np.zeros((3, 3, 3))), "foreground")


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_edt_matches_brute_force(seed):
    arr = np.random.default_rng(seed).random((16, 16, 16)) < 0.5
    m = mask_of(arr)
    for to, target in (("foreground", arr), ("background", ~arr)):
        got = edt_sq(m, to).values
        assert np.array_equal(got, brute_edt_sq(target))


def test_edt_sparse_mask_matches_brute_force():
    # very sparse targets leave whole rows seedless, exercising the
    # sentinel-handling paths of the separable envelope passes
    rng = np.random.default_rng(31)
    arr = rng.random((16, 16, 16)) < 0.02
    arr[5, 7, 9] = True
    m = mask_of(arr)
    assert np.array_equal(edt_sq(m, "foreground").values, brute_edt_sq(arr))


def test_edt_values_are_exact_integers():
    arr = np.random.default_rng(9).random((12, 9, 7)) < 0.3
    d = edt_sq(mask_of(arr), "foreground").values
    assert np.array_equal(d, np.round(d))


def test_signed_distance_line_conventions():
    arr = np.zeros((10, 1, 1), bool)
    arr[:5] = True
    m = mask_of(arr)
    # default: zero level on the dual boundary between voxel centers
    d = signed_distance(m).field.values.ravel()
    assert np.allclose(d, [-4.5, -3.5, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 3.5, 4.5])
    # center-to-center variant
    dc = signed_distance(m, surface_offset=False).field.values.ravel()
    assert np.allclose(dc, [-5, -4, -3, -2, -1, 1, 2, 3, 4, 5])


def test_signed_distance_single_voxel():
    arr = np.zeros((5, 5, 5), bool)
    arr[2, 2, 2] = True
    m = mask_of(arr)
    dc = signed_distance(m, surface_offset=False).field.values
    assert dc[2, 2, 2] == -1.0
    assert dc[3, 2, 2] == 1.0
    assert dc[3, 3, 2] == pytest.approx(np.sqrt(2))
    d = signed_distance(m).field.values
    assert d[2, 2, 2] == -0.5
    assert d[3, 2, 2] == 0.5
    assert d[3, 3, 2] == pytest.approx(np.sqrt(2) - 0.5)


def test_signed_distance_requires_both_phases():
    with pytest.raises(EmptyPhase):
        signed_distance(mask_of(np.ones((3, 3, 3))))
    with pytest.raises(EmptyPhase):
        signed_distance(mask_of(np.zeros((3, 3, 3))))


def test_ball_minimum_near_negative_radius():
    m = rasterize(Ball(GridDims(64, 64, 64), 3, 20.0))
    d = signed_distance(m).field.values
    assert abs(d.min() - (-20.0)) <= 1.0


def test_sign_consistency_with_mask(rng):
    for _ in range(5):
        arr = rng.random((9, 8, 7)) < rng.uniform(0.2, 0.8)
        if not arr.any() or arr.all():
            continue
        m = mask_of(arr)
        sdf = signed_distance(m)
        assert threshold_mask(sdf.field, 0.0, "below") == m


def test_reflection_symmetry(rng):
    arr = rng.random((8, 7, 9)) < 0.5
    arr[0, 0, 0] = True
    arr[-1, -1, -1] = False
    m = mask_of(arr)
    d = signed_distance(m).field.values
    for ax in range(3):
        flipped = mask_of(np.flip(arr, axis=ax))
        df = signed_distance(flipped).field.values
        assert np.array_equal(df, np.flip(d, axis=ax))


def test_axis_lipschitz_bound(rng):
    for spacing in (1.0, 0.7):
        for _ in range(4):
            arr = rng.random((10, 10, 10)) < 0.5
            if not arr.any() or arr.all():
                continue
            d = signed_distance(mask_of(arr), spacing).field.values
            assert axis_neighbor_max_step(d) <= spacing * (1 + 1e-9)


def test_center_convention_violates_lipschitz_at_interface():
    # documents why the surface offset is the default
    arr = np.zeros((4, 1, 1), bool)
    arr[:2] = True
    d = signed_distance(mask_of(arr), surface_offset=False).field.values
    assert axis_neighbor_max_step(d) == 2.0


def test_spacing_scales_values():
    arr = np.zeros((6, 6, 6), bool)
    arr[2:4, 2:4, 2:4] = True
    m = mask_of(arr)
    d1 = signed_distance(m, 1.0).field.values
    d2 = signed_distance(m, 2.5).field.values
    assert np.allclose(d2, 2.5 * d1)


def test_fnv1a64_known_vectors():
    from sdph._kernels import fnv1a64

    # standard FNV-1a 64-bit vectors
    assert fnv1a64(np.frombuffer(b"", dtype=np.uint8)) == 0xCBF29CE484222325
    assert fnv1a64(np.frombuffer(b"a", dtype=np.uint8)) == 0xAF63DC4C8601EC8C
    assert fnv1a64(np.frombuffer(b"foobar", dtype=np.uint8)) == 0x85944171F73967E8


def test_mask_hash_stable_and_sensitive():
    arr = np.zeros((4, 4, 4), bool)
    arr[1, 2, 3] = True
    m = mask_of(arr)
    h1 = mask_hash(m)
    h2 = mask_hash(mask_of(arr))
    assert h1 == h2
    arr2 = arr.copy()
    arr2[0, 0, 0] = True
    assert mask_hash(mask_of(arr2)) != h1
    sdf = signed_distance(m)
    assert sdf.source_hash == h1
    assert sdf.transform == "edt-exact/offset0.5"
