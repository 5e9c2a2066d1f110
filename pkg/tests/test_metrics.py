import numpy as np
import pytest
from oracles import bottleneck_by_enumeration

import sdph.metrics as metrics
from sdph.cubical import PAIR_DTYPE, Diagram, build_filtration, compute_persistence
from sdph.grid import GridDims, ScalarField
from sdph.metrics import DIAGONAL, bottleneck, density_scores


def diagram_of(dim_pairs, dims=(8, 8, 8)):
    data = {}
    for d, pairs in dim_pairs.items():
        arr = np.empty(len(pairs), dtype=PAIR_DTYPE)
        for i, (b, dd) in enumerate(pairs):
            arr[i] = (b, dd, -1, -1, -1, -1)
        data[d] = arr
    return Diagram(dims, 1.0, data, {})


def random_pairs(rng, n, lo=-3.0, hi=3.0):
    out = []
    for _ in range(n):
        b = round(float(rng.uniform(lo, hi)), 2)
        out.append((b, round(b + float(rng.uniform(0.05, 4.0)), 2)))
    return out


# ---------------------------------------------------------------------------
# exactness
# ---------------------------------------------------------------------------


def test_identical_diagrams_zero():
    d = diagram_of({1: [(0.0, 1.0), (-2.0, 0.5)]})
    r = bottleneck(d, d, 1)
    assert r.distance == 0.0
    assert set(r.matching) == {(0, 0), (1, 1)}


def test_single_point_to_diagonal():
    r = bottleneck(diagram_of({0: [(0.0, 2.0)]}), diagram_of({}), 0)
    assert r.distance == 1.0
    assert r.matching == ((0, DIAGONAL),)
    assert (r.n1, r.n2) == (1, 0)


def test_two_point_shift():
    r = bottleneck(diagram_of({0: [(0.0, 4.0)]}), diagram_of({0: [(0.5, 3.5)]}), 0)
    assert r.distance == 0.5


@pytest.mark.parametrize("seed", range(25))
def test_against_enumeration_oracle(seed):
    rng = np.random.default_rng(seed)
    p1 = random_pairs(rng, int(rng.integers(0, 5)))
    p2 = random_pairs(rng, int(rng.integers(0, 5)))
    got = bottleneck(diagram_of({1: p1}), diagram_of({1: p2}), 1).distance
    want = bottleneck_by_enumeration(p1, p2)
    assert got == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_large_mode_matches_exact_mode(seed, monkeypatch):
    rng = np.random.default_rng(1000 + seed)
    p1 = random_pairs(rng, 12)
    p2 = random_pairs(rng, 11)
    d1, d2 = diagram_of({1: p1}), diagram_of({1: p2})
    exact = bottleneck(d1, d2, 1).distance
    monkeypatch.setattr(metrics, "_EXACT_CANDIDATE_LIMIT", 0)
    approx = bottleneck(d1, d2, 1).distance
    assert approx == pytest.approx(exact, rel=1e-9, abs=1e-11)


def test_matching_is_a_valid_witness(rng):
    d1 = diagram_of({1: random_pairs(rng, 6)})
    d2 = diagram_of({1: random_pairs(rng, 5)})
    # matching indices refer to the canonically sorted pair arrays
    p1 = d1.value_multiset(1)
    p2 = d2.value_multiset(1)
    r = bottleneck(d1, d2, 1)
    seen1, seen2 = set(), set()
    worst = 0.0
    for i, j in r.matching:
        if i != DIAGONAL:
            assert i not in seen1
            seen1.add(i)
        if j != DIAGONAL:
            assert j not in seen2
            seen2.add(j)
        if i != DIAGONAL and j != DIAGONAL:
            worst = max(
                worst,
                max(abs(p1[i][0] - p2[j][0]), abs(p1[i][1] - p2[j][1])),
            )
        elif i != DIAGONAL:
            worst = max(worst, (p1[i][1] - p1[i][0]) / 2)
        else:
            worst = max(worst, (p2[j][1] - p2[j][0]) / 2)
    assert seen1 == set(range(6)) and seen2 == set(range(5))
    # the witness realizes the distance exactly: it is feasible at its own
    # max cost, and no cheaper matching exists below the reported optimum
    assert worst == pytest.approx(r.distance, abs=1e-12)


# ---------------------------------------------------------------------------
# metric axioms
# ---------------------------------------------------------------------------


def test_symmetry_exact(rng):
    for _ in range(10):
        d1 = diagram_of({1: random_pairs(rng, int(rng.integers(0, 6)))})
        d2 = diagram_of({1: random_pairs(rng, int(rng.integers(0, 6)))})
        assert bottleneck(d1, d2, 1).distance == bottleneck(d2, d1, 1).distance


def test_triangle_inequality(rng):
    for _ in range(10):
        ds = [diagram_of({1: random_pairs(rng, int(rng.integers(1, 5)))}) for _ in range(3)]
        ab = bottleneck(ds[0], ds[1], 1).distance
        bc = bottleneck(ds[1], ds[2], 1).distance
        ac = bottleneck(ds[0], ds[2], 1).distance
        assert ac <= ab + bc + 1e-9


# ---------------------------------------------------------------------------
# essential pairs
# ---------------------------------------------------------------------------


def test_essential_matched_by_birth():
    d1 = diagram_of({0: [(-5.0, np.inf), (-1.0, 2.0)]})
    d2 = diagram_of({0: [(-4.0, np.inf), (-1.0, 2.0)]})
    r = bottleneck(d1, d2, 0)
    assert r.distance == 1.0  # inf - inf = 0, births differ by 1


def test_unequal_essential_counts_infinite():
    d1 = diagram_of({0: [(-5.0, np.inf)]})
    d2 = diagram_of({0: [(-5.0, np.inf), (-3.0, np.inf)]})
    r = bottleneck(d1, d2, 0)
    assert np.isinf(r.distance)
    assert r.matching == ()


def test_multiple_essentials_sorted_matching():
    d1 = diagram_of({0: [(-5.0, np.inf), (-1.0, np.inf)]})
    d2 = diagram_of({0: [(-4.5, np.inf), (-0.2, np.inf)]})
    assert bottleneck(d1, d2, 0).distance == pytest.approx(0.8)


# ---------------------------------------------------------------------------
# stability harness
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("eps", [0.1, 0.3])
def test_stability_bound_small_fields(eps):
    rng = np.random.default_rng(55)
    for seed in range(5):
        vals = rng.standard_normal((12, 12, 12))
        fld = ScalarField(GridDims(12, 12, 12), vals)
        eta = rng.uniform(-eps, eps, size=vals.shape)
        pert = ScalarField(fld.dims, vals + eta)
        d1 = compute_persistence(build_filtration(fld))
        d2 = compute_persistence(build_filtration(pert))
        for k in (0, 1, 2):
            assert bottleneck(d1, d2, k).distance <= eps + 1e-9


@pytest.mark.slow
@pytest.mark.parametrize("eps", [0.1, 0.3])
def test_stability_bound_twenty_grf_fields(eps):
    from sdph.synth import GrfSpec, sample_grf

    for seed in range(20):
        fld = sample_grf(GrfSpec(GridDims(32, 32, 32), 1.0, (6.0, 6.0, 6.0), seed=seed))
        rng = np.random.default_rng(77_000 + seed)
        eta = rng.uniform(-eps, eps, size=fld.values.shape)
        pert = ScalarField(fld.dims, fld.values + eta)
        d1 = compute_persistence(build_filtration(fld))
        d2 = compute_persistence(build_filtration(pert))
        for k in (0, 1, 2):
            assert bottleneck(d1, d2, k).distance <= eps + 1e-9, (seed, k)


# ---------------------------------------------------------------------------
# density scores
# ---------------------------------------------------------------------------


def test_density_single_pair_scores_one():
    d = diagram_of({1: [(0.0, 1.0)]})
    assert density_scores(d, 1, 0.5).tolist() == [1.0]


def test_density_coincident_pairs():
    d = diagram_of({1: [(0.0, 1.0), (0.0, 1.0)]})
    assert np.allclose(density_scores(d, 1, 0.5), 2.0)


def test_density_at_sigma_separation():
    d = diagram_of({1: [(0.0, 1.0), (0.5, 1.0)]})
    s = density_scores(d, 1, 0.5)
    assert np.allclose(s, 1.0 + np.exp(-0.5))


def test_density_ignores_essentials_and_validates_sigma():
    d = diagram_of({0: [(-2.0, np.inf), (-1.0, 1.0)]})
    assert density_scores(d, 0, 0.5).shape == (1,)
    with pytest.raises(ValueError):
        density_scores(d, 0, 0.0)
