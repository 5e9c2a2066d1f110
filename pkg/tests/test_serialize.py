import numpy as np
import pytest

from sdph.classify import ForbiddenQuadrant
from sdph.cubical import PAIR_DTYPE, Diagram
from sdph.grid import InputError
from sdph.serialize import (
    diagram_from_csv,
    diagram_from_json,
    diagram_to_csv,
    diagram_to_json,
    load_diagram,
)


def diagram_of(dim_pairs, dims=(8, 8, 8)):
    data = {}
    for d, pairs in dim_pairs.items():
        arr = np.empty(len(pairs), dtype=PAIR_DTYPE)
        for i, row in enumerate(pairs):
            arr[i] = row if len(row) == 6 else (*row, -1, -1, -1, -1)
        data[d] = arr
    return Diagram(dims, 1.0, data, {"source_hash": "00ff", "transform": "t"})


def test_csv_header_and_literals():
    dgm = diagram_of({0: [(-2.0, np.inf)], 2: [(-3.0, 10.0)]})
    text = diagram_to_csv(dgm)
    lines = text.strip().splitlines()
    assert lines[0] == "dim,birth,death,type,bx,by,bz,dx,dy,dz"
    assert "0,-2.0,inf,ESS,-1,-1,-1,-1,-1,-1" in lines
    assert "2,-3.0,10.0,VI,-1,-1,-1,-1,-1,-1" in lines


def test_csv_roundtrip_values_bitexact():
    rng = np.random.default_rng(8)
    pairs = []
    for _ in range(20):
        b = float(rng.standard_normal()) * 3.7
        pairs.append((b, b + abs(float(rng.standard_normal())) + 1e-6))
    dgm = diagram_of({1: [(min(b, -0.1), d) for b, d in pairs]})
    back = diagram_from_csv(diagram_to_csv(dgm))
    assert back.value_multiset(1) == dgm.value_multiset(1)


def test_csv_voxel_coords_roundtrip_with_dims():
    dims = (5, 6, 7)
    vox = 3 + 5 * (2 + 6 * 4)  # (3, 2, 4)
    dgm = diagram_of({0: [(-1.0, np.inf, -1, -1, vox, -1)]}, dims=dims)
    text = diagram_to_csv(dgm)
    assert "0,-1.0,inf,ESS,3,2,4,-1,-1,-1" in text
    back = diagram_from_csv(text, dims=dims)
    assert back.data[0]["birth_vox"][0] == vox


def test_csv_rejects_garbage():
    with pytest.raises(InputError, match="header"):
        diagram_from_csv("not,a,diagram\n")
    with pytest.raises(InputError, match="bad row"):
        diagram_from_csv("dim,birth,death,type,bx,by,bz,dx,dy,dz\n0,1,2\n")


def test_strict_type_column():
    dgm = diagram_of({0: [(0.5, 2.0)]})  # forbidden for an SDPH diagram
    with pytest.raises(ForbiddenQuadrant):
        diagram_to_csv(dgm)
    text = diagram_to_csv(dgm, strict=False)
    assert ",NA," in text


def test_json_roundtrip_with_metadata():
    dgm = diagram_of({0: [(-2.0, np.inf)], 1: [(-1.0, 2.5)]})
    text = diagram_to_json(dgm, extra_metadata={"provenance": {"k": 1}})
    back = diagram_from_json(text)
    assert back.dims == dgm.dims
    assert back.spacing == dgm.spacing
    for d in (0, 1, 2):
        assert back.value_multiset(d) == dgm.value_multiset(d)
    assert back.metadata["source_hash"] == "00ff"
    assert back.metadata["provenance"] == {"k": 1}


def test_json_rejects_garbage():
    with pytest.raises(InputError):
        diagram_from_json("{not json")
    with pytest.raises(InputError):
        diagram_from_json("{}")


def test_load_diagram_dispatches_on_suffix(tmp_path):
    dgm = diagram_of({1: [(-1.0, 2.0)]})
    (tmp_path / "d.csv").write_text(diagram_to_csv(dgm))
    (tmp_path / "d.json").write_text(diagram_to_json(dgm))
    assert load_diagram(tmp_path / "d.csv").value_multiset(1) == dgm.value_multiset(1)
    assert load_diagram(tmp_path / "d.json").value_multiset(1) == dgm.value_multiset(1)
    with pytest.raises(InputError):
        load_diagram(tmp_path / "missing.json")


def test_pipeline_csv_json_consistency(cache):
    run = cache.shape_run("shell(10,16)")
    from_csv = load_diagram(run["out"] / "diagram.csv")
    from_json = load_diagram(run["out"] / "diagram.json")
    for d in (0, 1, 2):
        assert from_csv.value_multiset(d) == from_json.value_multiset(d)
        assert from_csv.value_multiset(d) == run["diagram"].value_multiset(d)
