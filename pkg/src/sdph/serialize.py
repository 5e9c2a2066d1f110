"""Diagram and summary serialization.

CSV (one row per pair, canonical order, lossless values):

    dim,birth,death,type,bx,by,bz,dx,dy,dz

`death` is the literal ``inf`` for essential pairs; coordinates are the
generating voxel indices of the birth/death cells, ``-1`` when absent.
Floats are written with ``repr`` so parsing them back is bit-exact.

JSON carries the same rows plus dims, spacing and the full metadata dict,
making it the lossless interchange format.

Types are quadrant classifications; diagrams of fields that are not signed
distances can contain unclassifiable pairs, written as ``NA`` when
``strict=False`` (the default raises, matching pipeline semantics).
"""

from __future__ import annotations

import json

import numpy as np

from .classify import ForbiddenQuadrant, PairType, classify_values
from .cubical import PAIR_DTYPE, Diagram
from .grid import InputError

__all__ = [
    "diagram_to_csv",
    "diagram_from_csv",
    "diagram_to_json",
    "diagram_from_json",
    "load_diagram",
]

_CSV_HEADER = "dim,birth,death,type,bx,by,bz,dx,dy,dz"


def _type_label(dim: int, birth: float, death: float, strict: bool) -> str:
    try:
        return classify_values(dim, birth, death).label
    except (ForbiddenQuadrant, ValueError):
        if strict:
            raise
        return "NA"


def _fmt(v: float) -> str:
    return "inf" if np.isinf(v) else repr(float(v))


def _vox(lin: int, dims) -> tuple[int, int, int]:
    if lin < 0:
        return (-1, -1, -1)
    nx, ny, _ = dims
    return (int(lin % nx), int((lin // nx) % ny), int(lin // (nx * ny)))


def diagram_to_csv(dgm: Diagram, strict: bool = True) -> str:
    lines = [_CSV_HEADER]
    for d in (0, 1, 2):
        for row in dgm.data[d]:
            b, dd = float(row["birth"]), float(row["death"])
            t = _type_label(d, b, dd, strict)
            bx, by, bz = _vox(int(row["birth_vox"]), dgm.dims)
            dx, dy, dz = _vox(int(row["death_vox"]), dgm.dims)
            lines.append(
                f"{d},{_fmt(b)},{_fmt(dd)},{t},{bx},{by},{bz},{dx},{dy},{dz}"
            )
    return "\n".join(lines) + "\n"


def diagram_from_csv(text: str, dims=None, spacing: float = 1.0) -> Diagram:
    """Rebuild a diagram from CSV. Voxel coordinates are kept only when
    `dims` is supplied (the CSV itself does not carry the grid shape)."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0] != _CSV_HEADER:
        raise InputError("diagram CSV: missing or wrong header")
    rows: dict[int, list] = {0: [], 1: [], 2: []}
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 10:
            raise InputError(f"diagram CSV: bad row {ln!r}")
        d = int(parts[0])
        b = float(parts[1])
        dd = float("inf") if parts[2] == "inf" else float(parts[2])
        bx, by, bz, dx, dy, dz = (int(p) for p in parts[4:10])
        if dims is not None and bx >= 0:
            bvox = bx + dims[0] * (by + dims[1] * bz)
        else:
            bvox = -1
        if dims is not None and dx >= 0:
            dvox = dx + dims[0] * (dy + dims[1] * dz)
        else:
            dvox = -1
        rows[d].append((b, dd, -1, -1, bvox, dvox))
    data = {}
    for d, lst in rows.items():
        arr = np.empty(len(lst), dtype=PAIR_DTYPE)
        for i, r in enumerate(lst):
            arr[i] = r
        data[d] = arr
    dims = tuple(dims) if dims is not None else (0, 0, 0)
    return Diagram(dims, spacing, data, {"from_csv": True})


def diagram_to_json(dgm: Diagram, strict: bool = True, extra_metadata: dict | None = None) -> str:
    pairs = {}
    for d in (0, 1, 2):
        items = []
        for row in dgm.data[d]:
            b, dd = float(row["birth"]), float(row["death"])
            items.append(
                {
                    "birth": b,
                    "death": "inf" if np.isinf(dd) else dd,
                    "type": _type_label(d, b, dd, strict),
                    "birth_voxel": list(_vox(int(row["birth_vox"]), dgm.dims)),
                    "death_voxel": list(_vox(int(row["death_vox"]), dgm.dims)),
                }
            )
        pairs[str(d)] = items
    meta = dict(dgm.metadata)
    if extra_metadata:
        meta.update(extra_metadata)
    meta.pop("analytic", None)
    doc = {
        "dims": list(dgm.dims),
        "spacing": dgm.spacing,
        "metadata": _jsonable(meta),
        "pairs": pairs,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, PairType):
        return obj.label
    return obj


def diagram_from_json(text: str) -> Diagram:
    try:
        doc = json.loads(text)
        dims = tuple(int(v) for v in doc["dims"])
        spacing = float(doc["spacing"])
        pairs = doc["pairs"]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise InputError(f"diagram JSON: {e}") from e
    data = {}
    for d in (0, 1, 2):
        items = pairs.get(str(d), [])
        arr = np.empty(len(items), dtype=PAIR_DTYPE)
        for i, it in enumerate(items):
            b = float(it["birth"])
            dd = float("inf") if it["death"] == "inf" else float(it["death"])
            bv = it.get("birth_voxel", [-1, -1, -1])
            dv = it.get("death_voxel", [-1, -1, -1])
            if dims != (0, 0, 0) and bv[0] >= 0:
                bvox = bv[0] + dims[0] * (bv[1] + dims[1] * bv[2])
            else:
                bvox = -1
            if dims != (0, 0, 0) and dv[0] >= 0:
                dvox = dv[0] + dims[0] * (dv[1] + dims[1] * dv[2])
            else:
                dvox = -1
            arr[i] = (b, dd, -1, -1, bvox, dvox)
        data[d] = arr
    return Diagram(dims, spacing, data, doc.get("metadata", {}))


def load_diagram(path) -> Diagram:
    """Load a diagram from a .json or .csv file."""
    from pathlib import Path

    p = Path(path)
    if not p.exists():
        raise InputError(f"no such file: {p}")
    text = p.read_text()
    if p.suffix == ".json":
        return diagram_from_json(text)
    return diagram_from_csv(text)
