"""Dense 3D grid containers and file I/O.

Conventions shared by every module in the package:

* Voxel centers sit at integer coordinates ``(x, y, z)`` with
  ``0 <= x < nx`` etc.; one voxel has physical edge length ``spacing``.
* The canonical linear order of voxels is x-fastest:
  ``index = x + nx * (y + ny * z)``.
* Fields are stored as float64 arrays of shape ``(nx, ny, nz)``;
  masks as packed bits in the canonical linear order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "GridDims",
    "ScalarField",
    "BinaryMask",
    "InputError",
    "load_field",
    "save_field",
    "load_mask",
    "save_mask",
    "threshold_mask",
    "close_boundary",
]

# Refuse volumes that cannot be addressed comfortably in memory.
_MAX_VOXELS = 2**34

_ACCEPTED_DTYPES = {
    np.dtype("u1"),
    np.dtype("i1"),
    np.dtype("<f4"),
    np.dtype("<f8"),
}


class InputError(ValueError):
    """Malformed or unusable external input (files, headers, parameters)."""


@dataclass(frozen=True)
class GridDims:
    """Voxel counts per axis plus the physical edge length of one voxel."""

    nx: int
    ny: int
    nz: int
    spacing: float = 1.0

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            n = getattr(self, name)
            if not isinstance(n, (int, np.integer)) or n < 1:
                raise InputError(f"{name} must be a positive integer, got {n!r}")
        if not (self.spacing > 0):
            raise InputError(f"spacing must be > 0, got {self.spacing!r}")
        if self.n_voxels > _MAX_VOXELS:
            raise InputError(
                f"voxel count {self.n_voxels} exceeds addressable limit {_MAX_VOXELS}"
            )

    @property
    def shape(self) -> tuple[int, int, int]:
        return (int(self.nx), int(self.ny), int(self.nz))

    @property
    def n_voxels(self) -> int:
        return int(self.nx) * int(self.ny) * int(self.nz)

    def linear_index(self, x: int, y: int, z: int) -> int:
        return int(x) + self.nx * (int(y) + self.ny * int(z))


@dataclass(frozen=True)
class ScalarField:
    """A finite float64 value per voxel.

    ``values[x, y, z]`` has shape ``dims.shape``; the array is frozen after
    construction so fields can be shared freely between threads.
    """

    dims: GridDims
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.dims.shape:
            raise InputError(f"values shape {v.shape} != dims {self.dims.shape}")
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v.ravel(order="F")))[0])
            raise InputError(f"non-finite value at linear index {bad}")
        v = v.copy() if v is self.values or not v.flags.owndata else v
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def ravel(self) -> np.ndarray:
        """Values in the canonical x-fastest linear order."""
        return self.values.ravel(order="F")


@dataclass(frozen=True)
class BinaryMask:
    """Voxel occupancy: bit 1 = foreground (the shape), bit 0 = background.

    Bits are packed in the canonical linear order; use :meth:`as_array`
    for a dense boolean view.
    """

    dims: GridDims
    bits: np.ndarray = field(repr=False)  # packed uint8, np.packbits layout

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        expected = (self.dims.n_voxels + 7) // 8
        if b.ndim != 1 or b.size != expected:
            raise InputError(f"packed bits size {b.size} != expected {expected}")
        b = b.copy() if not b.flags.owndata else b
        b.flags.writeable = False
        object.__setattr__(self, "bits", b)

    @classmethod
    def from_array(cls, dims: GridDims, arr: np.ndarray) -> "BinaryMask":
        a = np.asarray(arr)
        if a.shape != dims.shape:
            raise InputError(f"mask shape {a.shape} != dims {dims.shape}")
        flat = (a != 0).ravel(order="F")
        return cls(dims, np.packbits(flat))

    def as_array(self) -> np.ndarray:
        flat = np.unpackbits(self.bits, count=self.dims.n_voxels).astype(bool)
        return flat.reshape(self.dims.shape, order="F")

    def count_foreground(self) -> int:
        flat = np.unpackbits(self.bits, count=self.dims.n_voxels)
        return int(flat.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.bits, other.bits)


# ---------------------------------------------------------------------------
# File I/O
#
# NPY: v1.0 container, little-endian, C-order, dtype in {u1, i1, f4, f8}.
# Raw: headerless binary in canonical x-fastest order + JSON sidecar
#      {nx, ny, nz, dtype, spacing} at <path>.json.
# ---------------------------------------------------------------------------


def _sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def _read_sidecar(path) -> dict | None:
    sc = _sidecar_path(path)
    if not sc.exists():
        return None
    try:
        return json.loads(sc.read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"malformed sidecar {sc}: {e}") from e


def _check_payload(arr: np.ndarray, origin: str) -> np.ndarray:
    if arr.ndim != 3:
        raise InputError(f"{origin}: expected a 3D array, got ndim={arr.ndim}")
    if arr.dtype not in _ACCEPTED_DTYPES:
        raise InputError(f"{origin}: unsupported dtype {arr.dtype}, accept u1/i1/f4/f8")
    vals = arr.astype(np.float64)
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals.ravel(order="F")))[0])
        raise InputError(f"{origin}: NaN/Inf at linear index {bad}")
    return vals


def load_field(path, format: str = "auto") -> ScalarField:
    """Load a 3D scalar field from an NPY file or raw+sidecar pair.

    Values are widened to float64; dims come from the header (NPY) or the
    sidecar (raw); spacing comes from the sidecar when present, else 1.0.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    fmt = format
    if fmt == "auto":
        fmt = "npy" if path.suffix == ".npy" else "raw"
    if fmt == "npy":
        try:
            arr = np.load(path, allow_pickle=False)
        except Exception as e:
            raise InputError(f"{path}: malformed NPY ({e})") from e
        vals = _check_payload(arr, str(path))
        spacing = 1.0
        sc = _read_sidecar(path)
        if sc and "spacing" in sc:
            spacing = float(sc["spacing"])
        nx, ny, nz = arr.shape
        return ScalarField(GridDims(nx, ny, nz, spacing), vals)
    if fmt == "raw":
        sc = _read_sidecar(path)
        if sc is None:
            raise InputError(f"raw format requires sidecar {_sidecar_path(path)}")
        try:
            nx, ny, nz = int(sc["nx"]), int(sc["ny"]), int(sc["nz"])
            dtype = np.dtype(sc["dtype"])
            spacing = float(sc.get("spacing", 1.0))
        except (KeyError, TypeError) as e:
            raise InputError(f"sidecar missing field: {e}") from e
        if dtype not in _ACCEPTED_DTYPES:
            raise InputError(f"sidecar dtype {dtype} unsupported")
        raw = np.fromfile(path, dtype=dtype)
        if raw.size != nx * ny * nz:
            raise InputError(
                f"{path}: payload has {raw.size} items, sidecar says {nx * ny * nz}"
            )
        arr = raw.reshape((nx, ny, nz), order="F")
        vals = _check_payload(arr, str(path))
        return ScalarField(GridDims(nx, ny, nz, spacing), vals)
    raise InputError(f"unknown format {format!r}")


def save_field(fld: ScalarField, path, format: str = "auto") -> None:
    """Write a field so that :func:`load_field` inverts it bit-exactly."""
    path = Path(path)
    fmt = format
    if fmt == "auto":
        fmt = "npy" if path.suffix == ".npy" else "raw"
    if fmt == "npy":
        np.save(path, np.ascontiguousarray(fld.values, dtype="<f8"))
        if fld.dims.spacing != 1.0:
            _sidecar_path(path).write_text(
                json.dumps({"spacing": fld.dims.spacing}) + "\n"
            )
        return
    if fmt == "raw":
        fld.ravel().astype("<f8").tofile(path)
        meta = {
            "nx": fld.dims.nx,
            "ny": fld.dims.ny,
            "nz": fld.dims.nz,
            "dtype": "<f8",
            "spacing": fld.dims.spacing,
        }
        _sidecar_path(path).write_text(json.dumps(meta, sort_keys=True) + "\n")
        return
    raise InputError(f"unknown format {format!r}")


def load_mask(path) -> BinaryMask:
    """Load a mask from an NPY/raw file holding 0/1 voxel values."""
    fld = load_field(path)
    uniq = np.unique(fld.values)
    if not np.all(np.isin(uniq, (0.0, 1.0))):
        raise InputError(f"{path}: mask file must contain only 0/1 values")
    return BinaryMask.from_array(fld.dims, fld.values != 0.0)


def save_mask(mask: BinaryMask, path, format: str = "auto") -> None:
    path = Path(path)
    fmt = format
    if fmt == "auto":
        fmt = "npy" if path.suffix == ".npy" else "raw"
    arr = mask.as_array().astype(np.uint8)
    if fmt == "npy":
        np.save(path, np.ascontiguousarray(arr))
        return
    if fmt == "raw":
        arr.ravel(order="F").tofile(path)
        meta = {
            "nx": mask.dims.nx,
            "ny": mask.dims.ny,
            "nz": mask.dims.nz,
            "dtype": "u1",
            "spacing": mask.dims.spacing,
        }
        _sidecar_path(path).write_text(json.dumps(meta, sort_keys=True) + "\n")
        return
    raise InputError(f"unknown format {format!r}")


# ---------------------------------------------------------------------------
# Mask construction
# ---------------------------------------------------------------------------


def threshold_mask(fld: ScalarField, level: float, keep: str = "above_or_equal") -> BinaryMask:
    """Bit = 1 where the predicate holds: value >= level, or value < level."""
    if keep == "above_or_equal":
        sel = fld.values >= level
    elif keep == "below":
        sel = fld.values < level
    else:
        raise InputError(f"keep must be 'above_or_equal' or 'below', got {keep!r}")
    return BinaryMask.from_array(fld.dims, sel)


def close_boundary(mask: BinaryMask, width: int) -> BinaryMask:
    """Force every voxel within `width` of the domain wall to background.

    Guarantees the discrete surface stays closed inside the grid so no
    feature touches the domain boundary. Idempotent for fixed width.
    """
    width = int(width)
    if width < 1:
        raise InputError(f"width must be >= 1, got {width}")
    d = mask.dims
    if 2 * width >= min(d.nx, d.ny, d.nz):
        raise InputError(
            f"width {width} too large for dims {d.shape}: need 2*width < min(dims)"
        )
    arr = mask.as_array().copy()
    arr[:width, :, :] = False
    arr[-width:, :, :] = False
    arr[:, :width, :] = False
    arr[:, -width:, :] = False
    arr[:, :, :width] = False
    arr[:, :, -width:] = False
    return BinaryMask.from_array(d, arr)
