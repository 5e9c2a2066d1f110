"""Synthetic inputs: Gaussian random fields and analytic solids.

The random fields use the squared-exponential (Gaussian) covariance
C(h) = sigma^2 * exp(-(pi/4) * ||A h||^2) with A = diag(1/l1, 1/l2, 1/l3) @ R,
sampled by spectral synthesis on the periodic grid: the circulant covariance
has eigenvalues FFT(C), so filtering white noise by sqrt of the spectrum
gives an exact draw from the periodized model. For the lengthscales used
here the periodization bias is far below floating point noise.

The analytic solids (ball, spherical shell, two balls, solid torus) have
signed distance diagrams that can be derived in closed form, which makes
them end-to-end oracles for the whole pipeline.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cubical import PAIR_DTYPE, Diagram
from .grid import BinaryMask, GridDims, ScalarField

__all__ = [
    "GrfSpec",
    "sample_grf",
    "grf_preset",
    "GRF_PRESETS",
    "Ball",
    "Shell",
    "TwoBalls",
    "Torus",
    "AnalyticShape",
    "rasterize",
    "expected_diagram",
]


@dataclass(frozen=True)
class GrfSpec:
    """Covariance parameters of the squared-exponential model."""

    dims: GridDims
    variance: float = 1.0
    lengthscales: tuple[float, float, float] = (8.0, 8.0, 8.0)
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    seed: int = 0

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError(f"variance must be > 0, got {self.variance}")
        if any(l <= 0 for l in self.lengthscales):
            raise ValueError(f"lengthscales must be > 0, got {self.lengthscales}")
        R = np.asarray(self.rotation, dtype=np.float64)
        if R.shape != (3, 3) or not np.allclose(R.T @ R, np.eye(3), atol=1e-9):
            raise ValueError("rotation must be a 3x3 orthonormal matrix (1e-9)")
        object.__setattr__(self, "rotation", R)

    def anisotropy(self) -> np.ndarray:
        return np.diag(1.0 / np.asarray(self.lengthscales)) @ self.rotation


def _signed_min_image(n: int) -> np.ndarray:
    """Signed periodic lags: 0, 1, ..., n//2, -(n - n//2 - 1), ..., -1."""
    h = np.arange(n, dtype=np.float64)
    h[h > n / 2] -= n
    return h


def _spectrum(spec: GrfSpec) -> np.ndarray:
    nx, ny, nz = spec.dims.shape
    hx = _signed_min_image(nx)[:, None, None]
    hy = _signed_min_image(ny)[None, :, None]
    hz = _signed_min_image(nz)[None, None, :]
    M = spec.anisotropy()
    M = M.T @ M
    r2 = (
        M[0, 0] * hx**2
        + M[1, 1] * hy**2
        + M[2, 2] * hz**2
        + 2 * (M[0, 1] * hx * hy + M[0, 2] * hx * hz + M[1, 2] * hy * hz)
    )
    cov = spec.variance * np.exp(-(np.pi / 4.0) * r2)
    return np.fft.fftn(cov).real


def _clip_spectrum(lam: np.ndarray) -> tuple[np.ndarray, float]:
    """Zero out negative eigenvalues; report the clipped mass fraction."""
    neg = lam < 0
    total = float(np.abs(lam).sum())
    clipped = float(np.abs(lam[neg]).sum())
    fraction = clipped / total if total > 0 else 0.0
    if fraction > 0.01:
        raise ValueError(
            f"covariance spectrum clipped by {fraction:.1%} (> 1%); "
            "the model does not fit the periodic domain"
        )
    out = lam.copy()
    out[neg] = 0.0
    return out, fraction


def sample_grf(spec: GrfSpec) -> ScalarField:
    """One realization of the field; deterministic given the seed."""
    if max(spec.lengthscales) > min(spec.dims.shape) / 4:
        warnings.warn(
            "lengthscale exceeds a quarter of the domain; periodization bias "
            "may be noticeable",
            stacklevel=2,
        )
    lam, _ = _clip_spectrum(_spectrum(spec))
    rng = np.random.default_rng(spec.seed)
    white = rng.standard_normal(spec.dims.shape)
    f = np.fft.ifftn(np.sqrt(lam) * np.fft.fftn(white)).real
    return ScalarField(spec.dims, np.ascontiguousarray(f))


GRF_PRESETS = {
    "F1": (8.0, 8.0, 8.0),
    "F2": (8.0, 8.0 * 0.7, 8.0 * 0.85),
    "F3": (5.0, 5.0, 5.0),
}
_PRESET_DIMS = (100, 100, 100)


def grf_preset(name: str, seed: int = 0) -> ScalarField:
    """The five reference fields on a 100^3 domain with unit variance.

    F1: isotropic lengthscale 8; F2: anisotropic (8, 5.6, 6.8);
    F3: isotropic 5; F4 = F3 - 0.5 (same seed); F5 = F1(seed) + F3(seed+1).
    """
    dims = GridDims(*_PRESET_DIMS)
    name = name.upper()
    if name in GRF_PRESETS:
        return sample_grf(GrfSpec(dims, 1.0, GRF_PRESETS[name], seed=seed))
    if name == "F4":
        base = grf_preset("F3", seed)
        return ScalarField(dims, base.values - 0.5)
    if name == "F5":
        a = grf_preset("F1", seed)
        b = grf_preset("F3", seed + 1)
        return ScalarField(dims, a.values + b.values)
    raise ValueError(f"unknown preset {name!r}; choose F1..F5")


# ---------------------------------------------------------------------------
# Analytic shapes
#
# All parameters are in voxel units; shapes are centered on the grid center
# ((n-1)/2 per axis) unless a center is given. `margin` is the boundary
# closing width the shape must clear.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _ShapeBase:
    dims: GridDims
    margin: int = 3

    def _center(self) -> np.ndarray:
        # integer center: a voxel sits exactly at the deepest point of a
        # centered solid, so diagram endpoints track the continuum values
        # (for odd sides this is also the exact geometric center)
        n = self.dims.shape
        return np.asarray([n[0] // 2, n[1] // 2, n[2] // 2], dtype=np.float64)

    def _check_extent(self, extent: float):
        if extent + 2 * self.margin >= min(self.dims.shape):
            raise ValueError(
                f"shape extent {extent} plus closing margin {self.margin} does "
                f"not fit a {self.dims.shape} grid"
            )

    def _radii(self) -> np.ndarray:
        n = self.dims.shape
        c = self._center()
        x = (np.arange(n[0]) - c[0])[:, None, None]
        y = (np.arange(n[1]) - c[1])[None, :, None]
        z = (np.arange(n[2]) - c[2])[None, None, :]
        return np.sqrt(x**2 + y**2 + z**2)


@dataclass(frozen=True)
class Ball(_ShapeBase):
    radius: float = 20.0

    def occupancy(self) -> np.ndarray:
        self._check_extent(2 * self.radius)
        return self._radii() <= self.radius


@dataclass(frozen=True)
class Shell(_ShapeBase):
    r_inner: float = 10.0
    r_outer: float = 16.0

    def occupancy(self) -> np.ndarray:
        if not 0 < self.r_inner < self.r_outer:
            raise ValueError("need 0 < r_inner < r_outer")
        self._check_extent(2 * self.r_outer)
        r = self._radii()
        return (self.r_inner <= r) & (r <= self.r_outer)


@dataclass(frozen=True)
class TwoBalls(_ShapeBase):
    r1: float = 10.0
    r2: float = 10.0
    separation: float = 34.0  # distance between the two centers, along x

    def occupancy(self) -> np.ndarray:
        if self.separation <= self.r1 + self.r2:
            raise ValueError("balls must be disjoint: separation > r1 + r2")
        self._check_extent(self.separation + self.r1 + self.r2)
        n = self.dims.shape
        c = self._center()
        c1 = c - np.array([self.separation / 2.0, 0, 0])
        c2 = c + np.array([self.separation / 2.0, 0, 0])
        x = np.arange(n[0], dtype=np.float64)[:, None, None]
        y = np.arange(n[1], dtype=np.float64)[None, :, None]
        z = np.arange(n[2], dtype=np.float64)[None, None, :]
        d1 = np.sqrt((x - c1[0]) ** 2 + (y - c1[1]) ** 2 + (z - c1[2]) ** 2)
        d2 = np.sqrt((x - c2[0]) ** 2 + (y - c2[1]) ** 2 + (z - c2[2]) ** 2)
        return (d1 <= self.r1) | (d2 <= self.r2)


@dataclass(frozen=True)
class Torus(_ShapeBase):
    r_major: float = 16.0
    r_minor: float = 6.0  # tube radius; core circle lies in the z-plane

    def occupancy(self) -> np.ndarray:
        if not 0 < self.r_minor < self.r_major:
            raise ValueError("need 0 < r_minor < r_major")
        self._check_extent(2 * (self.r_major + self.r_minor))
        n = self.dims.shape
        c = self._center()
        x = (np.arange(n[0]) - c[0])[:, None, None]
        y = (np.arange(n[1]) - c[1])[None, :, None]
        z = (np.arange(n[2]) - c[2])[None, None, :]
        ring = np.sqrt(x**2 + y**2) - self.r_major
        return ring**2 + z**2 <= self.r_minor**2


AnalyticShape = Ball | Shell | TwoBalls | Torus


def rasterize(shape: AnalyticShape) -> BinaryMask:
    """Voxel bit = 1 iff the voxel center lies inside the continuum solid."""
    return BinaryMask.from_array(shape.dims, shape.occupancy())


def _values_only_diagram(dims: GridDims, entries: list[tuple[int, float, float]]) -> Diagram:
    data: dict[int, list] = {0: [], 1: [], 2: []}
    for d, b, dd in entries:
        data[d].append((b, dd, -1, -1, -1, -1))
    arrays = {}
    for d, rows in data.items():
        arr = np.empty(len(rows), dtype=PAIR_DTYPE)
        for i, row in enumerate(rows):
            arr[i] = row
        arrays[d] = arr
    return Diagram(dims.shape, dims.spacing, arrays, {"analytic": True})


def expected_diagram(shape: AnalyticShape) -> Diagram:
    """Continuum signed-distance diagram of the solid (values only).

    Ball(R):            dim0 (-R, inf)
    Shell(r1, r2):      dim0 (-t, inf), dim2 (-t, r1) with t = (r2 - r1)/2
    TwoBalls(r1,r2,D):  dim0 (-max r, inf), dim0 (-min r, (D - r1 - r2)/2)
    Torus(Rmaj, rmin):  dim0 (-rmin, inf), dim1 (-rmin, Rmaj - rmin)
    """
    sp = shape.dims.spacing
    if isinstance(shape, Ball):
        entries = [(0, -shape.radius * sp, np.inf)]
    elif isinstance(shape, Shell):
        t = (shape.r_outer - shape.r_inner) / 2.0
        entries = [(0, -t * sp, np.inf), (2, -t * sp, shape.r_inner * sp)]
    elif isinstance(shape, TwoBalls):
        merge = (shape.separation - shape.r1 - shape.r2) / 2.0
        entries = [
            (0, -max(shape.r1, shape.r2) * sp, np.inf),
            (0, -min(shape.r1, shape.r2) * sp, merge * sp),
        ]
    elif isinstance(shape, Torus):
        entries = [
            (0, -shape.r_minor * sp, np.inf),
            (1, -shape.r_minor * sp, (shape.r_major - shape.r_minor) * sp),
        ]
    else:
        raise TypeError(f"unsupported shape {type(shape).__name__}")
    return _values_only_diagram(shape.dims, entries)
