"""Quadrant classification of persistence pairs and texture summaries.

For sublevel filtrations of a signed distance field the sign pattern of
(birth, death) pins each pair to a quadrant of its diagram, giving seven
types plus the single essential component bar:

    dim 0:  I  = SW (b<0, d<0)   II = NW (b<0, d>0)      NE forbidden
    dim 1:  III= SW              IV = NW                 V = NE
    dim 2:  VI = NW              VII= NE                 SW forbidden

The forbidden combinations cannot arise from a valid signed distance field
(there are no interior maxima of the field outside the shape nor minima
inside the complement); hitting one means the input violated an assumption
or an upstream stage is broken, so it raises instead of being dropped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .cubical import Diagram, PersistencePair

__all__ = [
    "PairType",
    "ForbiddenQuadrant",
    "TextureSummary",
    "classify_pair",
    "classify_values",
    "classify_arrays",
    "filter_persistence",
    "summarize",
]


class PairType(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    VI = "VI"
    VII = "VII"
    ESSENTIAL = "ESS"

    @property
    def label(self) -> str:
        return self.value


class ForbiddenQuadrant(ValueError):
    """A pair landed in a quadrant excluded for signed distance diagrams."""

    def __init__(self, dim: int, birth: float, death: float):
        self.dim = dim
        self.birth = birth
        self.death = death
        super().__init__(
            f"forbidden quadrant: dim={dim} pair ({birth!r}, {death!r}); "
            "input is degenerate or a pipeline stage is broken"
        )


def classify_values(dim: int, birth: float, death: float) -> PairType:
    """Type of a (dim, birth, death) triple; see the module docstring."""
    if birth == 0.0 or death == 0.0:
        raise ValueError(
            f"zero critical value in pair ({birth!r}, {death!r}); "
            "signed distance diagrams never touch the axes"
        )
    if np.isinf(death):
        if dim == 0:
            return PairType.ESSENTIAL
        raise ForbiddenQuadrant(dim, birth, death)
    if dim == 0:
        if birth > 0:
            raise ForbiddenQuadrant(dim, birth, death)
        return PairType.I if death < 0 else PairType.II
    if dim == 1:
        if birth < 0:
            return PairType.III if death < 0 else PairType.IV
        if death < 0:
            raise ForbiddenQuadrant(dim, birth, death)
        return PairType.V
    if dim == 2:
        if death < 0:
            raise ForbiddenQuadrant(dim, birth, death)
        return PairType.VI if birth < 0 else PairType.VII
    raise ValueError(f"unsupported homology dimension {dim}")


def classify_pair(pair: PersistencePair) -> PairType:
    """Type of one pair; pure function of (dim, sign of birth, sign of death)."""
    return classify_values(pair.dim, pair.birth, pair.death)


def classify_arrays(dim: int, births: np.ndarray, deaths: np.ndarray) -> list[PairType]:
    return [classify_values(dim, float(b), float(d)) for b, d in zip(births, deaths)]


def filter_persistence(dgm: Diagram, min_pers: float) -> Diagram:
    """Drop finite pairs with persistence below min_pers; keep essentials."""
    if min_pers < 0:
        raise ValueError(f"min_pers must be >= 0, got {min_pers}")
    data = {}
    for d, arr in dgm.data.items():
        keep = (arr["death"] - arr["birth"] >= min_pers) | np.isinf(arr["death"])
        data[d] = arr[keep].copy()
    meta = dict(dgm.metadata)
    meta["min_pers"] = float(min_pers)
    return Diagram(dgm.dims, dgm.spacing, data, meta)


@dataclass(frozen=True)
class TextureSummary:
    """Per-type pair counts and the derived shape descriptors.

    ``n_components_estimate`` counts the essential bar plus the finite
    component merges happening outside the shape (type II);
    ``genus_estimate`` counts the loops that persist from inside to outside
    (type IV). Quantiles are 25/50/75% of persistence per type.
    """

    counts: dict[PairType, int]
    n_components_estimate: int
    genus_estimate: int
    quantiles: dict[PairType, tuple[float, float, float]]
    min_pers: float

    def to_jsonable(self) -> dict:
        return {
            "counts": {t.label: int(self.counts.get(t, 0)) for t in PairType},
            "n_components_estimate": self.n_components_estimate,
            "genus_estimate": self.genus_estimate,
            "persistence_quantiles": {
                t.label: list(q) for t, q in sorted(self.quantiles.items(), key=lambda kv: kv[0].label)
            },
            "min_pers": self.min_pers,
        }


def summarize(dgm: Diagram, min_pers: float = 0.0) -> TextureSummary:
    """Classify every pair after thresholding and aggregate the counts."""
    filtered = filter_persistence(dgm, min_pers)
    counts: dict[PairType, int] = {t: 0 for t in PairType}
    pers_by_type: dict[PairType, list[float]] = {}
    for d in (0, 1, 2):
        arr = filtered.data[d]
        for t, b, dd in zip(
            classify_arrays(d, arr["birth"], arr["death"]), arr["birth"], arr["death"]
        ):
            counts[t] += 1
            if t is not PairType.ESSENTIAL:
                pers_by_type.setdefault(t, []).append(float(dd - b))
    quantiles = {
        t: tuple(float(q) for q in np.percentile(v, [25, 50, 75]))
        for t, v in pers_by_type.items()
    }
    return TextureSummary(
        counts=counts,
        n_components_estimate=counts[PairType.II] + 1,
        genus_estimate=counts[PairType.IV],
        quantiles=quantiles,
        min_pers=float(min_pers),
    )
