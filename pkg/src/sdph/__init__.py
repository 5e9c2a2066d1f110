"""Texture quantification for 3D voxel shapes.

The pipeline: binary shape -> exact signed Euclidean distance field ->
sublevel cubical filtration -> persistence diagrams (dims 0, 1, 2) ->
quadrant classification of the pairs into seven geometric types ->
texture summaries and plots.
"""

__version__ = "0.1.0"

from .classify import (
    ForbiddenQuadrant,
    PairType,
    TextureSummary,
    classify_pair,
    classify_values,
    filter_persistence,
    summarize,
)
from .cubical import (
    Cell,
    Diagram,
    FilteredCubicalComplex,
    InternalInvariantError,
    PersistencePair,
    build_filtration,
    compute_persistence,
    naive_persistence,
)
from .grid import (
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
from .metrics import DIAGONAL, MatchingResult, bottleneck, density_scores
from .plot import plot_svg, render_svg
from .sdt import EmptyPhase, SignedDistanceField, edt_sq, mask_hash, signed_distance
from .serialize import (
    diagram_from_csv,
    diagram_from_json,
    diagram_to_csv,
    diagram_to_json,
    load_diagram,
)
from .synth import (
    Ball,
    GrfSpec,
    Shell,
    Torus,
    TwoBalls,
    expected_diagram,
    grf_preset,
    rasterize,
    sample_grf,
)

__all__ = [
    "__version__",
    "GridDims", "ScalarField", "BinaryMask", "InputError",
    "load_field", "save_field", "load_mask", "save_mask",
    "threshold_mask", "close_boundary",
    "EmptyPhase", "SignedDistanceField", "edt_sq", "signed_distance", "mask_hash",
    "Cell", "PersistencePair", "Diagram", "FilteredCubicalComplex",
    "InternalInvariantError", "build_filtration", "compute_persistence",
    "naive_persistence",
    "PairType", "ForbiddenQuadrant", "TextureSummary",
    "classify_pair", "classify_values", "filter_persistence", "summarize",
    "GrfSpec", "sample_grf", "grf_preset",
    "Ball", "Shell", "TwoBalls", "Torus", "rasterize", "expected_diagram",
    "DIAGONAL", "MatchingResult", "bottleneck", "density_scores",
    "plot_svg", "render_svg",
    "diagram_to_csv", "diagram_from_csv", "diagram_to_json", "diagram_from_json",
    "load_diagram",
]
