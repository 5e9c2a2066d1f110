"""Shared fixtures; expensive artifacts are computed once per session."""

from __future__ import annotations

import numpy as np
import pytest

from sdph.cli import PipelineConfig, run_pipeline
from sdph.cubical import build_filtration, compute_persistence
from sdph.grid import GridDims, ScalarField, close_boundary, threshold_mask
from sdph.sdt import signed_distance
from sdph.synth import GrfSpec, grf_preset


class SessionCache:
    """Lazy store for fields, pipelines and diagrams reused across tests."""

    def __init__(self, tmp_factory):
        self._tmp = tmp_factory
        self._fields: dict = {}
        self._runs: dict = {}
        self._sdph: dict = {}
        self._raw_dgm: dict = {}

    def preset_field(self, name: str, seed: int) -> ScalarField:
        key = (name, seed)
        if key not in self._fields:
            self._fields[key] = grf_preset(name, seed)
        return self._fields[key]

    def grf50(self, seed: int) -> ScalarField:
        key = ("50", seed)
        if key not in self._fields:
            self._fields[key] = sample_grf_50(seed)
        return self._fields[key]

    def shape_run(self, spec: str, min_pers: float = 2.0, dims: int = 64):
        key = (spec, min_pers, dims)
        if key not in self._runs:
            out = self._tmp.mktemp(f"run_{spec.split('(')[0]}")
            cfg = PipelineConfig(shape=spec, out=str(out), min_pers=min_pers, dims=dims)
            res = run_pipeline(cfg)
            res["out"] = out
            res["config"] = cfg
            self._runs[key] = res
        return self._runs[key]

    def sdph_of_field(self, label: str, fld: ScalarField, close_width: int = 3):
        """Threshold at 0, close, signed distance, persistence."""
        if label not in self._sdph:
            mask = close_boundary(
                threshold_mask(fld, 0.0, "above_or_equal"), close_width
            )
            sdf = signed_distance(mask)
            dgm = compute_persistence(build_filtration(sdf.field))
            self._sdph[label] = (sdf, dgm)
        return self._sdph[label]

    def raw_diagram(self, label: str, fld: ScalarField):
        if label not in self._raw_dgm:
            self._raw_dgm[label] = compute_persistence(build_filtration(fld))
        return self._raw_dgm[label]


def sample_grf_50(seed: int) -> ScalarField:
    from sdph.synth import sample_grf

    return sample_grf(GrfSpec(GridDims(50, 50, 50), 1.0, (8.0, 8.0, 8.0), seed=seed))


@pytest.fixture(scope="session")
def cache(tmp_path_factory) -> SessionCache:
    return SessionCache(tmp_path_factory)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
