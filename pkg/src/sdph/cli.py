"""Command line interface: pipeline orchestration and stage subcommands.

Each subcommand consumes and produces the documented file formats so stages
compose through files::

    sdph gen-shape --shape "ball(20)" --out mask.npy
    sdph sdf --input mask.npy --close-width 3 --out dist.npy
    sdph ph --input dist.npy --out dgm/
    sdph classify --input dgm/diagram.json --min-pers 0.5
    sdph pipeline --preset F1 --seed 0 --out run/

Exit codes: 0 success, 2 input error, 3 forbidden quadrant, 4 internal
invariant failure. ``SDPH_NO_COLOR`` disables terminal styling.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .classify import ForbiddenQuadrant, summarize, filter_persistence
from .cubical import InternalInvariantError, build_filtration, compute_persistence
from .grid import (
    BinaryMask,
    GridDims,
    InputError,
    close_boundary,
    load_field,
    save_field,
    save_mask,
    threshold_mask,
)
from .metrics import bottleneck
from .plot import plot_svg
from .sdt import EmptyPhase, signed_distance
from .serialize import diagram_to_csv, diagram_to_json, load_diagram
from .synth import (
    Ball,
    GrfSpec,
    Shell,
    Torus,
    TwoBalls,
    grf_preset,
    rasterize,
    sample_grf,
)

__all__ = ["PipelineConfig", "run_pipeline", "parse_shape", "main"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FORBIDDEN = 3
EXIT_INVARIANT = 4


@dataclass
class PipelineConfig:
    """Everything one pipeline run depends on; echoed into every output."""

    input: str | None = None
    preset: str | None = None
    shape: str | None = None
    seed: int = 0
    close_width: int = 3
    spacing: float = 1.0
    min_pers: float = 0.5
    density_sigma: float = 0.5
    out: str = "."
    format: str = "both"  # csv | json | both
    dims: int = 64  # grid side for --shape runs


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}': {cause}")


def _color_enabled() -> bool:
    return os.environ.get("SDPH_NO_COLOR") is None and sys.stderr.isatty()


def _log(stage: str, msg: str) -> None:
    prefix = f"[{stage}]"
    if _color_enabled():
        prefix = f"\x1b[36m{prefix}\x1b[0m"
    print(f"{prefix} {msg}", file=sys.stderr)


def parse_shape(text: str, side: int = 64, margin: int = 3):
    """Parse a shape spec like ``ball(20)`` or ``twoballs(10,10,34)``."""
    t = text.strip().lower()
    if "(" not in t or not t.endswith(")"):
        raise InputError(f"cannot parse shape spec {text!r}")
    name, args = t[: t.index("(")], t[t.index("(") + 1 : -1]
    try:
        params = [float(a) for a in args.split(",") if a.strip()]
    except ValueError as e:
        raise InputError(f"bad shape parameters in {text!r}") from e
    dims = GridDims(side, side, side)
    try:
        if name == "ball" and len(params) == 1:
            return Ball(dims, margin, params[0])
        if name == "shell" and len(params) == 2:
            return Shell(dims, margin, *params)
        if name == "twoballs" and len(params) == 3:
            return TwoBalls(dims, margin, *params)
        if name == "torus" and len(params) == 2:
            return Torus(dims, margin, *params)
    except ValueError as e:
        raise InputError(str(e)) from e
    raise InputError(f"unknown shape or wrong arity: {text!r}")


def _resolve_mask(cfg: PipelineConfig) -> tuple[BinaryMask, str]:
    """Turn the configured input into a mask plus a human-readable label."""
    sources = [s for s in (cfg.input, cfg.preset, cfg.shape) if s]
    if len(sources) != 1:
        raise InputError("exactly one of --input, --preset, --shape is required")
    if cfg.shape:
        shape = parse_shape(cfg.shape, cfg.dims, cfg.close_width)
        return rasterize(shape), cfg.shape
    if cfg.preset:
        fld = grf_preset(cfg.preset, cfg.seed)
        return threshold_mask(fld, 0.0, "above_or_equal"), f"{cfg.preset}:seed{cfg.seed}"
    fld = load_field(cfg.input)
    uniq = np.unique(fld.values)
    if np.all(np.isin(uniq, (0.0, 1.0))):
        return BinaryMask.from_array(fld.dims, fld.values != 0), cfg.input
    return threshold_mask(fld, 0.0, "above_or_equal"), cfg.input


def _provenance(cfg: PipelineConfig, source_hash: int) -> dict:
    import numba

    echo = asdict(cfg)
    echo.pop("out")  # not semantic: keeps reruns byte-identical anywhere
    return {
        "config": echo,
        "source_hash": f"{source_hash:016x}",
        "versions": {
            "sdph": __version__,
            "numpy": np.__version__,
            "numba": numba.__version__,
        },
    }


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Close boundary, signed distance, persistence, classify, plot.

    Returns {"paths": [...], "summary": TextureSummary}; deterministic for
    a fixed config (outputs are byte-identical across reruns).
    """
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def stage(name, fn, *args, **kw):
        try:
            result = fn(*args, **kw)
        except (ForbiddenQuadrant, InternalInvariantError):
            raise
        except Exception as e:
            raise StageError(name, e) from e
        _log(name, "done")
        return result

    mask, label = stage("input", _resolve_mask, cfg)
    mask = stage("close-boundary", close_boundary, mask, cfg.close_width)
    sdf = stage("signed-distance", signed_distance, mask, cfg.spacing)
    cx = stage("filtration", build_filtration, sdf.field)
    dgm = stage(
        "persistence",
        compute_persistence,
        cx,
        metadata={
            "source_hash": f"{sdf.source_hash:016x}",
            "transform": sdf.transform,
            "input": label,
        },
    )
    summary = stage("classify", summarize, dgm, cfg.min_pers)
    filtered = filter_persistence(dgm, cfg.min_pers)

    prov = _provenance(cfg, sdf.source_hash)
    paths = []
    if cfg.format in ("csv", "both"):
        p = out_dir / "diagram.csv"
        p.write_text(diagram_to_csv(filtered))
        paths.append(p)
    if cfg.format in ("json", "both"):
        p = out_dir / "diagram.json"
        p.write_text(diagram_to_json(filtered, extra_metadata={"provenance": prov}))
        paths.append(p)
    p = out_dir / "summary.json"
    doc = {"summary": summary.to_jsonable(), "provenance": prov}
    p.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    paths.append(p)
    svg_comment = json.dumps(prov, sort_keys=True)
    for d in (0, 1, 2):
        p = out_dir / f"ph{d}.svg"
        plot_svg(filtered, d, cfg.density_sigma, p, comment=svg_comment)
        paths.append(p)
    _log("pipeline", f"{len(paths)} artifacts in {out_dir}")
    return {"paths": [str(p) for p in paths], "summary": summary, "diagram": filtered}


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, *names: str) -> None:
    table = {
        "--input": dict(type=str, help="input file (field or mask)"),
        "--preset": dict(type=str, help="GRF preset F1..F5"),
        "--shape": dict(type=str, help="analytic shape, e.g. 'ball(20)'"),
        "--seed": dict(type=str, help="seed or comma/range list, e.g. 0,1,4-6"),
        "--close-width": dict(type=int, dest="close_width", help="boundary closing width"),
        "--spacing": dict(type=float, help="voxel edge length"),
        "--min-pers": dict(type=float, dest="min_pers", help="persistence threshold"),
        "--density-sigma": dict(type=float, dest="density_sigma", help="density kernel width"),
        "--out": dict(type=str, help="output file or directory"),
        "--format": dict(type=str, choices=("csv", "json", "both", "npy", "raw"), help="output format"),
        "--jobs": dict(type=int, help="parallel pipelines for multi-seed runs"),
        "--config": dict(type=str, help="flat JSON config file (flags override it)"),
        "--dims": dict(type=int, help="cubic grid side for synthetic inputs"),
    }
    for n in names:
        kw = table[n]
        p.add_argument(n, **kw)


def _parse_seeds(text: str | None) -> list[int]:
    if text is None:
        return [0]
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part[1:]:
            cut = part.index("-", 1)
            lo, hi = int(part[:cut]), int(part[cut + 1 :])
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise InputError(f"no seeds in {text!r}")
    return out


_DEFAULTS = dict(
    input=None, preset=None, shape=None, seed="0", close_width=3, spacing=1.0,
    min_pers=0.5, density_sigma=0.5, out=".", format="both", jobs=1, config=None,
    dims=64,
)


def _merge_config(args: argparse.Namespace) -> dict:
    """Precedence: explicit flags > config file > defaults."""
    merged = dict(_DEFAULTS)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        p = Path(cfg_path)
        if not p.exists():
            raise InputError(f"no such config file: {p}")
        try:
            file_cfg = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise InputError(f"malformed config {p}: {e}") from e
        unknown = set(file_cfg) - set(merged)
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    for k in merged:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    return merged


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sdph", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"sdph {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-grf", help="sample a Gaussian random field")
    _add_common(p, "--preset", "--seed", "--out", "--format", "--config", "--dims")

    p = sub.add_parser("gen-shape", help="rasterize an analytic solid")
    _add_common(p, "--shape", "--dims", "--out", "--format", "--config", "--close-width")

    p = sub.add_parser("sdf", help="signed distance field of a mask")
    _add_common(p, "--input", "--close-width", "--spacing", "--out", "--format", "--config")

    p = sub.add_parser("ph", help="persistence diagrams of a field")
    _add_common(p, "--input", "--out", "--format", "--config")

    p = sub.add_parser("classify", help="classify and summarize a diagram")
    _add_common(p, "--input", "--min-pers", "--out", "--config")

    p = sub.add_parser("bottleneck", help="bottleneck distance between two diagrams")
    p.add_argument("diagram_a")
    p.add_argument("diagram_b")
    _add_common(p, "--out", "--config")

    p = sub.add_parser("plot", help="SVG scatter plots of a diagram")
    _add_common(p, "--input", "--density-sigma", "--out", "--config")

    p = sub.add_parser("pipeline", help="run the full texture pipeline")
    _add_common(
        p, "--input", "--preset", "--shape", "--seed", "--close-width", "--spacing",
        "--min-pers", "--density-sigma", "--out", "--format", "--jobs", "--config",
        "--dims",
    )
    return ap


def _cmd_gen_grf(cfg: dict) -> int:
    seeds = _parse_seeds(cfg["seed"])
    out = Path(cfg["out"])
    fmt = "npy" if cfg["format"] in ("both", "csv", "json") else cfg["format"]
    for seed in seeds:
        if cfg["preset"]:
            fld = grf_preset(cfg["preset"], seed)
            label = f"{cfg['preset'].lower()}_seed{seed}.{fmt}"
        else:
            n = cfg["dims"]
            fld = sample_grf(GrfSpec(GridDims(n, n, n), seed=seed))
            label = f"grf_seed{seed}.{fmt}"
        path = out / label if (out.is_dir() or len(seeds) > 1 or not out.suffix) else out
        if path.suffix == "":
            path.mkdir(parents=True, exist_ok=True)
            path = path / label
        save_field(fld, path, fmt)
        _log("gen-grf", str(path))
    return EXIT_OK


def _cmd_gen_shape(cfg: dict) -> int:
    if not cfg["shape"]:
        raise InputError("gen-shape requires --shape")
    shape = parse_shape(cfg["shape"], cfg["dims"], cfg["close_width"])
    mask = rasterize(shape)
    fmt = "npy" if cfg["format"] in ("both", "csv", "json") else cfg["format"]
    save_mask(mask, cfg["out"], fmt)
    _log("gen-shape", cfg["out"])
    return EXIT_OK


def _cmd_sdf(cfg: dict) -> int:
    if not cfg["input"]:
        raise InputError("sdf requires --input")
    fld = load_field(cfg["input"])
    uniq = np.unique(fld.values)
    if np.all(np.isin(uniq, (0.0, 1.0))):
        mask = BinaryMask.from_array(fld.dims, fld.values != 0)
    else:
        mask = threshold_mask(fld, 0.0, "above_or_equal")
    if cfg["close_width"] > 0:
        mask = close_boundary(mask, cfg["close_width"])
    sdf = signed_distance(mask, cfg["spacing"])
    fmt = "npy" if cfg["format"] in ("both", "csv", "json") else cfg["format"]
    save_field(sdf.field, cfg["out"], fmt)
    _log("sdf", f"{cfg['out']} (transform {sdf.transform})")
    return EXIT_OK


def _cmd_ph(cfg: dict) -> int:
    if not cfg["input"]:
        raise InputError("ph requires --input")
    fld = load_field(cfg["input"])
    dgm = compute_persistence(build_filtration(fld), metadata={"input": cfg["input"]})
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    if cfg["format"] in ("csv", "both"):
        (out / "diagram.csv").write_text(diagram_to_csv(dgm, strict=False))
        _log("ph", str(out / "diagram.csv"))
    if cfg["format"] in ("json", "both"):
        (out / "diagram.json").write_text(diagram_to_json(dgm, strict=False))
        _log("ph", str(out / "diagram.json"))
    return EXIT_OK


def _cmd_classify(cfg: dict) -> int:
    if not cfg["input"]:
        raise InputError("classify requires --input")
    dgm = load_diagram(cfg["input"])
    summary = summarize(dgm, cfg["min_pers"])
    text = json.dumps(summary.to_jsonable(), sort_keys=True, indent=2) + "\n"
    if cfg["out"] != ".":
        Path(cfg["out"]).write_text(text)
    print(text, end="")
    return EXIT_OK


def _cmd_bottleneck(cfg: dict, path_a: str, path_b: str) -> int:
    d1 = load_diagram(path_a)
    d2 = load_diagram(path_b)
    results = [bottleneck(d1, d2, dim).to_jsonable(dim) for dim in (0, 1, 2)]
    text = json.dumps(results, sort_keys=True, indent=2) + "\n"
    if cfg["out"] != ".":
        Path(cfg["out"]).write_text(text)
    print(text, end="")
    return EXIT_OK


def _cmd_plot(cfg: dict) -> int:
    if not cfg["input"]:
        raise InputError("plot requires --input")
    dgm = load_diagram(cfg["input"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    for d in (0, 1, 2):
        plot_svg(dgm, d, cfg["density_sigma"], out / f"ph{d}.svg")
    _log("plot", f"3 SVGs in {out}")
    return EXIT_OK


def _cmd_pipeline(cfg: dict) -> int:
    seeds = _parse_seeds(cfg["seed"])
    base_out = Path(cfg["out"])

    def one(seed: int, out: Path) -> None:
        pc = PipelineConfig(
            input=cfg["input"], preset=cfg["preset"], shape=cfg["shape"],
            seed=seed, close_width=cfg["close_width"], spacing=cfg["spacing"],
            min_pers=cfg["min_pers"], density_sigma=cfg["density_sigma"],
            out=str(out), format=cfg["format"] if cfg["format"] in ("csv", "json", "both") else "both",
            dims=cfg["dims"],
        )
        run_pipeline(pc)

    if len(seeds) == 1:
        one(seeds[0], base_out)
        return EXIT_OK
    label = (cfg["preset"] or cfg["shape"] or Path(cfg["input"]).stem).lower()
    label = "".join(ch if ch.isalnum() else "_" for ch in label).strip("_")
    jobs = max(1, int(cfg["jobs"]))
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futs = [
            pool.submit(one, s, base_out / f"{label}_seed{s}") for s in seeds
        ]
        for f in futs:
            f.result()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _merge_config(args)
        if args.command == "gen-grf":
            return _cmd_gen_grf(cfg)
        if args.command == "gen-shape":
            return _cmd_gen_shape(cfg)
        if args.command == "sdf":
            return _cmd_sdf(cfg)
        if args.command == "ph":
            return _cmd_ph(cfg)
        if args.command == "classify":
            return _cmd_classify(cfg)
        if args.command == "bottleneck":
            return _cmd_bottleneck(cfg, args.diagram_a, args.diagram_b)
        if args.command == "plot":
            return _cmd_plot(cfg)
        if args.command == "pipeline":
            return _cmd_pipeline(cfg)
        raise InputError(f"unknown command {args.command!r}")
    except ForbiddenQuadrant as e:
        print(f"sdph: forbidden quadrant: {e}", file=sys.stderr)
        return EXIT_FORBIDDEN
    except InternalInvariantError as e:
        print(f"sdph: internal invariant failure: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except StageError as e:
        cause = e.cause
        if isinstance(cause, ForbiddenQuadrant):
            print(f"sdph: forbidden quadrant in {e.stage}: {cause}", file=sys.stderr)
            return EXIT_FORBIDDEN
        if isinstance(cause, InternalInvariantError):
            print(f"sdph: invariant failure in {e.stage}: {cause}", file=sys.stderr)
            return EXIT_INVARIANT
        print(f"sdph: error in {e.stage}: {cause}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, EmptyPhase, ValueError, OSError) as e:
        print(f"sdph: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
