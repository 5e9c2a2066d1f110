"""Static SVG scatter plots of persistence diagrams.

The layout mirrors the usual diagram conventions: axes cross at the origin
so the four quadrants are visible, the diagonal birth = death is drawn,
finite pairs are dots colored by kernel density, and essential pairs appear
as upward arrows at their birth abscissa. Output is plain hand-written SVG
with fixed number formatting, so identical diagrams produce byte-identical
files (no timestamps, no library version strings).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .cubical import Diagram
from .metrics import density_scores

__all__ = ["plot_svg", "render_svg"]

_W, _H = 560, 560
_ML, _MR, _MT, _MB = 70, 30, 30, 60

# three-stop color ramp, light to dark
_RAMP = ((254, 237, 222), (253, 141, 60), (166, 15, 20))


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    if t < 0.5:
        a, b, u = _RAMP[0], _RAMP[1], t * 2
    else:
        a, b, u = _RAMP[1], _RAMP[2], (t - 0.5) * 2
    rgb = tuple(round(a[i] + (b[i] - a[i]) * u) for i in range(3))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _f(v: float) -> str:
    return f"{v:.2f}"


def render_svg(dgm: Diagram, dim: int, sigma: float = 0.5, comment: str | None = None) -> str:
    """Render one dimension of a diagram to an SVG string.

    `comment` (e.g. run provenance) is embedded as an XML comment; it must
    be deterministic for byte-identical reruns.
    """
    arr = dgm.data[dim]
    finite = arr[np.isfinite(arr["death"])]
    ess = arr[np.isinf(arr["death"])]

    xs = [0.0]
    ys = [0.0]
    xs += list(finite["birth"]) + list(ess["birth"])
    ys += list(finite["death"])
    lo = min(min(xs), min(ys))
    hi = max(max(xs), max(ys))
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.1 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    pw = _W - _ML - _MR
    ph = _H - _MT - _MB
    scale = pw / (hi - lo)

    def X(v):
        return _ML + (v - lo) * scale

    def Y(v):
        return _MT + ph - (v - lo) * (ph / (hi - lo))

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">'
    )
    if comment:
        out.append(f"<!-- {comment.replace('--', '- -')} -->")
    out.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
    out.append(
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#888" stroke-width="1"/>'
    )
    # diagonal birth = death
    out.append(
        f'<line x1="{_f(X(lo))}" y1="{_f(Y(lo))}" x2="{_f(X(hi))}" y2="{_f(Y(hi))}" '
        f'stroke="#bbbbbb" stroke-width="1"/>'
    )
    # zero axes marking the quadrants
    if lo < 0 < hi:
        out.append(
            f'<line x1="{_f(X(0))}" y1="{_MT}" x2="{_f(X(0))}" y2="{_MT + ph}" '
            f'stroke="#666" stroke-width="1" stroke-dasharray="4 3"/>'
        )
        out.append(
            f'<line x1="{_ML}" y1="{_f(Y(0))}" x2="{_ML + pw}" y2="{_f(Y(0))}" '
            f'stroke="#666" stroke-width="1" stroke-dasharray="4 3"/>'
        )
    # axis labels and range ticks
    out.append(
        f'<text x="{_ML + pw / 2}" y="{_H - 18}" font-family="sans-serif" '
        f'font-size="14" text-anchor="middle">birth</text>'
    )
    out.append(
        f'<text x="20" y="{_MT + ph / 2}" font-family="sans-serif" font-size="14" '
        f'text-anchor="middle" transform="rotate(-90 20 {_MT + ph / 2})">death</text>'
    )
    for v in (lo, 0.0, hi) if lo < 0 < hi else (lo, hi):
        out.append(
            f'<text x="{_f(X(v))}" y="{_MT + ph + 16}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle">{v:.4g}</text>'
        )
        out.append(
            f'<text x="{_ML - 6}" y="{_f(Y(v) + 4)}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end">{v:.4g}</text>'
        )
    out.append(
        f'<text x="{_ML}" y="{_MT - 10}" font-family="sans-serif" font-size="13">'
        f"dim {dim} &#8212; {len(finite)} finite, {len(ess)} essential</text>"
    )

    # essential pairs: upward arrows at the birth abscissa
    for row in ess:
        x = X(float(row["birth"]))
        y0 = Y(lo + 0.05 * (hi - lo))
        y1 = _MT + 14
        out.append(
            f'<line x1="{_f(x)}" y1="{_f(y0)}" x2="{_f(x)}" y2="{_f(y1)}" '
            f'stroke="#2b5d8c" stroke-width="2"/>'
        )
        out.append(
            f'<polygon points="{_f(x - 5)},{_f(y1 + 8)} {_f(x + 5)},{_f(y1 + 8)} '
            f'{_f(x)},{_f(y1 - 2)}" fill="#2b5d8c"/>'
        )

    # finite pairs colored by density
    if len(finite):
        dens = density_scores(dgm, dim, sigma)
        dmax = float(dens.max())
        dmin = float(dens.min())
        rng = dmax - dmin
        for row, sc in zip(finite, dens):
            t = (float(sc) - dmin) / rng if rng > 0 else 0.5
            out.append(
                f'<circle cx="{_f(X(float(row["birth"])))}" '
                f'cy="{_f(Y(float(row["death"])))}" r="4" fill="{_color(t)}" '
                f'stroke="#333333" stroke-width="0.6"/>'
            )

    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_svg(dgm: Diagram, dim: int, sigma: float, path, comment: str | None = None) -> None:
    """Write the SVG scatter for one homology dimension."""
    Path(path).write_text(render_svg(dgm, dim, sigma, comment))
