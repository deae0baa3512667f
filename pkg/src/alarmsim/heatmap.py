"""SVG rendering of similarity matrices (correlation color maps).

Color scales are fixed so the same value always gets the same color:

* Pearson measures: diverging, -1 blue ``#2166ac``, 0 white, +1 red ``#b2182b``.
* Jaccard: sequential, 0 white, 1 dark blue ``#08306b``.

Undefined cells are drawn with a diagonal hatch pattern.
"""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

from .matrix import SimilarityMatrix, format_value

CELL = 24
FONT = 11
WHITE = (255, 255, 255)
NEG = (33, 102, 172)
POS = (178, 24, 43)
SEQ = (8, 48, 107)


def _mix(a: tuple[int, int, int], b: tuple[int, int, int], t: float) -> str:
    r, g, bl = (round(x + (y - x) * t) for x, y in zip(a, b))
    return f"#{r:02x}{g:02x}{bl:02x}"


def scale_for(measure: str) -> tuple[float, float]:
    return (0.0, 1.0) if measure == "jaccard" else (-1.0, 1.0)


def color_for(value: float, measure: str) -> str:
    """Fill color of ``value`` on the measure's fixed scale (clipped to it)."""
    if math.isnan(value):
        raise ValueError("undefined values are hatched, not colored")
    lo, hi = scale_for(measure)
    v = min(hi, max(lo, value))
    if measure == "jaccard":
        return _mix(WHITE, SEQ, v)
    return _mix(WHITE, POS, v) if v >= 0 else _mix(WHITE, NEG, -v)


def render_svg(m: SimilarityMatrix, title: str | None = None) -> str:
    if m.size == 0:
        raise ValueError("cannot render an empty matrix")
    n = m.size
    label_w = max(len(t) for t in m.tag_ids) * FONT * 0.62 + 8
    top = label_w + (20 if title else 4)
    left = label_w
    legend_h = 36
    width = left + n * CELL + 8
    height = top + n * CELL + legend_h
    lo, hi = scale_for(m.measure)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}" data-measure="{m.measure}" '
        f'data-scale-min="{lo}" data-scale-max="{hi}" font-family="sans-serif" font-size="{FONT}">',
        "<defs>",
        '<pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6" patternTransform="rotate(45)">',
        '<rect width="6" height="6" fill="#ffffff"/>',
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#888888" stroke-width="2"/>',
        "</pattern>",
        "</defs>",
    ]
    if title:
        out.append(f'<text class="title" x="{left:.1f}" y="14">{escape(title)}</text>')
    for i, tag in enumerate(m.tag_ids):
        y = top + i * CELL + CELL / 2 + FONT / 3
        out.append(f'<text class="row-label" x="{left - 4:.1f}" y="{y:.1f}" text-anchor="end">{escape(tag)}</text>')
        x = left + i * CELL + CELL / 2 + FONT / 3
        out.append(
            f'<text class="col-label" x="{x:.1f}" y="{top - 4:.1f}" '
            f'transform="rotate(-90 {x:.1f} {top - 4:.1f})">{escape(tag)}</text>'
        )
    for i in range(n):
        for j in range(n):
            v = float(m.values[i, j])
            x, y = left + j * CELL, top + i * CELL
            if math.isnan(v):
                cls, fill = "cell undefined", "url(#hatch)"
            else:
                cls, fill = "cell", color_for(v, m.measure)
            out.append(
                f'<rect class="{cls}" x="{x:.1f}" y="{y:.1f}" width="{CELL}" height="{CELL}" '
                f'fill="{fill}" stroke="#cccccc" stroke-width="0.5" data-row="{i}" data-col="{j}" '
                f'data-value="{format_value(v)}"/>'
            )
    # legend: 11 swatches across the scale
    ly = top + n * CELL + 10
    sw = max(6.0, min(CELL, n * CELL / 11))
    for k in range(11):
        v = lo + (hi - lo) * k / 10
        out.append(
            f'<rect class="legend" x="{left + k * sw:.1f}" y="{ly:.1f}" width="{sw:.1f}" height="10" '
            f'fill="{color_for(v, m.measure)}" data-value="{v:g}"/>'
        )
    out.append(f'<text x="{left:.1f}" y="{ly + 22:.1f}">{lo:g}</text>')
    out.append(f'<text x="{left + 11 * sw:.1f}" y="{ly + 22:.1f}" text-anchor="end">{hi:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_heatmap(m: SimilarityMatrix, path: str | Path, title: str | None = None) -> Path:
    path = Path(path)
    path.write_text(render_svg(m, title if title is not None else m.measure), encoding="utf-8")
    return path
