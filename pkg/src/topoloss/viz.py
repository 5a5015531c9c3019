"""Static SVG renderings: barcode plots and matching overlays."""

from __future__ import annotations

from typing import List

from .matching import MatchingResult
from .persistence import Diagram

DIM_COLORS = {0: "#1f77b4", 1: "#d62728"}


def barcode_svg(diagram: Diagram, width: int = 480, bar_height: int = 10) -> str:
    """One horizontal bar per pair, spanning [1-birth, 1-death], grouped by dim."""
    pairs = sorted(diagram.pairs, key=lambda p: (p.dim, -(p.birth - p.death)))
    pad, gap = 40, 4
    height = pad * 2 + len(pairs) * (bar_height + gap)
    lines: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    span = width - 2 * pad
    for k, p in enumerate(pairs):
        x0 = pad + (1.0 - p.birth) * span
        x1 = pad + (1.0 - p.death) * span
        y = pad + k * (bar_height + gap)
        color = DIM_COLORS[p.dim]
        lines.append(
            f'<rect x="{x0:.2f}" y="{y}" width="{max(x1 - x0, 0.5):.2f}" '
            f'height="{bar_height}" fill="{color}"/>'
        )
    for t in (0.0, 0.5, 1.0):
        x = pad + t * span
        lines.append(
            f'<line x1="{x:.2f}" y1="{pad - 8}" x2="{x:.2f}" y2="{height - pad + 8}" '
            f'stroke="#999" stroke-dasharray="3,3"/>'
        )
        lines.append(
            f'<text x="{x:.2f}" y="{pad - 12}" font-size="10" text-anchor="middle" '
            f'fill="#333">{t:g}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def matching_overlay_svg(
    dl: Diagram, dt: Diagram, result: MatchingResult, scale: int = 12
) -> str:
    """Creator locations of both diagrams with lines joining matched features.

    Left-diagram creators are circles, right-diagram creators squares;
    diagonal-matched features are grayed out.
    """
    rows, cols = dl.shape
    w, h = cols * scale, rows * scale
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"]
    lines: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white" stroke="#ccc"/>',
    ]

    def center(pixel):
        return ((pixel[1] + 0.5) * scale, (pixel[0] + 0.5) * scale)

    color_idx = 0
    for dm in result.dims:
        l_pairs = dl.pairs_of_dim(dm.dim)
        t_pairs = dt.pairs_of_dim(dm.dim)
        for m in dm.matches:
            lx, ly = center(l_pairs[m.l_index].creator_pixel)
            if m.target is None:
                lines.append(
                    f'<circle cx="{lx:.1f}" cy="{ly:.1f}" r="{scale * 0.3:.1f}" '
                    f'fill="none" stroke="#aaa" stroke-width="1.5"/>'
                )
                continue
            color = palette[color_idx % len(palette)]
            color_idx += 1
            tx, ty = center(t_pairs[m.target].creator_pixel)
            lines.append(
                f'<line x1="{lx:.1f}" y1="{ly:.1f}" x2="{tx:.1f}" y2="{ty:.1f}" '
                f'stroke="{color}" stroke-width="1" stroke-dasharray="4,3"/>'
            )
            lines.append(
                f'<circle cx="{lx:.1f}" cy="{ly:.1f}" r="{scale * 0.3:.1f}" fill="{color}"/>'
            )
            side = scale * 0.55
            lines.append(
                f'<rect x="{tx - side / 2:.1f}" y="{ty - side / 2:.1f}" width="{side:.1f}" '
                f'height="{side:.1f}" fill="none" stroke="{color}" stroke-width="2"/>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
