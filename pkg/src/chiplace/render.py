"""SVG drawings of placements and their D2D links."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from .model import ChipletType, IciTopology, PlacedChiplet

COLORS = {
    ChipletType.COMPUTE: "#7fb3d5",
    ChipletType.MEMORY: "#82e0aa",
    ChipletType.IO: "#f5b041",
}
MARGIN = 10.0
LEGEND_H = 24.0


def _f(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def svg_document(placed: Sequence[PlacedChiplet], topology: Optional[IciTopology], scale: float = 20.0,
                 title: Optional[str] = None) -> str:
    """SVG text; y grows upward in mm and is flipped for display."""
    if not placed:
        raise ValueError("nothing to draw")
    x0 = min(p.rect[0] for p in placed)
    y0 = min(p.rect[1] for p in placed)
    x1 = max(p.rect[2] for p in placed)
    y1 = max(p.rect[3] for p in placed)
    width = (x1 - x0) * scale + 2 * MARGIN
    height = (y1 - y0) * scale + 2 * MARGIN + LEGEND_H

    def px(x):
        return (x - x0) * scale + MARGIN

    def py(y):
        return (y1 - y) * scale + MARGIN + LEGEND_H

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">'
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append('<g class="legend">')
    for k, t in enumerate(ChipletType):
        lx = MARGIN + k * 90
        out.append(f'<rect class="legend-key" x="{_f(lx)}" y="4" width="12" height="12" fill="{COLORS[t]}"/>')
        out.append(f'<text x="{_f(lx + 16)}" y="14" font-size="12">{t.value}</text>')
    out.append("</g>")
    out.append(
        f'<rect class="bbox" x="{_f(px(x0))}" y="{_f(py(y1))}" width="{_f((x1 - x0) * scale)}" '
        f'height="{_f((y1 - y0) * scale)}" fill="none" stroke="#555" stroke-dasharray="4 2"/>'
    )
    by_id = {}
    for p in placed:
        by_id[p.instance_id] = p
        rx0, ry0, rx1, ry1 = p.rect
        out.append(
            f'<rect class="chiplet {p.spec.ctype.value}" data-id="{p.instance_id}" x="{_f(px(rx0))}" '
            f'y="{_f(py(ry1))}" width="{_f((rx1 - rx0) * scale)}" height="{_f((ry1 - ry0) * scale)}" '
            f'fill="{COLORS[p.spec.ctype]}" stroke="#222"/>'
        )
    if topology is not None:
        for a, b, _ in topology.d2d_links:
            ax, ay = by_id[a[0]].absolute_phys()[a[1]]
            bx, by = by_id[b[0]].absolute_phys()[b[1]]
            out.append(
                f'<line class="link" x1="{_f(px(ax))}" y1="{_f(py(ay))}" x2="{_f(px(bx))}" y2="{_f(py(by))}" '
                f'stroke="#c0392b" stroke-width="2"/>'
            )
    r = max(1.5, 0.08 * scale)
    for p in placed:
        for x, y in p.absolute_phys():
            out.append(f'<circle class="phy" cx="{_f(px(x))}" cy="{_f(py(y))}" r="{_f(r)}" fill="#222"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix="." + path.name, dir=path.parent)
        os.chmod(tmp, 0o666 & ~_umask())
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def render_svg(placed: Sequence[PlacedChiplet], topology: Optional[IciTopology], path, scale: float = 20.0,
               title: Optional[str] = None) -> None:
    write_atomic(path, svg_document(placed, topology, scale, title))
