"""Minimal SVG rendering: stacked line panels and a categorical region map.

Plots are conveniences for eyeballing runs; nothing downstream parses them.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
REGION_COLOURS = {
    "endemic_stable": "#4c9be8",
    "oscillatory": "#f2a541",
    "disease_free_stable": "#7bc47f",
}

_W, _PANEL_H, _PAD = 640, 200, 50


def _polyline(x, y, x0, x1, y0, y1, box) -> str:
    left, top, w, h = box
    sx = w / (x1 - x0) if x1 > x0 else 0.0
    sy = h / (y1 - y0) if y1 > y0 else 0.0
    pts = " ".join(
        f"{left + (a - x0) * sx:.2f},{top + h - (b - y0) * sy:.2f}" for a, b in zip(x, y) if np.isfinite(b)
    )
    return pts


def line_plot(path: Path, x: Sequence[float], panels: Mapping[str, Mapping[str, Sequence[float]]], title: str = "") -> Path:
    """Write one panel per entry of ``panels``; each panel maps a label to a y series."""
    x = np.asarray(x, float)
    n = max(len(panels), 1)
    height = n * (_PANEL_H + _PAD) + _PAD
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    x0, x1 = (float(x.min()), float(x.max())) if x.size else (0.0, 1.0)
    for i, (name, series) in enumerate(panels.items()):
        box = (_PAD + 20, _PAD + i * (_PANEL_H + _PAD), _W - 2 * _PAD - 20, _PANEL_H)
        ys = [np.asarray(v, float) for v in series.values()]
        finite = np.concatenate([v[np.isfinite(v)] for v in ys]) if ys else np.array([0.0])
        y0, y1 = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
        if y1 == y0:
            y0, y1 = y0 - 1.0, y1 + 1.0
        left, top, w, h = box
        out.append(f'<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="#444"/>')
        out.append(f'<text x="{left}" y="{top - 6}">{escape(name)}</text>')
        out.append(f'<text x="{left - 4}" y="{top + 10}" text-anchor="end">{y1:.3g}</text>')
        out.append(f'<text x="{left - 4}" y="{top + h}" text-anchor="end">{y0:.3g}</text>')
        out.append(f'<text x="{left}" y="{top + h + 14}">{x0:.3g}</text>')
        out.append(f'<text x="{left + w}" y="{top + h + 14}" text-anchor="end">{x1:.3g}</text>')
        for j, (label, y) in enumerate(series.items()):
            colour = PALETTE[j % len(PALETTE)]
            pts = _polyline(x, np.asarray(y, float), x0, x1, y0, y1, box)
            out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
            out.append(f'<text x="{left + w - 4}" y="{top + 14 + 13 * j}" text-anchor="end" fill="{colour}">{escape(label)}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
    return path


def region_plot(path: Path, cells: Sequence[tuple[float, float, str]], title: str = "") -> Path:
    """Colour each (u1, u2) grid cell by class; u2 is drawn on a log axis."""
    u1s = sorted({c[0] for c in cells})
    u2s = sorted({c[1] for c in cells})
    left, top = _PAD + 20, _PAD
    w, h = _W - 2 * _PAD - 20, 400
    cw, ch = w / max(len(u1s), 1), h / max(len(u2s), 1)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{h + 2 * _PAD + 40}" font-family="sans-serif" font-size="11">',
        f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    for u1, u2, cls in cells:
        i, j = u1s.index(u1), u2s.index(u2)
        colour = REGION_COLOURS.get(str(cls), "#cccccc")
        out.append(
            f'<rect x="{left + i * cw:.2f}" y="{top + h - (j + 1) * ch:.2f}" width="{cw:.2f}" height="{ch:.2f}" fill="{colour}"/>'
        )
    out.append(f'<text x="{left + w / 2}" y="{top + h + 16}" text-anchor="middle">u1</text>')
    out.append(f'<text x="{left - 30}" y="{top + h / 2}">u2</text>')
    for k, (name, colour) in enumerate(REGION_COLOURS.items()):
        out.append(f'<text x="{left + 150 * k}" y="{top + h + 34}" fill="{colour}">{name}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
    return path
