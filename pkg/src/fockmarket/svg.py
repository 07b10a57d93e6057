"""Minimal line-plot writer: one polyline per channel on an 800x500 canvas."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 500
MARGIN = dict(left=70, right=150, top=30, bottom=50)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_plot(x: Sequence[float], series: Mapping[str, Sequence[float]],
              title: str = "", xlabel: str = "t") -> str:
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    ymin = min(float(v.min()) for v in ys.values())
    ymax = max(float(v.max()) for v in ys.values())
    if ymax - ymin < 1e-12:
        ymin, ymax = ymin - 0.5, ymax + 0.5
    xmin, xmax = float(x.min()), float(x.max())
    if xmax == xmin:
        xmax = xmin + 1.0
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(v):
        return MARGIN["left"] + (v - xmin) / (xmax - xmin) * pw

    def sy(v):
        return MARGIN["top"] + (ymax - v) / (ymax - ymin) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
           f'width="{WIDTH}" height="{HEIGHT}">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
           'fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{MARGIN["left"]}" y="20" font-size="14">{escape(title)}</text>')
    for frac in (0.0, 0.5, 1.0):
        xv = xmin + frac * (xmax - xmin)
        yv = ymin + frac * (ymax - ymin)
        out.append(f'<text x="{sx(xv):.2f}" y="{HEIGHT - MARGIN["bottom"] + 18}" font-size="11" '
                   f'text-anchor="middle">{_fmt(xv)}</text>')
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{sy(yv) + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{_fmt(yv)}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="{HEIGHT - 10}" font-size="12" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    for i, (name, y) in enumerate(ys.items()):
        colour = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN["top"] + 16 * i + 10
        lx = WIDTH - MARGIN["right"] + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}" font-size="12">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plot(path: str | Path, x, series, title: str = "", xlabel: str = "t") -> None:
    Path(path).write_text(line_plot(x, series, title, xlabel))
