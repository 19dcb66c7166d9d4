"""Self-contained SVG output: the exponent-region diagram and log-log plots."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .exponents import vertex_map

_SIZE = 480
_PAD = 56

# Lemma regimes as triangles of the diagram (regime -> vertex labels)
REGIME_TRIANGLES = {
    "i": ("O", "B'", "C'"),
    "ii": ("O", "A", "B'"),
    "iii": ("O", "A", "B"),
    "iv": ("O", "B", "C"),
}
_FILLS = {"i": "#e8f0fa", "ii": "#eef7ea", "iii": "#fbf3e4", "iv": "#f6e9f2"}


def _header(width: int, height: int) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def region_svg(n: int) -> str:
    """Unit square in reciprocal coordinates with the regime triangles and pentagon."""
    v = vertex_map(n)
    side = _SIZE - 2 * _PAD

    def xy(p):
        return _PAD + float(p[0]) * side, _SIZE - _PAD - float(p[1]) * side

    out = _header(_SIZE, _SIZE)
    for regime, labels in REGIME_TRIANGLES.items():
        pts = [xy(v[k]) for k in labels]
        out.append(f'<polygon points="{" ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)}" '
                   f'fill="{_FILLS[regime]}" stroke="#999" stroke-width="0.5"/>')
        cx = sum(a for a, _ in pts) / 3
        cy = sum(b for _, b in pts) / 3
        out.append(f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" fill="#666" text-anchor="middle">{regime}</text>')
    ring = [xy(v[k]) for k in ("A", "B", "P", "P'", "B'")]
    out.append(f'<polygon points="{" ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in ring)}" '
               'fill="none" stroke="#c0392b" stroke-width="2"/>')
    x0, y0 = xy((0, 0))
    x1, y1 = xy((1, 1))
    out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y1)}" width="{_fmt(x1 - x0)}" height="{_fmt(y0 - y1)}" '
               'fill="none" stroke="black"/>')
    for tick in (0, 0.5, 1):
        tx, _ = xy((tick, 0))
        _, ty = xy((0, tick))
        out.append(f'<text x="{_fmt(tx)}" y="{_fmt(y0 + 16)}" text-anchor="middle">{tick:g}</text>')
        out.append(f'<text x="{_fmt(x0 - 8)}" y="{_fmt(ty + 4)}" text-anchor="end">{tick:g}</text>')
    out.append(f'<text x="{_SIZE / 2}" y="{_SIZE - 16}" text-anchor="middle">1/r</text>')
    out.append(f'<text x="16" y="{_SIZE / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_SIZE / 2})">1/r&#771;</text>')
    for label, p in v.items():
        px, py = xy(p)
        out.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3" fill="black"/>')
        out.append(f'<text x="{_fmt(px + 5)}" y="{_fmt(py - 5)}">{escape(label)}</text>')
    out.append(f'<text x="{_SIZE / 2}" y="20" text-anchor="middle">n = {n}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def loglog_svg(series: dict[str, list[tuple[float, float]]], xlabel: str, ylabel: str,
               title: str = "") -> str:
    """Log-log scatter with one polyline per named series."""
    pts = [p for s in series.values() for p in s if p[0] > 0 and p[1] > 0]
    if not pts:
        raise ValueError("nothing positive to plot")
    lx = [math.log10(p[0]) for p in pts]
    ly = [math.log10(p[1]) for p in pts]
    xmin, xmax = min(lx), max(lx)
    ymin, ymax = min(ly), max(ly)
    xmax = xmax if xmax > xmin else xmin + 1
    ymax = ymax if ymax > ymin else ymin + 1
    w, h = 560, 400

    def xy(x, y):
        return (_PAD + (math.log10(x) - xmin) / (xmax - xmin) * (w - 2 * _PAD),
                h - _PAD - (math.log10(y) - ymin) / (ymax - ymin) * (h - 2 * _PAD))

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    out = _header(w, h)
    out.append(f'<rect x="{_PAD}" y="{_PAD}" width="{w - 2 * _PAD}" height="{h - 2 * _PAD}" '
               'fill="none" stroke="black"/>')
    for k, (name, s) in enumerate(series.items()):
        c = colors[k % len(colors)]
        good = [xy(x, y) for x, y in s if x > 0 and y > 0]
        out.append(f'<polyline points="{" ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in good)}" '
                   f'fill="none" stroke="{c}"/>')
        for a, b in good:
            out.append(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="3" fill="{c}"/>')
        out.append(f'<text x="{w - _PAD - 4}" y="{_PAD + 16 * (k + 1)}" text-anchor="end" '
                   f'fill="{c}">{escape(name)}</text>')
    out.append(f'<text x="{_PAD}" y="{h - _PAD + 16}">{10 ** xmin:.3g}</text>')
    out.append(f'<text x="{w - _PAD}" y="{h - _PAD + 16}" text-anchor="end">{10 ** xmax:.3g}</text>')
    out.append(f'<text x="{_PAD - 4}" y="{h - _PAD}" text-anchor="end">{10 ** ymin:.3g}</text>')
    out.append(f'<text x="{_PAD - 4}" y="{_PAD + 8}" text-anchor="end">{10 ** ymax:.3g}</text>')
    out.append(f'<text x="{w / 2}" y="{h - 14}" text-anchor="middle">{escape(xlabel)} (log)</text>')
    out.append(f'<text x="14" y="{h / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {h / 2})">{escape(ylabel)} (log)</text>')
    if title:
        out.append(f'<text x="{w / 2}" y="24" text-anchor="middle">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def vertex_csv(n: int) -> str:
    lines = ["label,inv_r,inv_rt"]
    for label, (a, b) in vertex_map(n).items():
        lines.append(f"{label},{a},{b}")
    return "\n".join(lines) + "\n"

