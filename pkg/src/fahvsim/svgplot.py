"""Minimal SVG line plots: polylines, axes, ticks and a legend.

No plotting dependency; output is a standalone .svg file.
"""

from __future__ import annotations

import math

import numpy as np

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
_W, _H = 860, 360
_ML, _MR, _MT, _MB = 70, 20, 34, 46


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-12 * abs(step):
        out.append(0.0 if abs(v) < step * 1e-9 else v)
        v += step
    return out


class Panel:
    """One axes area with any number of named line series."""

    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.series: list[tuple[str, np.ndarray, np.ndarray, str, str]] = []

    def line(self, name: str, x, y, color: str | None = None,
             dash: str = "") -> "Panel":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        color = color or _COLORS[len(self.series) % len(_COLORS)]
        self.series.append((name, x, y, color, dash))
        return self

    def _bounds(self):
        xs = np.concatenate([s[1] for s in self.series])
        ys = np.concatenate([s[2] for s in self.series])
        ys = ys[np.isfinite(ys)]
        x0, x1 = float(xs.min()), float(xs.max())
        y0, y1 = float(ys.min()), float(ys.max())
        if y1 <= y0:
            y0, y1 = y0 - 1.0, y1 + 1.0
        pad = 0.05 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def render(self, oy: int) -> str:
        x0, x1, y0, y1 = self._bounds()
        pw = _W - _ML - _MR
        ph = _H - _MT - _MB

        def sx(v):
            return _ML + pw * (v - x0) / (x1 - x0)

        def sy(v):
            return oy + _MT + ph * (1.0 - (v - y0) / (y1 - y0))

        parts = [f'<rect x="{_ML}" y="{oy + _MT}" width="{pw}" height="{ph}" '
                 'fill="white" stroke="#444444"/>']
        for tv in _ticks(x0, x1):
            parts.append(f'<line x1="{sx(tv):.1f}" y1="{oy + _MT + ph}" '
                         f'x2="{sx(tv):.1f}" y2="{oy + _MT + ph + 4}" stroke="#444"/>')
            parts.append(f'<text x="{sx(tv):.1f}" y="{oy + _MT + ph + 16}" '
                         f'font-size="11" text-anchor="middle">{tv:g}</text>')
        for tv in _ticks(y0, y1):
            parts.append(f'<line x1="{_ML - 4}" y1="{sy(tv):.1f}" x2="{_ML}" '
                         f'y2="{sy(tv):.1f}" stroke="#444"/>')
            parts.append(f'<text x="{_ML - 7}" y="{sy(tv):.1f}" font-size="11" '
                         f'text-anchor="end" dominant-baseline="middle">{tv:g}</text>')
        for name, xs, ys, color, dash in self.series:
            step = max(1, len(xs) // 4000)
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}"
                           for a, b in zip(xs[::step], ys[::step])
                           if math.isfinite(b))
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            parts.append(f'<polyline points="{pts}" fill="none" '
                         f'stroke="{color}" stroke-width="1.2"{dash_attr}/>')
        parts.append(f'<text x="{_ML + pw / 2:.0f}" y="{oy + 16}" font-size="13" '
                     f'text-anchor="middle" font-weight="bold">{self.title}</text>')
        parts.append(f'<text x="{_ML + pw / 2:.0f}" y="{oy + _MT + ph + 34}" '
                     f'font-size="12" text-anchor="middle">{self.xlabel}</text>')
        parts.append(f'<text x="16" y="{oy + _MT + ph / 2:.0f}" font-size="12" '
                     f'text-anchor="middle" transform="rotate(-90 16 '
                     f'{oy + _MT + ph / 2:.0f})">{self.ylabel}</text>')
        lx = _ML + 8
        for name, _, _, color, dash in self.series:
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            parts.append(f'<line x1="{lx}" y1="{oy + _MT + 12}" x2="{lx + 18}" '
                         f'y2="{oy + _MT + 12}" stroke="{color}" '
                         f'stroke-width="1.5"{dash_attr}/>')
            parts.append(f'<text x="{lx + 22}" y="{oy + _MT + 16}" '
                         f'font-size="11">{name}</text>')
            lx += 26 + 7 * len(name)
        return "\n".join(parts)


def write_svg(path, panels: list[Panel]) -> None:
    height = _H * len(panels)
    body = "\n".join(p.render(_H * i) for i, p in enumerate(panels))
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
           f'height="{height}" font-family="sans-serif">\n'
           f'<rect width="{_W}" height="{height}" fill="white"/>\n'
           f"{body}\n</svg>\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
