"""Self-contained SVG line charts with sibling CSV data files.

No plotting dependency: charts are assembled as plain SVG strings with a
fixed palette, linear scales, and optional dashed vertical markers for
thresholds. Rendering is deterministic, so identical inputs produce
byte-identical files. Every chart is written next to a CSV holding exactly
the plotted points.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import PreconditionError

__all__ = ["Series", "VLine", "render_line_chart", "write_chart"]

_PALETTE = ("#1f6f8b", "#c15b2e", "#4a7c59", "#7b4b94", "#8c6d1f", "#58595b")

_WIDTH = 760
_HEIGHT = 460
_MARGIN_LEFT = 70
_MARGIN_RIGHT = 18
_MARGIN_TOP = 42
_MARGIN_BOTTOM = 52
_TICKS = 5


@dataclass(frozen=True)
class Series:
    label: str
    xs: tuple
    ys: tuple

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(float(v) for v in self.xs))
        object.__setattr__(self, "ys", tuple(float(v) for v in self.ys))
        if len(self.xs) != len(self.ys) or not self.xs:
            raise PreconditionError(f"series {self.label!r} needs matching nonempty data")
        if not all(math.isfinite(v) for v in self.xs + self.ys):
            raise PreconditionError(f"series {self.label!r} contains non-finite values")


@dataclass(frozen=True)
class VLine:
    x: float
    label: str


def _bounds(values: Sequence) -> tuple:
    lo, hi = min(values), max(values)
    if lo == hi:
        pad = max(abs(lo) * 0.5, 0.5)
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.06
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float) -> list:
    return [lo + (hi - lo) * i / (_TICKS - 1) for i in range(_TICKS)]


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def render_line_chart(series: Sequence, *, title: str, xlabel: str, ylabel: str,
                      vlines: Sequence = ()) -> str:
    """One SVG document: the series as colored polylines with point markers."""
    if not series:
        raise PreconditionError("chart needs at least one series")
    all_x = [v for s in series for v in s.xs] + [v.x for v in vlines]
    all_y = [v for s in series for v in s.ys]
    x_lo, x_hi = _bounds(all_x)
    y_lo, y_hi = _bounds(all_y)
    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def sx(v: float) -> float:
        return _MARGIN_LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return _MARGIN_TOP + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
        f'<text x="{_WIDTH / 2:.2f}" y="24" font-size="16" text-anchor="middle" '
        f'fill="#222222" font-family="sans-serif">{title}</text>',
    ]
    for tick in _ticks(y_lo, y_hi):
        y = sy(tick)
        parts.append(
            f'<line x1="{_MARGIN_LEFT}" y1="{y:.2f}" x2="{_WIDTH - _MARGIN_RIGHT}" '
            f'y2="{y:.2f}" stroke="#e4e4e4" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_LEFT - 8}" y="{y + 4:.2f}" font-size="11" '
            f'text-anchor="end" fill="#444444" font-family="sans-serif">{_fmt(tick)}</text>'
        )
    for tick in _ticks(x_lo, x_hi):
        x = sx(tick)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_TOP + plot_h}" x2="{x:.2f}" '
            f'y2="{_MARGIN_TOP + plot_h + 5}" stroke="#888888" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_MARGIN_TOP + plot_h + 20}" font-size="11" '
            f'text-anchor="middle" fill="#444444" font-family="sans-serif">{_fmt(tick)}</text>'
        )
    parts.append(
        f'<rect x="{_MARGIN_LEFT}" y="{_MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#888888" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{_MARGIN_LEFT + plot_w / 2:.2f}" y="{_HEIGHT - 14}" font-size="13" '
        f'text-anchor="middle" fill="#222222" font-family="sans-serif">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{_MARGIN_TOP + plot_h / 2:.2f}" font-size="13" '
        f'text-anchor="middle" fill="#222222" font-family="sans-serif" '
        f'transform="rotate(-90 18 {_MARGIN_TOP + plot_h / 2:.2f})">{ylabel}</text>'
    )
    for vline in vlines:
        x = sx(vline.x)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_TOP}" x2="{x:.2f}" '
            f'y2="{_MARGIN_TOP + plot_h}" stroke="#99332e" stroke-width="1.5" '
            f'stroke-dasharray="6 4"/>'
        )
        parts.append(
            f'<text x="{x + 5:.2f}" y="{_MARGIN_TOP + 14}" font-size="11" '
            f'fill="#99332e" font-family="sans-serif">{vline.label}</text>'
        )
    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(s.xs, s.ys))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for x, y in zip(s.xs, s.ys):
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" fill="{color}"/>')
        ly = _MARGIN_TOP + 16 + 16 * i
        lx = _WIDTH - _MARGIN_RIGHT - 150
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 28}" y="{ly}" font-size="12" fill="#222222" '
            f'font-family="sans-serif">{s.label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_chart(out_dir, name: str, series: Sequence, *, title: str, xlabel: str,
                ylabel: str, vlines: Sequence = ()) -> tuple:
    """Write <name>.svg and its sibling <name>.csv; returns both paths.

    The CSV holds exactly the plotted points in long form
    (series, x, y), one row per marker, plus any vertical markers.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    svg_path = out / f"{name}.svg"
    csv_path = out / f"{name}.csv"
    svg_path.write_text(
        render_line_chart(series, title=title, xlabel=xlabel, ylabel=ylabel,
                          vlines=vlines),
        encoding="utf-8",
    )
    with open(csv_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["series", "x", "y"])
        for s in series:
            for x, y in zip(s.xs, s.ys):
                writer.writerow([s.label, repr(x), repr(y)])
        for vline in vlines:
            writer.writerow([f"vline:{vline.label}", repr(vline.x), ""])
    return svg_path, csv_path
