"""Minimal self-contained SVG charts for sweep output.

Deliberately tiny: a single polyline chart for one-dimensional sweeps and
a colored-cell heatmap for two-dimensional ones.  CSV remains the source
of truth; these are quick visual summaries with labeled axes.
"""
from __future__ import annotations

import math

__all__ = ["line_chart", "heatmap"]

_WIDTH = 640
_HEIGHT = 420
_MARGIN_L = 70
_MARGIN_R = 20
_MARGIN_T = 40
_MARGIN_B = 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def _frame(title: str, x_label: str, y_label: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<text x="{_WIDTH / 2}" y="{_HEIGHT - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{x_label}</text>',
        f'<text x="14" y="{_HEIGHT / 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 14 {_HEIGHT / 2})">{y_label}</text>',
    ]


def _color(fraction: float) -> str:
    """Two-stop light-yellow to dark-red ramp."""
    fraction = min(1.0, max(0.0, fraction))
    r = round(255 - 80 * fraction)
    g = round(237 - 200 * fraction)
    b = round(160 - 120 * fraction)
    return f"rgb({r},{g},{b})"


def line_chart(
    x: list[float],
    y: list[float],
    x_label: str,
    y_label: str,
    title: str,
) -> str:
    """Single-series line chart; NaN gaps split the polyline."""
    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B
    finite = [v for v in y if not math.isnan(v)]
    x_lo, x_hi = min(x), max(x)
    y_lo, y_hi = (min(finite), max(finite)) if finite else (0.0, 1.0)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    def sx(v: float) -> float:
        return _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return _MARGIN_T + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    parts = _frame(title, x_label, y_label)
    parts.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="black"/>'
    )
    for tick in _ticks(x_lo, x_hi):
        parts.append(
            f'<text x="{_fmt(sx(tick))}" y="{_HEIGHT - _MARGIN_B + 16}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="10">'
            f"{tick:.4g}</text>"
        )
    for tick in _ticks(y_lo, y_hi):
        parts.append(
            f'<text x="{_MARGIN_L - 6}" y="{_fmt(sy(tick) + 3)}" '
            f'text-anchor="end" font-family="sans-serif" font-size="10">'
            f"{tick:.4g}</text>"
        )
    segment: list[str] = []
    segments: list[list[str]] = []
    for xv, yv in zip(x, y):
        if math.isnan(yv):
            if segment:
                segments.append(segment)
                segment = []
            continue
        segment.append(f"{_fmt(sx(xv))},{_fmt(sy(yv))}")
    if segment:
        segments.append(segment)
    for seg in segments:
        parts.append(
            f'<polyline points="{" ".join(seg)}" fill="none" '
            f'stroke="rgb(30,90,160)" stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def heatmap(
    x: list[float],
    y: list[float],
    grid: list[list[float]],
    x_label: str,
    y_label: str,
    title: str,
) -> str:
    """Cell heatmap for grid[i][j] at (x[i], y[j]); NaN cells render dark."""
    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B
    finite = [v for row in grid for v in row if not math.isnan(v)]
    v_lo, v_hi = (min(finite), max(finite)) if finite else (0.0, 1.0)
    if v_hi == v_lo:
        v_hi = v_lo + 1.0
    cell_w = plot_w / len(x)
    cell_h = plot_h / len(y)

    parts = _frame(title, x_label, y_label)
    for i in range(len(x)):
        for j in range(len(y)):
            value = grid[i][j]
            if math.isnan(value):
                fill = "rgb(20,20,60)"  # out-of-regime cells
            else:
                fill = _color((value - v_lo) / (v_hi - v_lo))
            px = _MARGIN_L + i * cell_w
            py = _MARGIN_T + plot_h - (j + 1) * cell_h
            parts.append(
                f'<rect x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(cell_w)}" '
                f'height="{_fmt(cell_h)}" fill="{fill}"/>'
            )
    parts.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="black"/>'
    )
    for idx in (0, len(x) - 1):
        parts.append(
            f'<text x="{_fmt(_MARGIN_L + (idx + 0.5) * cell_w)}" '
            f'y="{_HEIGHT - _MARGIN_B + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{x[idx]:.4g}</text>'
        )
    for idx in (0, len(y) - 1):
        parts.append(
            f'<text x="{_MARGIN_L - 6}" '
            f'y="{_fmt(_MARGIN_T + plot_h - (idx + 0.5) * cell_h + 3)}" '
            f'text-anchor="end" font-family="sans-serif" font-size="10">'
            f"{y[idx]:.4g}</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
