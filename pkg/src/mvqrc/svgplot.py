"""Self-contained deterministic SVG emission for line plots and heatmaps.

No plotting library: experiment figures here only display already
computed tables, and hand-rolled SVG guarantees byte-identical output
for identical input, which the run manifests checksum.
"""

from __future__ import annotations

import math

from .errors import DomainError

__all__ = ["emit_plot", "line_plot", "heatmap"]

WIDTH = 640
HEIGHT = 440
MARGIN_L = 70
MARGIN_R = 130
MARGIN_T = 30
MARGIN_B = 55

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _scale(values, lo, hi, out_lo, out_hi, log: bool):
    if log:
        lo, hi = math.log10(lo), math.log10(hi)
        values = [math.log10(v) for v in values]
    span = hi - lo if hi != lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def _ticks(lo: float, hi: float, log: bool, count: int = 5):
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        step = max(1, (hi_e - lo_e) // count)
        return [10.0**e for e in range(lo_e, hi_e + 1, step)]
    if hi == lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(abs(raw)))
    step = math.ceil(raw / mag) * mag
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(t)
        t += step
    return ticks


def _color(fraction: float) -> str:
    """Dark blue to yellow ramp."""
    f = min(1.0, max(0.0, fraction))
    r = int(255 * min(1.0, 0.1 + 1.4 * f))
    g = int(255 * (0.05 + 0.85 * f))
    b = int(255 * max(0.0, 0.55 - 0.55 * f + 0.25 * (1 - abs(2 * f - 1))))
    return f"#{r:02x}{g:02x}{b:02x}"


def _header(title: str) -> list:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
    ]


def _axes(parts, xlabel, ylabel, x_lo, x_hi, y_lo, y_hi, xlog, ylog):
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    parts.append(
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
        f'fill="none" stroke="black"/>'
    )
    for t in _ticks(x_lo, x_hi, xlog):
        if t < x_lo * (1 - 1e-9) or t > x_hi * (1 + 1e-9):
            continue
        (px,) = _scale([t], x_lo, x_hi, x0, x1, xlog)
        parts.append(f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{_fmt(px)}" y="{y0 + 18}" text-anchor="middle">{_fmt(t)}</text>'
        )
    for t in _ticks(y_lo, y_hi, ylog):
        if t < y_lo - 1e-12 or t > y_hi + 1e-12:
            continue
        (py,) = _scale([t], y_lo, y_hi, y0, y1, ylog)
        parts.append(f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 8}" y="{_fmt(py)}" text-anchor="end" dominant-baseline="middle">{_fmt(t)}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 12}" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{(y0 + y1) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2})">{ylabel}</text>'
    )


def line_plot(series, xlabel="", ylabel="", title="", xlog=False, ylog=False) -> str:
    """Polyline plot; `series` is a list of dicts with keys label, x, y."""
    if not series or all(len(s["x"]) == 0 for s in series):
        raise DomainError("no data to plot")
    xs = [v for s in series for v in s["x"]]
    ys = [v for s in series for v in s["y"]]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if not ylog:
        pad = 0.05 * (y_hi - y_lo or 1.0)
        y_lo, y_hi = y_lo - pad, y_hi + pad
    parts = _header(title)
    _axes(parts, xlabel, ylabel, x_lo, x_hi, y_lo, y_hi, xlog, ylog)
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    for idx, s in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        px = _scale(s["x"], x_lo, x_hi, x0, x1, xlog)
        py = _scale(s["y"], y_lo, y_hi, y0, y1, ylog)
        points = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        for a, b in zip(px, py):
            parts.append(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="2.5" fill="{color}"/>')
        ly = MARGIN_T + 16 + 16 * idx
        parts.append(
            f'<line x1="{x1 + 10}" y1="{ly - 4}" x2="{x1 + 30}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(f'<text x="{x1 + 35}" y="{ly}">{s.get("label", f"series {idx}")}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def heatmap(x_values, y_values, z, xlabel="", ylabel="", title="", xlog=False, ylog=False) -> str:
    """Cell grid colored by z (rows follow y_values, columns x_values).

    The color scale endpoints equal the data min and max.
    """
    if len(x_values) == 0 or len(y_values) == 0:
        raise DomainError("no data to plot")
    z = [[float(v) for v in row] for row in z]
    flat = [v for row in z for v in row]
    z_lo, z_hi = min(flat), max(flat)
    span = z_hi - z_lo or 1.0
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    parts = _header(title)
    cw = (x1 - x0) / len(x_values)
    ch = (y0 - y1) / len(y_values)
    for row, yv in enumerate(y_values):
        for col, xv in enumerate(x_values):
            color = _color((z[row][col] - z_lo) / span)
            cx = x0 + col * cw
            cy = y0 - (row + 1) * ch
            parts.append(
                f'<rect x="{_fmt(cx)}" y="{_fmt(cy)}" width="{_fmt(cw)}" '
                f'height="{_fmt(ch)}" fill="{color}"/>'
            )
    for col, xv in enumerate(x_values):
        parts.append(
            f'<text x="{_fmt(x0 + (col + 0.5) * cw)}" y="{y0 + 18}" '
            f'text-anchor="middle">{_fmt(xv)}</text>'
        )
    for row, yv in enumerate(y_values):
        parts.append(
            f'<text x="{x0 - 8}" y="{_fmt(y0 - (row + 0.5) * ch)}" '
            f'text-anchor="end" dominant-baseline="middle">{_fmt(yv)}</text>'
        )
    parts.append(
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>'
    )
    parts.append(f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 12}" text-anchor="middle">{xlabel}</text>')
    parts.append(
        f'<text x="18" y="{(y0 + y1) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2})">{ylabel}</text>'
    )
    # color bar with data min/max endpoints
    bar_x = x1 + 20
    for k in range(40):
        frac = k / 39.0
        by = y0 - (k + 1) * (y0 - y1) / 40.0
        parts.append(
            f'<rect x="{bar_x}" y="{_fmt(by)}" width="14" height="{_fmt((y0 - y1) / 40.0)}" '
            f'fill="{_color(frac)}"/>'
        )
    parts.append(f'<text x="{bar_x + 18}" y="{y0}" dominant-baseline="middle">{_fmt(z_lo)}</text>')
    parts.append(f'<text x="{bar_x + 18}" y="{y1 + 6}">{_fmt(z_hi)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot(data, kind: str, axes: dict | None = None) -> str:
    """Dispatch to line_plot or heatmap from a plain data payload."""
    axes = axes or {}
    if kind == "line":
        return line_plot(
            data,
            xlabel=axes.get("xlabel", ""),
            ylabel=axes.get("ylabel", ""),
            title=axes.get("title", ""),
            xlog=axes.get("xlog", False),
            ylog=axes.get("ylog", False),
        )
    if kind == "heatmap":
        return heatmap(
            data["x"],
            data["y"],
            data["z"],
            xlabel=axes.get("xlabel", ""),
            ylabel=axes.get("ylabel", ""),
            title=axes.get("title", ""),
            xlog=axes.get("xlog", False),
            ylog=axes.get("ylog", False),
        )
    raise DomainError(f"unknown plot kind {kind!r}")
