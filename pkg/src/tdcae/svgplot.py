"""Small dependency-free SVG line plots. Output is a pure function of the
inputs, so plots are byte-stable and diff-able in tests."""

from __future__ import annotations

from pathlib import Path

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_WIDTH = 960
_HEIGHT = 320
_MARGIN_L = 64
_MARGIN_R = 16
_MARGIN_T = 34
_MARGIN_B = 40


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + k * step for k in range(n)]


def line_plot(
    path,
    series: list[tuple[str, np.ndarray]],
    title: str = "",
    threshold: float | None = None,
    shaded: list[tuple[int, int]] | None = None,
    y_label: str = "",
    x_label: str = "time step",
) -> None:
    """Write one SVG panel with the given named series.

    threshold draws a dashed horizontal line; shaded draws grey vertical
    bands over the inclusive index intervals (used for attack windows).
    """
    series = [(name, np.asarray(y, dtype=np.float64)) for name, y in series]
    n = max((len(y) for _, y in series), default=0)
    ys = np.concatenate([y for _, y in series]) if series else np.array([0.0])
    y_lo = float(ys.min())
    y_hi = float(ys.max())
    if threshold is not None:
        y_lo = min(y_lo, threshold)
        y_hi = max(y_hi, threshold)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(i: float) -> float:
        return _MARGIN_L + (i / max(n - 1, 1)) * plot_w

    def sy(v: float) -> float:
        return _MARGIN_T + (1.0 - (v - y_lo) / (y_hi - y_lo)) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{_WIDTH / 2:.0f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )

    for a, b in shaded or []:
        x0, x1 = sx(a), sx(min(b, n - 1))
        out.append(
            f'<rect x="{_fmt(x0)}" y="{_MARGIN_T}" width="{_fmt(max(x1 - x0, 1.0))}" '
            f'height="{plot_h}" fill="#bbbbbb" fill-opacity="0.45"/>'
        )

    out.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333"/>'
    )
    for tick in _ticks(y_lo, y_hi):
        y = sy(tick)
        out.append(
            f'<line x1="{_MARGIN_L - 4}" y1="{_fmt(y)}" x2="{_MARGIN_L}" y2="{_fmt(y)}" '
            f'stroke="#333333"/>'
        )
        out.append(
            f'<text x="{_MARGIN_L - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{tick:.3g}</text>'
        )
    for tick in _ticks(0, max(n - 1, 1)):
        x = sx(tick)
        out.append(
            f'<line x1="{_fmt(x)}" y1="{_MARGIN_T + plot_h}" x2="{_fmt(x)}" '
            f'y2="{_MARGIN_T + plot_h + 4}" stroke="#333333"/>'
        )
        out.append(
            f'<text x="{_fmt(x)}" y="{_MARGIN_T + plot_h + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tick:.0f}</text>'
        )
    if x_label:
        out.append(
            f'<text x="{_WIDTH / 2:.0f}" y="{_HEIGHT - 8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{x_label}</text>'
        )
    if y_label:
        out.append(
            f'<text x="16" y="{_MARGIN_T + plot_h / 2:.0f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 16 {_MARGIN_T + plot_h / 2:.0f})">{y_label}</text>'
        )

    if threshold is not None:
        y = sy(threshold)
        out.append(
            f'<line x1="{_MARGIN_L}" y1="{_fmt(y)}" x2="{_MARGIN_L + plot_w}" '
            f'y2="{_fmt(y)}" stroke="#000000" stroke-dasharray="6 4"/>'
        )
        out.append(
            f'<text x="{_MARGIN_L + plot_w - 4}" y="{_fmt(y - 5)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">threshold</text>'
        )

    for k, (name, y) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{_fmt(sx(i))},{_fmt(sy(v))}" for i, v in enumerate(y.tolist()))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>'
        )
        out.append(
            f'<text x="{_MARGIN_L + 8}" y="{_MARGIN_T + 16 + 14 * k}" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{name}</text>'
        )

    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
