"""Self-contained SVG renderers: no display stack, just strings.

Three figure styles cover the pipeline's observable stages: an
amplitude heatmap, a correlation curve, and a mask-versus-truth
timeline.
"""

from __future__ import annotations

import numpy as np

_MARGIN = 40
_WIDTH = 720
_HEIGHT = 240


def _header(width: int, height: int, title: str) -> list:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="16" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{title}</text>',
    ]


def _axis(lines: list, x0: int, y0: int, x1: int, y1: int) -> None:
    lines.append(
        f'<path d="M {x0} {y0} L {x0} {y1} L {x1} {y1}" stroke="black" '
        f'fill="none" stroke-width="1"/>'
    )


def svg_heatmap(data: np.ndarray, times: np.ndarray, title: str = "amplitude") -> str:
    """Heatmap of a (samples x subcarriers) matrix as rect cells."""
    data = np.asarray(data, dtype=np.float64)
    n, k = data.shape
    max_cols, max_rows = 240, 96
    col_step = max(1, int(np.ceil(n / max_cols)))
    row_step = max(1, int(np.ceil(k / max_rows)))
    block = data[::col_step, ::row_step]
    lo, hi = float(block.min()), float(block.max())
    scale = hi - lo if hi > lo else 1.0

    plot_w = _WIDTH - 2 * _MARGIN
    plot_h = _HEIGHT - 2 * _MARGIN
    cw = plot_w / block.shape[0]
    ch = plot_h / block.shape[1]
    lines = _header(_WIDTH, _HEIGHT, title)
    for i in range(block.shape[0]):
        for j in range(block.shape[1]):
            v = (block[i, j] - lo) / scale
            x = _MARGIN + i * cw
            y = _HEIGHT - _MARGIN - (j + 1) * ch
            lines.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{cw + 0.5:.1f}" '
                f'height="{ch + 0.5:.1f}" fill="{_color(v)}"/>'
            )
    _axis(lines, _MARGIN, _MARGIN, _WIDTH - _MARGIN, _HEIGHT - _MARGIN)
    lines.append(_xlabel(times))
    lines.append("</svg>")
    return "\n".join(lines)


def _color(v: float) -> str:
    v = min(max(v, 0.0), 1.0)
    if v < 0.5:
        t = v * 2
        rgb = (int(25 + 15 * t), int(25 + 135 * t), int(95 + 55 * t))
    else:
        t = (v - 0.5) * 2
        rgb = (int(40 + 210 * t), int(160 + 75 * t), int(150 - 110 * t))
    return f"rgb({rgb[0]},{rgb[1]},{rgb[2]})"


def _xlabel(times: np.ndarray) -> str:
    t0, t1 = float(times[0]), float(times[-1])
    return (
        f'<text x="{_MARGIN}" y="{_HEIGHT - 8}" font-family="sans-serif" '
        f'font-size="11">{t0:.1f}s</text>'
        f'<text x="{_WIDTH - _MARGIN}" y="{_HEIGHT - 8}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{t1:.1f}s</text>'
    )


def svg_curve(
    times: np.ndarray, values: np.ndarray, title: str = "pcc", ylim=None
) -> str:
    """Polyline plot of one time series."""
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    lo, hi = (float(values.min()), float(values.max())) if ylim is None else ylim
    if hi <= lo:
        hi = lo + 1.0
    plot_w = _WIDTH - 2 * _MARGIN
    plot_h = _HEIGHT - 2 * _MARGIN
    span = times[-1] - times[0] if times[-1] > times[0] else 1.0
    points = []
    for t, v in zip(times, values):
        x = _MARGIN + (t - times[0]) / span * plot_w
        y = _HEIGHT - _MARGIN - (v - lo) / (hi - lo) * plot_h
        points.append(f"{x:.1f},{y:.1f}")
    lines = _header(_WIDTH, _HEIGHT, title)
    _axis(lines, _MARGIN, _MARGIN, _WIDTH - _MARGIN, _HEIGHT - _MARGIN)
    lines.append(
        f'<polyline points="{" ".join(points)}" fill="none" '
        f'stroke="rgb(30,90,180)" stroke-width="1.2"/>'
    )
    lines.append(
        f'<text x="{_MARGIN - 4}" y="{_MARGIN + 4}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{hi:.2f}</text>'
        f'<text x="{_MARGIN - 4}" y="{_HEIGHT - _MARGIN}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{lo:.2f}</text>'
    )
    lines.append(_xlabel(times))
    lines.append("</svg>")
    return "\n".join(lines)


def svg_timeline(mask, gt=None, pir=None, title: str = "movement") -> str:
    """Mask (and optional truth / PIR rows) as colored time bands."""
    rows = [("detected", np.asarray(mask.values, dtype=bool), "rgb(30,120,200)")]
    if gt is not None:
        from .evaluate import rasterize

        rows.append(("truth", rasterize(gt, mask.rate), "rgb(60,160,60)"))
    if pir is not None:
        rows.append(("pir", np.asarray(pir, dtype=bool), "rgb(200,120,30)"))

    plot_w = _WIDTH - 2 * _MARGIN
    row_h = 28
    height = 2 * _MARGIN + row_h * len(rows)
    lines = _header(_WIDTH, height, title)
    n = max(len(values) for _, values, _ in rows)
    for r, (label, values, color) in enumerate(rows):
        y = _MARGIN + r * row_h
        lines.append(
            f'<text x="{_MARGIN - 6}" y="{y + row_h / 2:.0f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{label}</text>'
        )
        lines.append(
            f'<rect x="{_MARGIN}" y="{y}" width="{plot_w}" height="{row_h - 8}" '
            f'fill="rgb(235,235,235)"/>'
        )
        # merge consecutive true samples into single rects
        start = None
        for i in range(values.size + 1):
            active = i < values.size and values[i]
            if active and start is None:
                start = i
            elif not active and start is not None:
                x = _MARGIN + start / n * plot_w
                w = max((i - start) / n * plot_w, 0.5)
                lines.append(
                    f'<rect x="{x:.1f}" y="{y}" width="{w:.1f}" '
                    f'height="{row_h - 8}" fill="{color}"/>'
                )
                start = None
    times = mask.times
    lines.append(
        f'<text x="{_MARGIN}" y="{height - 8}" font-family="sans-serif" '
        f'font-size="11">{times[0]:.1f}s</text>'
        f'<text x="{_WIDTH - _MARGIN}" y="{height - 8}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{times[-1]:.1f}s</text>'
    )
    lines.append("</svg>")
    return "\n".join(lines)
