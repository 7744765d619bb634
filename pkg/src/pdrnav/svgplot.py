"""Minimal top-down SVG rendering of trajectories.

Hand-rolled on purpose: the output must be deterministic (no library
version strings, no creation timestamps) and the needs are tiny — equal-
axis polylines with start/end markers and a scale bar.
"""

import numpy as np

_COLORS = ("#b58900", "#2aa198", "#dc322f", "#6c71c4", "#859900")


def _fmt(x: float) -> str:
    return format(float(x), ".2f")


def render_svg(named_paths, width: int = 720, height: int = 720, margin: float = 40.0,
               title: str | None = None) -> str:
    """Render (label, points) pairs as an equal-axis top-down SVG drawing.

    ``points`` may be (N,2) or (N,3); only x and y are drawn. Returns the
    SVG document as a string.
    """
    named_paths = [(label, np.asarray(pts, dtype=float)) for label, pts in named_paths]
    xs = np.concatenate([p[:, 0] for _, p in named_paths])
    ys = np.concatenate([p[:, 1] for _, p in named_paths])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    span = max(x1 - x0, y1 - y0, 1e-9)
    # one scale for both axes, centred in the drawing area
    usable_w = width - 2 * margin
    usable_h = height - 2 * margin
    scale = min(usable_w, usable_h) / span
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)

    def to_px(p):
        px = width / 2 + (p[0] - cx) * scale
        py = height / 2 - (p[1] - cy) * scale  # flip: SVG y grows downward
        return px, py

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        lines.append(f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="14">{title}</text>')

    for i, (label, pts) in enumerate(named_paths):
        color = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in (to_px(p) for p in pts))
        lines.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5" stroke-linejoin="round"/>')
        sx, sy = to_px(pts[0])
        ex, ey = to_px(pts[-1])
        lines.append(f'<circle cx="{_fmt(sx)}" cy="{_fmt(sy)}" r="4" fill="{color}"/>')
        lines.append(f'<rect x="{_fmt(ex - 3.5)}" y="{_fmt(ey - 3.5)}" width="7" height="7" '
                     f'fill="none" stroke="{color}" stroke-width="1.5"/>')
        ty = 20 + 16 * (i + 1)
        lines.append(f'<line x1="{margin:.0f}" y1="{ty - 4}" x2="{margin + 24:.0f}" y2="{ty - 4}" '
                     f'stroke="{color}" stroke-width="3"/>')
        lines.append(f'<text x="{margin + 30:.0f}" y="{ty}" font-family="sans-serif" '
                     f'font-size="12">{label}</text>')

    # scale bar: a round number close to a fifth of the span
    target = span / 5
    bar = 10.0 ** np.floor(np.log10(target))
    for mult in (5.0, 2.0, 1.0):
        if mult * bar <= target:
            bar *= mult
            break
    bx, by = margin, height - margin / 2
    lines.append(f'<line x1="{_fmt(bx)}" y1="{_fmt(by)}" x2="{_fmt(bx + bar * scale)}" '
                 f'y2="{_fmt(by)}" stroke="black" stroke-width="2"/>')
    bar_label = f"{bar:g} m"
    lines.append(f'<text x="{_fmt(bx + bar * scale / 2)}" y="{_fmt(by - 6)}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12">{bar_label}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def save_svg(path, named_paths, **kwargs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_svg(named_paths, **kwargs))
