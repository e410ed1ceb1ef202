"""Hand-rolled SVG output so plot bytes are a pure function of the data.

Fixed canvas 800x500 with a 60/20/30/50 margin box; coordinates printed
with 6 decimals.  No external plotting dependency, no timestamps, no ids.
"""

from __future__ import annotations

from .semicircle import SemicircleParams, density

WIDTH, HEIGHT = 800, 500
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 60, 20, 30, 50
CURVE_POINTS = 400


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def render_histogram_svg(bars: list[tuple[float, float]], sigma: float,
                         title: str = "eigenvalue density") -> str:
    """Histogram bars (center, density) overlaid with the semicircle curve."""
    if not bars:
        raise ValueError("no histogram data")
    params = SemicircleParams(sigma)
    width = bars[1][0] - bars[0][0] if len(bars) > 1 else 4.0 * sigma
    x_min = bars[0][0] - width / 2.0
    x_max = bars[-1][0] + width / 2.0
    y_max = max(max(d for _, d in bars), density(0.0, params)) * 1.1 or 1.0

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x: float) -> float:
        return MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w

    def sy(y: float) -> float:
        return MARGIN_TOP + (1.0 - y / y_max) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{title}</text>',
    ]
    for center, dens in bars:
        x0 = sx(center - width / 2.0)
        x1 = sx(center + width / 2.0)
        y0 = sy(dens)
        parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
            f'height="{_fmt(sy(0.0) - y0)}" fill="#9ecae1" stroke="#3182bd" '
            f'stroke-width="0.5"/>')
    pts = []
    for i in range(CURVE_POINTS + 1):
        x = x_min + (x_max - x_min) * i / CURVE_POINTS
        pts.append(f"{_fmt(sx(x))},{_fmt(sy(density(x, params)))}")
    parts.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                 f'stroke="#de2d26" stroke-width="1.5"/>')
    # axes
    parts.append(f'<line x1="{MARGIN_LEFT}" y1="{sy(0.0)}" x2="{WIDTH - MARGIN_RIGHT}" '
                 f'y2="{sy(0.0)}" stroke="black" stroke-width="1"/>')
    parts.append(f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" '
                 f'y2="{sy(0.0)}" stroke="black" stroke-width="1"/>')
    for tick in range(int(x_min) - 1, int(x_max) + 2):
        if x_min <= tick <= x_max:
            parts.append(f'<line x1="{_fmt(sx(tick))}" y1="{sy(0.0)}" '
                         f'x2="{_fmt(sx(tick))}" y2="{sy(0.0) + 5}" stroke="black" '
                         f'stroke-width="1"/>')
            parts.append(f'<text x="{_fmt(sx(tick))}" y="{sy(0.0) + 18}" '
                         f'text-anchor="middle" font-family="monospace" '
                         f'font-size="11">{tick}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
