"""
Self-contained SVG charts. Every bar and point carries its number in a
`data-value` attribute so callers can read values back without rasterizing.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from html import escape
from pathlib import Path

from lib.atomic_io import write_text_atomic

FONT = "Arial, Helvetica, sans-serif"
PALETTE = ("#2563EB", "#EAB308", "#16A34A", "#7C3AED", "#DC2626", "#0891B2", "#8B4513", "#64748B")

WIDTH, HEIGHT = 900, 520
PAD_LEFT, PAD_RIGHT, PAD_TOP, PAD_BOTTOM = 70, 70, 60, 90


def format_number(value: float | None) -> str:
    """Shared two-decimal format for charts and console tables. None renders empty."""
    return "" if value is None else f"{value:.2f}"


@dataclass(frozen=True)
class Series:
    name: str
    values: Sequence[float | None]
    axis: str = "primary"


def _attr(value: object) -> str:
    return escape(str(value), quote=True)


def _open(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="{FONT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#FFFFFF"/>',
        f'<text x="{WIDTH / 2}" y="30" font-size="18" font-weight="700" text-anchor="middle" '
        f'fill="#1E293B">{escape(title)}</text>',
    ]


def _nice_max(values: Sequence[float]) -> float:
    top = max((v for v in values), default=0.0)
    return top * 1.1 if top > 0 else 1.0


def _axes(y_max: float, y_label: str, *, right: bool = False) -> list[str]:
    plot_h = HEIGHT - PAD_TOP - PAD_BOTTOM
    x = WIDTH - PAD_RIGHT if right else PAD_LEFT
    anchor = "start" if right else "end"
    dx = 8 if right else -8
    out = [f'<line x1="{x}" y1="{PAD_TOP}" x2="{x}" y2="{HEIGHT - PAD_BOTTOM}" stroke="#94A3B8"/>']
    for k in range(6):
        value = y_max * k / 5
        y = HEIGHT - PAD_BOTTOM - plot_h * k / 5
        if not right:
            out.append(f'<line x1="{PAD_LEFT}" y1="{y:.1f}" x2="{WIDTH - PAD_RIGHT}" y2="{y:.1f}" stroke="#EEEEEE"/>')
        out.append(
            f'<text x="{x + dx}" y="{y + 4:.1f}" font-size="11" text-anchor="{anchor}" '
            f'fill="#64748B">{format_number(value)}</text>'
        )
    if y_label:
        lx = WIDTH - 15 if right else 15
        out.append(
            f'<text x="{lx}" y="{HEIGHT / 2}" font-size="12" text-anchor="middle" fill="#1E293B" '
            f'transform="rotate(-90 {lx} {HEIGHT / 2})">{escape(y_label)}</text>'
        )
    return out


def _x_labels(labels: Sequence[str], centers: Sequence[float], x_label: str) -> list[str]:
    out = []
    for label, cx in zip(labels, centers):
        out.append(
            f'<text x="{cx:.1f}" y="{HEIGHT - PAD_BOTTOM + 18}" font-size="11" text-anchor="middle" '
            f'fill="#1E293B">{escape(str(label))}</text>'
        )
    out.append(f'<line x1="{PAD_LEFT}" y1="{HEIGHT - PAD_BOTTOM}" x2="{WIDTH - PAD_RIGHT}" '
               f'y2="{HEIGHT - PAD_BOTTOM}" stroke="#94A3B8"/>')
    if x_label:
        out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - PAD_BOTTOM + 45}" font-size="12" '
                   f'text-anchor="middle" fill="#1E293B">{escape(x_label)}</text>')
    return out


def _legend(names: Sequence[str]) -> list[str]:
    out = []
    for k, name in enumerate(names):
        x = PAD_LEFT + (k % 4) * 200
        y = HEIGHT - 30 + (k // 4) * 14
        color = PALETTE[k % len(PALETTE)]
        out.append(f'<rect x="{x}" y="{y - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{x + 14}" y="{y}" font-size="11" fill="#1E293B">{escape(name)}</text>')
    return out


def bar_chart(title: str, labels: Sequence[str], series: Sequence[Series], *, x_label: str = "", y_label: str = "") -> str:
    """Grouped vertical bars, one group per label and one bar per series."""
    svg = _open(title)
    values = [v for s in series for v in s.values if v is not None]
    y_max = _nice_max(values)
    plot_w = WIDTH - PAD_LEFT - PAD_RIGHT
    plot_h = HEIGHT - PAD_TOP - PAD_BOTTOM
    slot = plot_w / max(len(labels), 1)
    bar_w = slot * 0.8 / max(len(series), 1)

    svg += _axes(y_max, y_label)
    centers = []
    for i, label in enumerate(labels):
        x0 = PAD_LEFT + i * slot + slot * 0.1
        centers.append(PAD_LEFT + (i + 0.5) * slot)
        for k, s in enumerate(series):
            value = s.values[i]
            if value is None:
                continue
            h = max(plot_h * value / y_max, 0.0)
            svg.append(
                f'<rect x="{x0 + k * bar_w:.1f}" y="{HEIGHT - PAD_BOTTOM - h:.1f}" width="{bar_w:.1f}" '
                f'height="{h:.1f}" fill="{PALETTE[k % len(PALETTE)]}" data-series="{_attr(s.name)}" '
                f'data-label="{_attr(label)}" data-value="{format_number(value)}"/>'
            )
    svg += _x_labels([str(lb) for lb in labels], centers, x_label)
    if len(series) > 1:
        svg += _legend([s.name for s in series])
    svg.append("</svg>")
    return "\n".join(svg) + "\n"


def line_chart(
    title: str,
    x_values: Sequence[object],
    series: Sequence[Series],
    *,
    x_label: str = "",
    y_label: str = "",
    y2_label: str = "",
) -> str:
    """One polyline per series over categorical x positions; series may use a secondary y axis."""
    svg = _open(title)
    primary = [v for s in series if s.axis == "primary" for v in s.values if v is not None]
    secondary = [v for s in series if s.axis == "secondary" for v in s.values if v is not None]
    maxima = {"primary": _nice_max(primary), "secondary": _nice_max(secondary)}
    plot_w = WIDTH - PAD_LEFT - PAD_RIGHT
    plot_h = HEIGHT - PAD_TOP - PAD_BOTTOM
    step = plot_w / max(len(x_values), 1)
    centers = [PAD_LEFT + (i + 0.5) * step for i in range(len(x_values))]

    svg += _axes(maxima["primary"], y_label)
    if secondary:
        svg += _axes(maxima["secondary"], y2_label, right=True)
    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        y_max = maxima[s.axis]
        dash = ' stroke-dasharray="6 3"' if s.axis == "secondary" else ""
        points = []
        for cx, x, value in zip(centers, x_values, s.values):
            if value is None:
                continue
            cy = HEIGHT - PAD_BOTTOM - plot_h * value / y_max
            points.append((cx, cy, x, value))
        if len(points) > 1:
            coords = " ".join(f"{cx:.1f},{cy:.1f}" for cx, cy, _, _ in points)
            svg.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"{dash}/>')
        for cx, cy, x, value in points:
            svg.append(
                f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="4" fill="{color}" data-series="{_attr(s.name)}" '
                f'data-axis="{s.axis}" data-x="{_attr(x)}" data-value="{format_number(value)}"/>'
            )
    svg += _x_labels([str(x) for x in x_values], centers, x_label)
    svg += _legend([s.name for s in series])
    svg.append("</svg>")
    return "\n".join(svg) + "\n"


def heatmap(
    title: str,
    row_labels: Sequence[str],
    col_labels: Sequence[str],
    cells: Sequence[Sequence[float | None]],
    *,
    x_label: str = "",
    y_label: str = "",
) -> str:
    """Matrix of shaded cells; darker is higher. Missing cells stay blank with an empty data-value."""
    svg = _open(title)
    values = [v for row in cells for v in row if v is not None]
    low, high = min(values, default=0.0), max(values, default=0.0)
    span = (high - low) or 1.0
    plot_w = WIDTH - PAD_LEFT - PAD_RIGHT - 80
    plot_h = HEIGHT - PAD_TOP - PAD_BOTTOM
    cell_w = plot_w / max(len(col_labels), 1)
    cell_h = plot_h / max(len(row_labels), 1)
    left = PAD_LEFT + 80

    for i, (row_label, row) in enumerate(zip(row_labels, cells)):
        y = PAD_TOP + i * cell_h
        svg.append(
            f'<text x="{left - 6}" y="{y + cell_h / 2 + 4:.1f}" font-size="11" text-anchor="end" '
            f'fill="#1E293B">{escape(str(row_label))}</text>'
        )
        for j, (col_label, value) in enumerate(zip(col_labels, row)):
            x = left + j * cell_w
            if value is None:
                fill, text = "none", ""
            else:
                shade = 0.15 + 0.85 * (value - low) / span
                fill, text = f"rgba(37,99,235,{shade:.3f})", format_number(value)
            svg.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{cell_w:.1f}" height="{cell_h:.1f}" fill="{fill}" '
                f'stroke="#CBD5E1" data-row="{_attr(row_label)}" data-col="{_attr(col_label)}" '
                f'data-value="{text}"/>'
            )
            if text:
                svg.append(
                    f'<text x="{x + cell_w / 2:.1f}" y="{y + cell_h / 2 + 4:.1f}" font-size="12" '
                    f'text-anchor="middle" fill="#0F172A">{text}</text>'
                )
    for j, col_label in enumerate(col_labels):
        svg.append(
            f'<text x="{left + (j + 0.5) * cell_w:.1f}" y="{HEIGHT - PAD_BOTTOM + 18}" font-size="11" '
            f'text-anchor="middle" fill="#1E293B">{escape(str(col_label))}</text>'
        )
    if x_label:
        svg.append(f'<text x="{left + plot_w / 2}" y="{HEIGHT - PAD_BOTTOM + 45}" font-size="12" '
                   f'text-anchor="middle" fill="#1E293B">{escape(x_label)}</text>')
    if y_label:
        svg.append(
            f'<text x="15" y="{HEIGHT / 2}" font-size="12" text-anchor="middle" fill="#1E293B" '
            f'transform="rotate(-90 15 {HEIGHT / 2})">{escape(y_label)}</text>'
        )
    svg.append("</svg>")
    return "\n".join(svg) + "\n"


def write_svg(path: str | Path, svg: str) -> Path:
    return write_text_atomic(path, svg)
