"""Minimal SVG line charts for cost curves, no plotting library required."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .cost import CostCurve

WIDTH = 720
PANEL_HEIGHT = 170
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 30
PANEL_GAP = 40
TICKS = 5


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _label(v: float) -> str:
    if v == 0 or 1e-3 <= abs(v) < 1e5:
        return f"{v:.4g}"
    return f"{v:.2e}"


class _Panel:
    def __init__(self, top: float, xs, ys, x_lo, x_hi):
        self.top = top
        self.xs = xs
        self.ys = ys
        self.x_lo, self.x_hi = x_lo, x_hi
        lo, hi = min(ys), max(ys)
        if hi == lo:
            pad = abs(hi) * 0.05 or 1.0
            lo, hi = lo - pad, hi + pad
        self.y_lo, self.y_hi = lo, hi
        self.left = MARGIN_LEFT
        self.right = WIDTH - MARGIN_RIGHT
        self.bottom = top + PANEL_HEIGHT

    def x(self, v):
        span = (self.x_hi - self.x_lo) or 1
        return self.left + (v - self.x_lo) / span * (self.right - self.left)

    def y(self, v):
        return self.bottom - (v - self.y_lo) / (self.y_hi - self.y_lo) * PANEL_HEIGHT


def curve_svg(curve: CostCurve, title: str | None = None) -> str:
    """Four stacked panels: t1, t2, t3 and the weighted cost, with n* starred."""
    ns = curve.ns
    series = [
        ("t1 (vocabulary size)", [p.terms.t1 for p in curve.grid], "#1f77b4"),
        ("t2 (f+/f- - 1)", [p.terms.t2 for p in curve.grid], "#2ca02c"),
        ("t3 (theta_t/w - 1)", [p.terms.t3 for p in curve.grid], "#9467bd"),
        ("cost, alphas=" + ",".join(f"{a:g}" for a in curve.alphas.as_tuple()),
         curve.costs, "#000000"),
    ]
    height = MARGIN_TOP + len(series) * (PANEL_HEIGHT + PANEL_GAP) + 10
    title = title or f"{curve.tokenizer_kind}: n*={curve.n_star}"
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{height}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    x_lo, x_hi = min(ns), max(ns)
    for i, (name, ys, color) in enumerate(series):
        top = MARGIN_TOP + i * (PANEL_HEIGHT + PANEL_GAP) + 15
        panel = _Panel(top, ns, ys, x_lo, x_hi)
        out.append(f'<g class="panel" id="panel-{i}">')
        out.append(f'<rect x="{panel.left}" y="{_fmt(top)}" width="{panel.right - panel.left}" '
                   f'height="{PANEL_HEIGHT}" fill="none" stroke="#888888"/>')
        out.append(f'<text x="{panel.left}" y="{_fmt(top - 4)}">{escape(name)}</text>')
        for t in range(TICKS + 1):
            yv = panel.y_lo + (panel.y_hi - panel.y_lo) * t / TICKS
            yp = panel.y(yv)
            out.append(f'<line x1="{panel.left - 4}" y1="{_fmt(yp)}" x2="{panel.left}" '
                       f'y2="{_fmt(yp)}" stroke="#888888"/>')
            out.append(f'<text x="{panel.left - 6}" y="{_fmt(yp + 4)}" '
                       f'text-anchor="end">{_label(yv)}</text>')
            xv = x_lo + (x_hi - x_lo) * t / TICKS
            xp = panel.x(xv)
            out.append(f'<line x1="{_fmt(xp)}" y1="{_fmt(panel.bottom)}" x2="{_fmt(xp)}" '
                       f'y2="{_fmt(panel.bottom + 4)}" stroke="#888888"/>')
            out.append(f'<text x="{_fmt(xp)}" y="{_fmt(panel.bottom + 15)}" '
                       f'text-anchor="middle">{round(xv)}</text>')
        pts = " ".join(f"{_fmt(panel.x(a))},{_fmt(panel.y(b))}" for a, b in zip(ns, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if i == len(series) - 1:
            star = curve.point(curve.n_star)
            out.append(f'<text class="nstar" x="{_fmt(panel.x(star.n))}" '
                       f'y="{_fmt(panel.y(star.cost) + 8)}" text-anchor="middle" '
                       f'font-size="24" fill="#ff0000">*</text>')
            out.append(f'<text x="{panel.right}" y="{_fmt(top - 4)}" text-anchor="end" '
                       f'fill="#ff0000">n*={curve.n_star}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_curve_svg(curve: CostCurve, path, title: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(curve_svg(curve, title))
