"""Minimal static SVG 1.1 plots rendered from experiment CSV columns.

Plots are never a source of truth: ``plot_experiment`` reads only the
columns of ``data.csv``, so regenerating from the file gives the same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from abclab.artifacts import float_column

PANEL_W, PANEL_H, MARGIN = 360, 300, 50
COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _f(v: float) -> str:
    return f"{v:.2f}"


@dataclass
class Panel:
    title: str
    xlabel: str
    ylabel: str
    points: list = field(default_factory=list)  # (x, y, colour)
    lines: list = field(default_factory=list)  # (xs, ys, colour, dashed)
    bars: list = field(default_factory=list)  # (left, right, height, colour)
    diagonal: bool = False
    hlines: list = field(default_factory=list)  # (y, colour, label)
    logx: bool = False

    def _bounds(self):
        xs, ys = [], []
        for x, y, _ in self.points:
            xs.append(x)
            ys.append(y)
        for lx, ly, _, _ in self.lines:
            xs += list(lx)
            ys += list(ly)
        for left, right, h, _ in self.bars:
            xs += [left, right]
            ys += [0.0, h]
        ys += [h for h, _, _ in self.hlines]
        if self.logx:
            xs = [math.log10(x) for x in xs]
        if not xs:
            return (0.0, 1.0, 0.0, 1.0)
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        if self.diagonal:
            x0 = y0 = min(x0, y0)
            x1 = y1 = max(x1, y1)
        if x1 == x0:
            x0, x1 = x0 - 1, x1 + 1
        if y1 == y0:
            y0, y1 = y0 - 1, y1 + 1
        pad_x, pad_y = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
        return x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y

    def render(self, ox: float) -> list[str]:
        x0, x1, y0, y1 = self._bounds()
        w, h = PANEL_W - 2 * MARGIN, PANEL_H - 2 * MARGIN

        def px(x):
            if self.logx:
                x = math.log10(x)
            return ox + MARGIN + (x - x0) / (x1 - x0) * w

        def py(y):
            return MARGIN + (y1 - y) / (y1 - y0) * h

        out = [
            f'<rect x="{_f(ox + MARGIN)}" y="{MARGIN}" width="{w}" height="{h}" fill="none" stroke="black"/>',
            f'<text x="{_f(ox + PANEL_W / 2)}" y="{MARGIN - 15}" text-anchor="middle">{escape(self.title)}</text>',
            f'<text x="{_f(ox + PANEL_W / 2)}" y="{PANEL_H - 10}" text-anchor="middle">{escape(self.xlabel)}</text>',
            f'<text x="{_f(ox + 12)}" y="{PANEL_H / 2}" text-anchor="middle" '
            f'transform="rotate(-90 {_f(ox + 12)} {PANEL_H / 2})">{escape(self.ylabel)}</text>',
        ]
        for val, anchor_x in ((x0, "start"), (x1, "end")):
            shown = 10**val if self.logx else val
            x = ox + MARGIN if anchor_x == "start" else ox + MARGIN + w
            out.append(f'<text x="{_f(x)}" y="{MARGIN + h + 15}" text-anchor="{anchor_x}" font-size="10">{shown:.3g}</text>')
        for val, y in ((y0, MARGIN + h), (y1, MARGIN + 10)):
            out.append(f'<text x="{_f(ox + MARGIN - 3)}" y="{_f(y)}" text-anchor="end" font-size="10">{val:.3g}</text>')
        for left, right, height, colour in self.bars:
            top = py(height)
            out.append(
                f'<rect x="{_f(px(left))}" y="{_f(top)}" width="{_f(px(right) - px(left))}" '
                f'height="{_f(py(0.0) - top)}" fill="{colour}" stroke="white" stroke-width="0.5"/>'
            )
        if self.diagonal:
            lo, hi = max(x0, y0), min(x1, y1)
            out.append(
                f'<line x1="{_f(px(lo))}" y1="{_f(py(lo))}" x2="{_f(px(hi))}" y2="{_f(py(hi))}" stroke="red" stroke-width="1.5"/>'
            )
        for yv, colour, label in self.hlines:
            out.append(
                f'<line x1="{_f(ox + MARGIN)}" y1="{_f(py(yv))}" x2="{_f(ox + MARGIN + w)}" y2="{_f(py(yv))}" '
                f'stroke="{colour}" stroke-dasharray="4 3"/>'
            )
            out.append(f'<text x="{_f(ox + MARGIN + w - 3)}" y="{_f(py(yv) - 3)}" text-anchor="end" font-size="10" fill="{colour}">{escape(label)}</text>')
        for lx, ly, colour, dashed in self.lines:
            pts = " ".join(f"{_f(px(a))},{_f(py(b))}" for a, b in zip(lx, ly))
            dash = ' stroke-dasharray="4 3"' if dashed else ""
            out.append(f'<polyline points="{pts}" fill="none" stroke="{colour}"{dash}/>')
            out += [f'<circle cx="{_f(px(a))}" cy="{_f(py(b))}" r="2.5" fill="{colour}"/>' for a, b in zip(lx, ly)]
        for x, y, colour in self.points:
            out.append(f'<circle cx="{_f(px(x))}" cy="{_f(py(y))}" r="1.5" fill="{colour}" fill-opacity="0.5"/>')
        return out


def render(panels: list[Panel]) -> str:
    width = PANEL_W * len(panels)
    body = []
    for i, p in enumerate(panels):
        body += p.render(i * PANEL_W)
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{PANEL_H}" '
        'font-family="sans-serif" font-size="12">\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def scatter(title, xlabel, ylabel, x, y, diagonal=False, colour=COLOURS[0]) -> Panel:
    p = Panel(title, xlabel, ylabel, diagonal=diagonal)
    p.points = [(float(a), float(b), colour) for a, b in zip(x, y) if math.isfinite(a) and math.isfinite(b)]
    return p


def histogram(title, xlabel, values, bins=40, colour=COLOURS[0]) -> Panel:
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    p = Panel(title, xlabel, "count")
    p.bars = [(float(edges[i]), float(edges[i + 1]), float(c), colour) for i, c in enumerate(counts)]
    return p


def _select(columns, key, value):
    return [i for i, v in enumerate(columns[key]) if v == value]


def _plot_grf(c):
    return [scatter("ABC vs exact", "log BF (exact)", "log BF (ABC, eps=0)",
                    float_column(c, "log_bf_exact"), float_column(c, "log_bf_abc"), diagonal=True)]


def _plot_poisgeom(c):
    true, summ = float_column(c, "log_bf"), float_column(c, "log_bf_summary")
    panels = []
    for law in ("poisson", "geometric"):
        idx = _select(c, "law", law)
        panels.append(scatter(f"{law} data", "log B12", "log B12 (summary)", true[idx], summ[idx], diagonal=True))
    return panels


def _plot_normal(c):
    vals = float_column(c, "log_ratio")
    return [histogram(f"{law} data", "log g1/g2", vals[_select(c, "law", law)], colour=COLOURS[k])
            for k, law in enumerate(("model1", "model2"))]


def _plot_limits(c):
    n, v = float_column(c, "n"), float_column(c, "log_bf_summary")
    paper, derived = float_column(c, "paper_constant"), float_column(c, "derived_constant")
    p1 = Panel("count pair", "n", "log B12 (summary)", logx=True)
    for k, mode in enumerate(("poisgeom_derived", "poisgeom_paper")):
        idx = _select(c, "study", mode)
        if idx:
            p1.lines.append((n[idx], v[idx], COLOURS[k], False))
    idx = _select(c, "study", "poisgeom_derived")
    if idx:
        p1.hlines = [(derived[idx[0]], COLOURS[0], "derived limit"), (paper[idx[0]], COLOURS[1], "stated limit")]
    p2 = Panel("normal pair", "n", "log B12 (summary)", logx=True)
    idx = _select(c, "study", "normal_derived")
    if idx:
        p2.lines.append((n[idx], v[idx], COLOURS[2], False))
        p2.hlines = [(0.0, "black", "limit 0")]
    return [p1, p2]


def _plot_ma(c):
    qcols = [k for k in c if k.startswith("log_bf_abc_")]
    exact = float_column(c, "log_bf_exact")
    last = float_column(c, qcols[-1])
    return [scatter("MA(2) vs MA(1)", "log BF (exact)", f"log BF (ABC, {qcols[-1][11:]})", exact, last, diagonal=True)]


PLOTTERS = {
    "grf": _plot_grf,
    "poisgeom": _plot_poisgeom,
    "normal": _plot_normal,
    "limits": _plot_limits,
    "ma": _plot_ma,
}


def plot_experiment(name: str, columns) -> str:
    """SVG document for an experiment, from its ``data.csv`` columns."""
    return render(PLOTTERS[name](columns))
