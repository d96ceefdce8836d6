"""Figures from a results CSV, drawn with a small SVG writer."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

from ..errors import SchemaError
from .results import read_csv

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 20, 40, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")

FIGURES = (
    "fig1_err_vs_walls.svg",
    "fig2_lambda2_vs_walls.svg",
    "fig3_err_vs_k.svg",
    "fig4_err_gdo_vs_lambda2.svg",
    "fig5_err_exact_vs_lambda2.svg",
)


@dataclass
class Series:
    label: str
    x: list
    y: list
    lo: list | None = None
    hi: list | None = None
    markers: bool = False


@dataclass
class Figure:
    title: str
    xlabel: str
    ylabel: str
    logy: bool = False
    series: list = field(default_factory=list)

    def _ty(self, y):
        return math.log10(y) if self.logy else y

    def _ranges(self):
        xs, ys = [], []
        for s in self.series:
            xs += s.x
            for arr in (s.y, s.lo, s.hi):
                if arr:
                    ys += [v for v in arr if not self.logy or v > 0]
        if not xs or not ys:
            return (0.0, 1.0), (0.0, 1.0)
        x0, x1 = min(xs), max(xs)
        y0, y1 = self._ty(min(ys)), self._ty(max(ys))
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            pad = abs(y0) * 0.1 or 0.5
            y0, y1 = y0 - pad, y1 + pad
        return (x0, x1), (y0, y1)

    def render(self) -> str:
        (x0, x1), (y0, y1) = self._ranges()
        pw = WIDTH - MARGIN_L - MARGIN_R
        ph = HEIGHT - MARGIN_T - MARGIN_B

        def px(x):
            return MARGIN_L + (x - x0) / (x1 - x0) * pw

        def py(y):
            return MARGIN_T + ph - (self._ty(y) - y0) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">{escape(self.title)}</text>',
            f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        ]
        for i in range(6):
            xv = x0 + (x1 - x0) * i / 5
            out.append(
                f'<text x="{px(xv):.1f}" y="{MARGIN_T + ph + 18}" text-anchor="middle">{xv:.3g}</text>'
            )
            yt = y0 + (y1 - y0) * i / 5
            label = f"{10 ** yt:.3g}" if self.logy else f"{yt:.3g}"
            ypix = MARGIN_T + ph - (yt - y0) / (y1 - y0) * ph
            out.append(f'<text x="{MARGIN_L - 6}" y="{ypix + 4:.1f}" text-anchor="end">{label}</text>')
        out.append(
            f'<text x="{MARGIN_L + pw / 2}" y="{HEIGHT - 18}" text-anchor="middle">{escape(self.xlabel)}</text>'
        )
        out.append(
            f'<text x="18" y="{MARGIN_T + ph / 2}" text-anchor="middle" '
            f'transform="rotate(-90 18 {MARGIN_T + ph / 2})">{escape(self.ylabel)}</text>'
        )
        for idx, s in enumerate(self.series):
            color = COLORS[idx % len(COLORS)]
            keep = [i for i in range(len(s.x)) if not self.logy or s.y[i] > 0]
            if s.lo is not None and s.hi is not None and len(keep) > 1:
                upper = [f"{px(s.x[i]):.2f},{py(s.hi[i]):.2f}" for i in keep]
                lower = [f"{px(s.x[i]):.2f},{py(max(s.lo[i], 1e-300) if self.logy else s.lo[i]):.2f}" for i in reversed(keep)]
                out.append(f'<polygon points="{" ".join(upper + lower)}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
            pts = [f"{px(s.x[i]):.2f},{py(s.y[i]):.2f}" for i in keep]
            if len(pts) > 1 and not s.markers:
                out.append(f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            if len(pts) == 1 or s.markers:
                for p in pts:
                    cx, cy = p.split(",")
                    out.append(f'<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>')
            ly = MARGIN_T + 16 + 16 * idx
            out.append(f'<line x1="{MARGIN_L + 10}" y1="{ly - 4}" x2="{MARGIN_L + 30}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{MARGIN_L + 36}" y="{ly}">{escape(s.label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.render())


def _grouped(records, key, value):
    groups = defaultdict(list)
    for r in records:
        y = getattr(r, value)
        if y is not None and math.isfinite(y):
            groups[getattr(r, key)].append(y)
    xs = sorted(groups)
    mean = [sum(groups[x]) / len(groups[x]) for x in xs]
    lo = [min(groups[x]) for x in xs]
    hi = [max(groups[x]) for x in xs]
    return xs, mean, lo, hi


def _band(label, records, key, value, markers=False) -> Series:
    xs, mean, lo, hi = _grouped(records, key, value)
    return Series(label, xs, mean, lo, hi, markers)


def _versus_lambda2(records, value, label) -> Series:
    _, lam, _, _ = _grouped(records, "w", "lambda2")
    _, err, lo, hi = _grouped(records, "w", value)
    order = sorted(range(len(lam)), key=lam.__getitem__)
    return Series(label, [lam[i] for i in order], [err[i] for i in order],
                  [lo[i] for i in order], [hi[i] for i in order], markers=True)


def render_plots(csv_path, out_dir) -> list[Path]:
    records = [r for r in read_csv(csv_path) if r.error is None]
    if not records:
        raise SchemaError(f"{csv_path}: no successful records to plot")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    k_main = max({r.k for r in records}, key=lambda k: sum(r.k == k for r in records))
    at_k = [r for r in records if r.k == k_main]
    w_main = min({r.w for r in records})
    at_w = [r for r in records if r.w == w_main]
    figs = [
        Figure("Value error vs walls", "walls w", "||v - v_k||_Phi", series=[
            _band(f"exact eigenvectors (k={k_main})", at_k, "w", "err_exact"),
            _band(f"GDO features (k={k_main})", at_k, "w", "err_gdo"),
        ]),
        Figure("Algebraic connectivity vs walls", "walls w", "lambda_2", logy=True,
               series=[_band("lambda_2", at_k, "w", "lambda2")]),
        Figure("Exact-basis error vs k", "k", "||v - v_k||_Phi", logy=True,
               series=[_band(f"exact eigenvectors (w={w_main})", at_w, "k", "err_exact")]),
        Figure("GDO error vs lambda_2", "lambda_2", "||v - v_hat_k||_Phi",
               series=[_versus_lambda2(at_k, "err_gdo", "GDO features")]),
        Figure("Exact-basis error vs lambda_2", "lambda_2", "||v - v_k||_Phi",
               series=[_versus_lambda2(at_k, "err_exact", "exact eigenvectors")]),
    ]
    paths = []
    for name, fig in zip(FIGURES, figs):
        path = out / name
        fig.save(path)
        paths.append(path)
    return paths
