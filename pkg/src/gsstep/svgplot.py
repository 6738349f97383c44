"""Minimal SVG bar charts of MAE versus noise level, one chart per case.

Each bar is the median absolute step error of a (pre-filter, estimator)
series at one noise level; whiskers span the 25th to 75th percentile.
Groups whose trials all failed get a cross on the baseline.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .harness import MaeSummary
from .synth import Case

WIDTH, HEIGHT = 720, 420
MARGIN = dict(left=70, right=170, top=40, bottom=60)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _nice_max(v: float) -> float:
    if v <= 0 or not math.isfinite(v):
        return 1.0
    exp = 10 ** math.floor(math.log10(v))
    for m in (1, 2, 2.5, 5, 10):
        if v <= m * exp:
            return m * exp
    return 10 * exp


def render_case_chart(case: Case, summaries: Sequence[MaeSummary]) -> str:
    rows = [s for s in summaries if s.case is Case(case)]
    if not rows:
        raise ValueError(f"no summaries for case {Case(case).value}")
    series = sorted({(s.prefilter, s.estimator) for s in rows},
                    key=lambda k: (list(type(k[0])).index(k[0]), list(type(k[1])).index(k[1])))
    sigmas = sorted({s.sigma for s in rows})
    lookup = {(s.prefilter, s.estimator, s.sigma): s for s in rows}
    finite = [v for s in rows for v in (s.q75, s.mae_median) if math.isfinite(v)]
    ymax = _nice_max(max(finite, default=1.0))

    x0, y0 = MARGIN["left"], HEIGHT - MARGIN["bottom"]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    group_w = pw / len(sigmas)
    bar_w = 0.8 * group_w / len(series)

    def ypix(v):
        return y0 - ph * min(v, ymax) / ymax

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{x0 + pw / 2:.1f}" y="22" text-anchor="middle" font-size="15">'
        f'Case {Case(case).value}: step error vs noise</text>',
    ]
    for k in range(6):
        v = ymax * k / 5
        y = ypix(v)
        out.append(f'<line x1="{x0}" y1="{y:.1f}" x2="{x0 + pw}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{x0 - 6}" y="{y + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + pw}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y0 - ph}" stroke="black"/>')
    out.append(f'<text x="{x0 + pw / 2:.1f}" y="{HEIGHT - 18}" text-anchor="middle">noise sigma</text>')
    out.append(f'<text transform="translate(18 {y0 - ph / 2:.1f}) rotate(-90)" '
               f'text-anchor="middle">|delta_hat - delta| (rad)</text>')

    for gi, sigma in enumerate(sigmas):
        gx = x0 + gi * group_w
        out.append(f'<text x="{gx + group_w / 2:.1f}" y="{y0 + 16}" text-anchor="middle">{sigma:.2f}</text>')
        for si, (pf, est) in enumerate(series):
            s = lookup.get((pf, est, sigma))
            if s is None:
                continue
            color = COLORS[si % len(COLORS)]
            bx = gx + 0.1 * group_w + si * bar_w
            cx = bx + bar_w / 2
            if s.all_failed:
                d = bar_w / 3
                out.append(f'<path d="M{cx - d:.1f} {y0 - 2 - d:.1f} l{2 * d:.1f} {2 * d:.1f} '
                           f'm0 {-2 * d:.1f} l{-2 * d:.1f} {2 * d:.1f}" stroke="{color}" fill="none"/>')
                continue
            top = ypix(s.mae_median)
            out.append(f'<rect x="{bx:.1f}" y="{top:.1f}" width="{bar_w:.1f}" '
                       f'height="{y0 - top:.1f}" fill="{color}" fill-opacity="0.75"/>')
            out.append(f'<line x1="{cx:.1f}" y1="{ypix(s.q25):.1f}" x2="{cx:.1f}" '
                       f'y2="{ypix(s.q75):.1f}" stroke="black"/>')

    lx = x0 + pw + 16
    for si, (pf, est) in enumerate(series):
        ly = MARGIN["top"] + 10 + 20 * si
        label = escape(f"{pf.value} / {est.value}")
        out.append(f'<rect x="{lx}" y="{ly - 10}" width="12" height="12" '
                   f'fill="{COLORS[si % len(COLORS)]}" fill-opacity="0.75"/>')
        out.append(f'<text x="{lx + 18}" y="{ly}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def chart_paths(out: Path, cases: Sequence[Case]) -> dict:
    """One chart keeps ``out``; several get a ``_case-<id>`` suffix each."""
    out = Path(out)
    if len(cases) == 1:
        return {cases[0]: out}
    suffix = out.suffix or ".svg"
    return {c: out.with_name(f"{out.stem}_case-{c.value}{suffix}") for c in cases}


def write_charts(out, summaries: Sequence[MaeSummary]) -> list[Path]:
    if not summaries:
        raise ValueError("nothing to plot: no result rows")
    cases = sorted({s.case for s in summaries}, key=list(Case).index)
    rendered = {c: render_case_chart(c, summaries) for c in cases}
    written = []
    for case, path in chart_paths(Path(out), cases).items():
        path.write_text(rendered[case], encoding="utf-8")
        written.append(path)
    return written
