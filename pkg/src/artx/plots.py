"""Dependency-free SVG line charts of suite aggregates."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .harness import AGG_HEADER

COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"]
CHARTS = {
    "extrinsic": ("Extrinsic score per episode", True),
    "intrinsic": ("Intrinsic reward per episode", False),
    "length": ("Episode length", False),
    "categories": ("ART categories", False),
}
W, H = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 40, 50


class PlotParseError(ValueError):
    pass


def _num(text: str, lineno: int, col: str) -> float:
    try:
        return float(text) if text != "" else math.nan
    except ValueError:
        raise PlotParseError(f"line {lineno}: column {col!r} holds non-numeric value {text!r}") from None


def load_aggregate(path: str | Path) -> dict[str, list[dict[str, float]]]:
    """Parse an aggregate CSV into per-variant row lists (note rows skipped)."""
    series: dict[str, list[dict[str, float]]] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotParseError("line 1: empty file, expected aggregate header") from None
        if header != AGG_HEADER:
            raise PlotParseError(f"line 1: header {header} does not match {AGG_HEADER}")
        for lineno, rec in enumerate(reader, 2):
            if len(rec) != len(header):
                raise PlotParseError(f"line {lineno}: expected {len(header)} fields, got {len(rec)}")
            row = dict(zip(header, rec))
            if row["note"] and row["iteration"] == "":
                continue
            values = {k: _num(v, lineno, k) for k, v in row.items() if k not in ("variant", "note")}
            series.setdefault(row["variant"], []).append(values)
    return series


def band_series(rows: list[dict[str, float]], stem: str = "extrinsic"):
    """(x, lower, mean, upper) lists for a mean +/- 1 std band, NaN rows dropped."""
    xs, lo, mid, hi = [], [], [], []
    for r in rows:
        m, s = r[f"{stem}_mean"], r[f"{stem}_std"]
        if math.isnan(m):
            continue
        s = 0.0 if math.isnan(s) else s
        xs.append(r["env_steps"])
        lo.append(m - s)
        mid.append(m)
        hi.append(m + s)
    return xs, lo, mid, hi


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_chart(series: dict[str, list[dict[str, float]]], stem: str, title: str, band: bool) -> str:
    curves = {v: band_series(rows, stem) for v, rows in series.items()}
    xs = [x for c in curves.values() for x in c[0]]
    ys = [y for c in curves.values() for y in (c[1] + c[3] if band else c[2])]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        return TOP + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line class="axis" x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line class="axis" x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
        f'<text x="{LEFT + pw / 2:.1f}" y="{H - 12}" text-anchor="middle" font-size="12">environment steps</text>',
        f'<text x="16" y="{TOP + ph / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.1f})">{escape(title)}</text>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{px(t):.1f}" y="{TOP + ph + 16}" text-anchor="middle" font-size="10">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{LEFT - 6}" y="{py(t) + 3:.1f}" text-anchor="end" font-size="10">{t:.3g}</text>')
    for i, (variant, (cx, lo, mid, hi)) in enumerate(curves.items()):
        color = COLORS[i % len(COLORS)]
        if cx and band:
            pts = [(px(x), py(y)) for x, y in zip(cx, hi)] + [(px(x), py(y)) for x, y in zip(cx[::-1], lo[::-1])]
            out.append(
                f'<polygon class="band" data-variant="{escape(variant)}" fill="{color}" fill-opacity="0.2" '
                f'stroke="none" points="{" ".join(f"{a:.2f},{b:.2f}" for a, b in pts)}"/>'
            )
        if cx:
            pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(cx, mid))
            out.append(
                f'<polyline class="mean" data-variant="{escape(variant)}" fill="none" stroke="{color}" '
                f'stroke-width="1.5" points="{pts}"/>'
            )
        ly = TOP + 14 + 18 * i
        out.append(f'<rect x="{W - RIGHT + 12}" y="{ly - 9}" width="12" height="10" fill="{color}"/>')
        out.append(f'<text x="{W - RIGHT + 30}" y="{ly}" font-size="11">{escape(variant)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plots(aggregate_csv: str | Path, out_dir: str | Path) -> list[Path]:
    series = load_aggregate(aggregate_csv)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for stem, (title, band) in CHARTS.items():
        p = out / f"{stem}.svg"
        p.write_text(line_chart(series, stem, title, band))
        paths.append(p)
    return paths
