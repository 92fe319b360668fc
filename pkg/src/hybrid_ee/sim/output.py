"""CSV tables and SVG line charts for sweep results.

Floats are written with ``repr`` so a parsed CSV reproduces the rows
exactly. Charts are plain SVG polylines, one per (mode, scheme) series.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union
from xml.sax.saxutils import escape

from .sweep import ResultRow, Summary

RESULT_FIELDS = (
    "mode", "scheme", "value", "trial", "t_star_s", "m_star",
    "e_total_j", "ee_bit_per_j", "feasible", "powers_w",
)
SUMMARY_FIELDS = (
    "mode", "scheme", "value", "n", "excluded",
    "ee_mean", "ee_ci95", "t_star_mean_s", "t_star_ci95_s", "m_star_mean", "m_star_ci95", "single_trial",
)
PathLike = Union[str, Path]


def _num(v) -> str:
    return "" if v is None else repr(float(v)) if isinstance(v, float) else str(v)


def _row_cells(r: ResultRow) -> List[str]:
    return [
        r.mode,
        r.scheme,
        repr(float(r.value)),
        str(r.trial),
        _num(r.t_star),
        _num(r.m_star),
        _num(r.e_total),
        _num(r.ee),
        "true" if r.feasible else "false",
        ";".join(repr(float(p)) for p in r.powers),
    ]


def write_results_csv(path: PathLike, rows: Iterable[ResultRow]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(RESULT_FIELDS)
        for r in rows:
            writer.writerow(_row_cells(r))
    return path


def read_results_csv(path: PathLike) -> List[ResultRow]:
    path = Path(path)
    out = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_FIELDS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for rec in reader:
            opt = lambda key, cast: cast(rec[key]) if rec[key] != "" else None
            out.append(
                ResultRow(
                    mode=rec["mode"],
                    scheme=rec["scheme"],
                    value=float(rec["value"]),
                    trial=int(rec["trial"]),
                    t_star=opt("t_star_s", float),
                    m_star=opt("m_star", int),
                    e_total=opt("e_total_j", float),
                    ee=opt("ee_bit_per_j", float),
                    feasible=rec["feasible"] == "true",
                    powers=tuple(float(p) for p in rec["powers_w"].split(";") if p),
                )
            )
    return out


def write_summary_csv(path: PathLike, summaries: Iterable[Summary]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(SUMMARY_FIELDS)
        for s in summaries:
            writer.writerow([
                s.mode, s.scheme, repr(float(s.value)), s.n, s.excluded,
                repr(s.ee.mean), repr(s.ee.half_width),
                repr(s.t_star.mean), repr(s.t_star.half_width),
                repr(s.m_star.mean), repr(s.m_star.half_width),
                "true" if s.single_trial else "false",
            ])
    return path


# -- SVG -------------------------------------------------------------------------

WIDTH, HEIGHT = 720, 460
MARGIN = dict(left=90, right=200, top=40, bottom=60)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def nice_ticks(lo: float, hi: float, target: int = 5) -> List[float]:
    """Round-number tick positions covering ``[lo, hi]``."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi == lo:
        span = abs(lo) or 1.0
        lo, hi = lo - 0.5 * span, hi + 0.5 * span
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks, v = [], start
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 12))
        v += step
    if ticks[-1] < hi:
        ticks.append(round(v, 12))
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def svg_line_chart(
    series: Dict[str, Sequence[Tuple[float, float]]],
    x_label: str,
    y_label: str,
    title: str = "",
) -> str:
    """Line chart with one polyline per entry of ``series``."""
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    xt = nice_ticks(min(xs), max(xs)) if xs else [0.0, 1.0]
    yt = nice_ticks(min(ys), max(ys)) if ys else [0.0, 1.0]
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]
    L, R, Tm, B = MARGIN["left"], WIDTH - MARGIN["right"], MARGIN["top"], HEIGHT - MARGIN["bottom"]
    sx = lambda x: L + (x - x0) / (x1 - x0) * (R - L)
    sy = lambda y: B - (y - y0) / (y1 - y0) * (B - Tm)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{(L + R) / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<g class="axes" stroke="black" fill="none">'
               f'<line x1="{L}" y1="{B}" x2="{R}" y2="{B}"/><line x1="{L}" y1="{B}" x2="{L}" y2="{Tm}"/></g>')
    grid = []
    for v in xt:
        X = sx(v)
        grid.append(f'<line x1="{X:.2f}" y1="{B}" x2="{X:.2f}" y2="{B + 5}" stroke="black"/>')
        grid.append(f'<text x="{X:.2f}" y="{B + 18}" text-anchor="middle">{_fmt(v)}</text>')
    for v in yt:
        Y = sy(v)
        grid.append(f'<line x1="{L}" y1="{Y:.2f}" x2="{R}" y2="{Y:.2f}" stroke="#dddddd"/>')
        grid.append(f'<text x="{L - 8}" y="{Y + 4:.2f}" text-anchor="end">{_fmt(v)}</text>')
    out.append('<g class="ticks">' + "".join(grid) + "</g>")
    out.append(f'<text x="{(L + R) / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(x_label)}</text>')
    out.append(f'<text transform="translate(20 {(Tm + B) / 2:.1f}) rotate(-90)" text-anchor="middle">'
               f"{escape(y_label)}</text>")

    for i, (label, pts) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline class="series" data-label="{escape(label)}" points="{coords}" '
                   f'fill="none" stroke="{color}" stroke-width="2"/>')
        ly = Tm + 10 + 18 * i
        out.append(f'<line x1="{R + 15}" y1="{ly}" x2="{R + 40}" y2="{ly}" stroke="{color}" stroke-width="2"/>'
                   f'<text x="{R + 46}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


CHARTS = (
    ("ee", "Energy efficiency (bit/J)", lambda s: s.ee.mean),
    ("t_star", "Transmit duration t* (ms)", lambda s: s.t_star.mean * 1e3),
    ("m_star", "Active subarrays m*", lambda s: s.m_star.mean),
)


def chart_series(summaries: Iterable[Summary], metric) -> Dict[str, List[Tuple[float, float]]]:
    series: Dict[str, List[Tuple[float, float]]] = {}
    for s in summaries:
        pts = series.setdefault(f"{s.scheme} ({s.mode})", [])
        if s.n > 0:
            pts.append((s.value, metric(s)))
    return series


def emit_outputs(
    rows: Sequence[ResultRow],
    summaries: Sequence[Summary],
    out_dir: PathLike,
    formats: Iterable[str] = ("csv", "svg"),
    x_label: str = "swept value",
) -> List[Path]:
    """Write ``results.csv``, ``summary.csv`` and ``ee.svg``, ``t_star.svg``,
    ``m_star.svg`` as requested by ``formats``. Returns the paths written."""
    formats = set(formats)
    unknown = formats - {"csv", "svg"}
    if unknown:
        raise ValueError(f"unknown output formats {sorted(unknown)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        written.append(write_results_csv(out_dir / "results.csv", rows))
        written.append(write_summary_csv(out_dir / "summary.csv", summaries))
    if "svg" in formats and rows:
        for name, y_label, metric in CHARTS:
            svg = svg_line_chart(chart_series(summaries, metric), x_label, y_label)
            path = out_dir / f"{name}.svg"
            path.write_text(svg)
            written.append(path)
    return written
