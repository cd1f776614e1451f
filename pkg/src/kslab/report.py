"""Deterministic CSV / JSON / SVG output.

Floats are written with 17 significant digits so every value round-trips
exactly; mappings keep insertion order.  Identical inputs give identical bytes.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "fmt_float",
    "dumps_json",
    "csv_text",
    "disturbance_csv",
    "disturbance_json",
    "residuals_csv",
    "audit_json",
    "audit_summary_csv",
    "svg_plot",
    "emit_plot",
    "write_text",
]


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        # JSON has no NaN; null keeps the file valid
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj, indent: int = 2) -> str:
    return _encode(_plain(obj), indent, 0) + "\n"


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    import csv

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def disturbance_csv(report) -> str:
    header = ("n", "k", "state_id", "delta_norm", "sym_delta_norm", "product_delta_norm")
    return csv_text(header, ([getattr(r, h) for h in header] for r in report.rows))


def disturbance_json(report) -> str:
    slope, intercept = report.fit
    return dumps_json(
        {
            "grids": {str(n): N for n, N in report.grids.items()},
            "fit": {"slope": slope, "intercept": intercept},
            "rows": [dataclasses.asdict(r) for r in report.rows],
        }
    )


def residuals_csv(table: dict, tolerance: float | None = None) -> str:
    if tolerance is None:
        return csv_text(("name", "residual"), table.items())
    return csv_text(
        ("name", "residual", "tolerance", "status"),
        ((k, v, tolerance, "pass" if v < tolerance else "fail") for k, v in table.items()),
    )


def audit_json(report) -> str:
    return dumps_json(report.as_dict())


def audit_summary_csv(report) -> str:
    rows = []
    for name, value in report.premise_residuals.items():
        tol = report.tolerances.get(name)
        status = report.verdict.get(name, "reported")
        rows.append((name, value, "" if tol is None else fmt_float(tol), status))
    rows.append(("epsilon", report.epsilon, "", report.verdict["epsilon_positive"]))
    rows.append(("p_threshold", report.p_threshold, "", ""))
    rows.append(("p_zero_band", report.p_zero_band, "", ""))
    rows.append(("contradiction", report.certificate.contradiction, "", ""))
    return csv_text(("quantity", "value", "tolerance", "status"), rows)


# -- SVG --------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, log: bool) -> list:
    if log:
        return [m * 10.0**e for e in range(math.floor(lo), math.ceil(hi) + 1) for m in (1, 2, 5)]
    if hi == lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / 4))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (m * step) <= 6:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def svg_plot(
    series: Sequence[tuple],
    log_log: bool = False,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    width: int = 480,
    height: int = 360,
) -> str:
    """Line plot of ``series = [(label, [(x, y), ...]), ...]`` as an SVG string."""
    if not series or not any(len(pts) for _, pts in series):
        raise ValueError("nothing to plot: empty series")
    pts_all = [(float(x), float(y)) for _, pts in series for x, y in pts]
    if log_log and any(x <= 0 or y <= 0 for x, y in pts_all):
        raise ValueError("log-log plot needs strictly positive values")
    tr = (lambda v: math.log10(v)) if log_log else (lambda v: v)
    xs = [tr(x) for x, _ in pts_all]
    ys = [tr(y) for _, y in pts_all]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    ml, mr, mt, mb = 64, 16, 32, 48
    pw, ph = width - ml - mr, height - mt - mb

    def px(v):
        return ml + (tr(v) - x0) / (x1 - x0) * pw

    def py(v):
        return mt + ph - (tr(v) - y0) / (y1 - y0) * ph

    f = lambda v: f"{v:.2f}"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1, log_log):
        if x0 - 1e-12 <= tr(t) <= x1 + 1e-12:
            x = px(t)
            out.append(f'<line x1="{f(x)}" y1="{mt + ph}" x2="{f(x)}" y2="{mt + ph + 4}" stroke="black"/>')
            out.append(f'<text x="{f(x)}" y="{mt + ph + 16}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1, log_log):
        if y0 - 1e-12 <= tr(t) <= y1 + 1e-12:
            y = py(t)
            out.append(f'<line x1="{ml - 4}" y1="{f(y)}" x2="{ml}" y2="{f(y)}" stroke="black"/>')
            out.append(f'<text x="{ml - 6}" y="{f(y + 4)}" text-anchor="end">{t:g}</text>')
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{_esc(title)}</text>')
    if xlabel:
        out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{_esc(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {mt + ph / 2:.1f})">{_esc(ylabel)}</text>'
        )
    for i, (label, pts) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        coords = [(px(float(x)), py(float(y))) for x, y in pts]
        if len(coords) > 1:
            path = " ".join(f"{f(x)},{f(y)}" for x, y in coords)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in coords:
            out.append(f'<circle cx="{f(x)}" cy="{f(y)}" r="3" fill="{color}"/>')
        if label:
            out.append(
                f'<text x="{ml + pw - 4}" y="{mt + 14 + 14 * i}" text-anchor="end" fill="{color}">{_esc(label)}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_plot(series: Sequence[tuple], path, log_log: bool = False, **labels) -> Path:
    """Write :func:`svg_plot` output to ``path``."""
    return write_text(path, svg_plot(series, log_log=log_log, **labels))


def write_text(path, text: str) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
