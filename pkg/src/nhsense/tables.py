"""Result tables: CSV with ``#`` metadata lines, and a small SVG line plot."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from html import escape

import numpy as np

PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class ResultTable:
    columns: list[str]
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = list(self.columns)
        rows = np.asarray(self.rows, dtype=float)
        if rows.size == 0:
            rows = rows.reshape(0, len(self.columns))
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValueError(f"rows must be n x {len(self.columns)}, got shape {rows.shape}")
        self.rows = rows

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise KeyError(f"no column {name!r}; have {self.columns}")
        return self.rows[:, self.columns.index(name)]


def _fmt(value: float) -> str:
    if math.isnan(value):
        return ""
    text = format(value, ".12g")
    return "0" if text == "-0" else text


def render_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    for key, value in table.metadata.items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str) -> ResultTable:
    metadata, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            metadata[key] = json.loads(value)
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[float(v) if v != "" else math.nan for v in r] for r in reader if r]
    return ResultTable(columns, np.array(rows, dtype=float).reshape(len(rows), len(columns)), metadata)


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_csv(table: ResultTable, path) -> None:
    atomic_write(path, render_csv(table))


def read_csv(path) -> ResultTable:
    with open(path, encoding="utf-8") as fh:
        return parse_csv(fh.read())


def render_svg(
    table: ResultTable,
    x: str,
    ys: list[str],
    logx: bool = False,
    width: int = 640,
    height: int = 400,
    title: str = "",
) -> str:
    """Line plot of ``ys`` against ``x``, one polyline per column.

    The y range is padded by 5% of the data span on each side; NaN points are
    dropped from their polyline.
    """
    missing = [c for c in [x, *ys] if c not in table.columns]
    if missing:
        raise KeyError(f"missing columns: {missing}")
    if table.rows.shape[0] < 2:
        raise ValueError("need at least two rows to plot")
    xv = table.column(x)
    if logx:
        if np.any(xv <= 0):
            raise ValueError("log-x plot needs positive x values")
        xv = np.log10(xv)
    yv = np.column_stack([table.column(c) for c in ys])
    finite = yv[np.isfinite(yv)]
    if finite.size == 0:
        raise ValueError("no finite y values to plot")
    y_lo, y_hi = float(finite.min()), float(finite.max())
    pad = 0.05 * (y_hi - y_lo) if y_hi > y_lo else 0.05 * max(abs(y_lo), 1.0)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = float(np.nanmin(xv)), float(np.nanmax(xv))
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5

    left, right, top, bottom = 70, 20, 30, 50
    pw, ph = width - left - right, height - top - bottom

    def px(v):
        return left + (v - x_lo) / (x_hi - x_lo) * pw

    def py(v):
        return top + (y_hi - v) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2}" y="18" text-anchor="middle">{escape(title)}</text>')
    for t in np.linspace(x_lo, x_hi, 5):
        label = f"1e{t:.3g}" if logx else f"{t:.4g}"
        out.append(f'<line x1="{px(t):.2f}" y1="{top + ph}" x2="{px(t):.2f}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{top + ph + 16}" text-anchor="middle">{label}</text>')
    for t in np.linspace(y_lo, y_hi, 5):
        out.append(f'<line x1="{left - 4}" y1="{py(t):.2f}" x2="{left}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(x)}</text>')
    for k, name in enumerate(ys):
        color = PALETTE[k % len(PALETTE)]
        keep = np.isfinite(xv) & np.isfinite(yv[:, k])
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xv[keep], yv[keep, k]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 14 + 14 * k
        out.append(f'<line x1="{left + pw - 110}" y1="{ly - 4}" x2="{left + pw - 90}" y2="{ly - 4}" stroke="{color}"/>')
        out.append(f'<text x="{left + pw - 85}" y="{ly}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_plot(table: ResultTable, x: str, ys: list[str], path, logx: bool = False, title: str = "") -> None:
    atomic_write(path, render_svg(table, x, ys, logx=logx, title=title))
