"""Result tables, CSV emission and a minimal SVG line plot."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any, Sequence
from xml.sax.saxutils import escape

from .config import ExperimentConfig

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class PlotSpec:
    x: str
    y: tuple[str, ...]
    group: str | None = None
    logy: bool = False
    xlabel: str = ""
    ylabel: str = ""


@dataclass
class ExperimentResult:
    columns: tuple[str, ...]
    rows: list[tuple[Any, ...]]
    summary: list[str] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    plot: PlotSpec | None = None

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def render_csv(result: ExperimentResult, cfg: ExperimentConfig) -> str:
    """CSV text with a ``#`` header block holding schema, config hash and seed."""
    buf = io.StringIO()
    buf.write(f"# experiment: {cfg.name}\n")
    buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
    buf.write(f"# config_sha256: {cfg.digest}\n")
    buf.write(f"# seed: {cfg.seed}\n")
    for line in cfg.canonical().splitlines():
        buf.write(f"# config: {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Parse :func:`render_csv` output into (header fields, columns, rows)."""
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# ") and ": " in line:
            k, v = line[2:].split(": ", 1)
            if k != "config":
                meta[k] = v
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _series(result: ExperimentResult, spec: PlotSpec) -> list[tuple[str, list[float], list[float]]]:
    xs = result.column(spec.x)
    groups = result.column(spec.group) if spec.group else [None] * len(xs)
    out = []
    for ycol in spec.y:
        ys = result.column(ycol)
        keys: list[Any] = []
        for g in groups:
            if g not in keys:
                keys.append(g)
        for g in keys:
            pts = [
                (float(x), float(y))
                for x, y, gg in zip(xs, ys, groups)
                if gg == g and isinstance(y, (int, float)) and math.isfinite(y) and (not spec.logy or y > 0)
            ]
            label = ycol if g is None else f"{ycol} {spec.group}={format_value(g)}"
            out.append((label, [p[0] for p in pts], [p[1] for p in pts]))
    return out


def render_svg(result: ExperimentResult, title: str = "", width: int = 640, height: int = 420) -> str:
    """Axes, one polyline per series and a legend; nothing else."""
    spec = result.plot
    if spec is None:
        raise ValueError("experiment defines no plot")
    series = [s for s in _series(result, spec) if s[1]]
    left, right, top, bottom = 70, 180, 30, 50
    pw, ph = width - left - right, height - top - bottom
    allx = [x for _, xs, _ in series for x in xs] or [0.0, 1.0]
    ally = [y for _, _, ys in series for y in ys] or [0.0, 1.0]
    tr = (lambda v: math.log10(v)) if spec.logy else (lambda v: v)
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(tr(y) for y in ally), max(tr(y) for y in ally)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(x: float) -> float:
        return left + (x - x0) / (x1 - x0) * pw

    def py(y: float) -> float:
        return top + ph - (tr(y) - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(spec.xlabel or spec.x)}</text>',
        f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 14 {top + ph / 2:.1f})">'
        f"{escape((spec.ylabel or ', '.join(spec.y)) + (' (log10)' if spec.logy else ''))}</text>",
        f'<text x="{left}" y="{top - 10}">{escape(title)}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        parts.append(f'<text x="{px(xv):.1f}" y="{top + ph + 15}" text-anchor="middle">{xv:.4g}</text>')
        parts.append(f'<text x="{left - 5}" y="{top + ph - frac * ph + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 12 + 14 * i
        parts.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 28}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw + 32}" y="{ly}">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def is_nondecreasing(values: Sequence[float], tol: float = 0.0) -> bool:
    return all(b >= a - tol for a, b in zip(values, values[1:]))


def is_nonincreasing(values: Sequence[float], tol: float = 0.0) -> bool:
    return all(b <= a + tol for a, b in zip(values, values[1:]))
