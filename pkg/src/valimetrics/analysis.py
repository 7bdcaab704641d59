"""Correlation of quality metrics with performance metrics, plus box-plot
statistics for per-modification distributions.

Absent metric values (PSNR of identical images, NCC of constant images) are
dropped pairwise per correlation cell, never imputed; each cell records how
many joined points it used.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConstantSeries, EmptyReport, TooFewPoints


@dataclass
class MetricSeries:
    """Named metric values keyed by pair id; absent values simply missing."""

    name: str
    values: list[tuple[str, float]]

    def as_dict(self) -> dict[str, float]:
        return dict(self.values)


@dataclass
class CorrelationMatrix:
    rows: list[str]  # performance metric names
    cols: list[str]  # quality metric names
    r: np.ndarray  # coefficients, NaN where absent
    n_used: np.ndarray
    method: str
    absent_reasons: dict[tuple[str, str], str] = field(default_factory=dict)


@dataclass
class BoxStats:
    metric: str
    modification: str
    min: float
    q1: float
    median: float
    q3: float
    max: float
    whisker_lo: float
    whisker_hi: float
    outliers: list[float]
    n: int


def pearson(x, y) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise TooFewPoints("series lengths differ")
    if x.size < 3:
        raise TooFewPoints(f"need >= 3 points, got {x.size}")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc)) * math.sqrt(float(yc @ yc))
    if denom == 0.0:
        raise ConstantSeries("correlation undefined for a constant series")
    return float(np.clip((xc @ yc) / denom, -1.0, 1.0))


def _ranks(x: np.ndarray) -> np.ndarray:
    """Fractional ranks (1-based), ties get the average rank."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=np.float64)
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman rank correlation: Pearson of average-tied fractional ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise TooFewPoints("series lengths differ")
    rx, ry = _ranks(x), _ranks(y)
    n = x.size
    if n >= 3 and np.unique(x).size == n and np.unique(y).size == n:
        # no ties: the rank-difference shortcut is exact and avoids the
        # roundoff of the general Pearson-of-ranks path
        d2 = float(np.sum((rx - ry) ** 2))
        return 1.0 - 6.0 * d2 / (n * (n * n - 1))
    return pearson(rx, ry)


_METHODS = {"pearson": pearson, "spearman": spearman}


def correlation_matrix(
    quality: list[MetricSeries],
    perf: list[MetricSeries],
    method: str = "pearson",
) -> CorrelationMatrix:
    """One coefficient per (performance, quality) metric pair, joined on
    pair id with pairwise deletion of absent values."""
    if method not in _METHODS:
        raise ValueError(f"unknown correlation method {method!r}")
    corr = _METHODS[method]
    rows = [s.name for s in perf]
    cols = [s.name for s in quality]
    r = np.full((len(rows), len(cols)), np.nan)
    n_used = np.zeros((len(rows), len(cols)), dtype=np.int64)
    reasons: dict[tuple[str, str], str] = {}
    for i, ps in enumerate(perf):
        pd = ps.as_dict()
        for j, qs in enumerate(quality):
            qd = qs.as_dict()
            common = sorted(pd.keys() & qd.keys())
            xs = [qd[k] for k in common]
            ys = [pd[k] for k in common]
            n_used[i, j] = len(common)
            try:
                r[i, j] = corr(xs, ys)
            except (ConstantSeries, TooFewPoints) as exc:
                reasons[(ps.name, qs.name)] = type(exc).__name__
    return CorrelationMatrix(
        rows=rows, cols=cols, r=r, n_used=n_used, method=method, absent_reasons=reasons
    )


def boxplot_stats(series: MetricSeries, groups: dict[str, str]) -> list[BoxStats]:
    """Five-number summaries per modification group.

    Quartiles use linear (type-7) interpolation; whiskers extend to the most
    extreme data point within 1.5 IQR of the quartiles.
    """
    by_group: dict[str, list[float]] = {}
    for pair_id, value in series.values:
        tag = groups.get(pair_id, "unknown")
        by_group.setdefault(tag, []).append(value)
    out = []
    for tag in sorted(by_group):
        vals = np.sort(np.asarray(by_group[tag], dtype=np.float64))
        q1, med, q3 = np.quantile(vals, [0.25, 0.5, 0.75])
        iqr = q3 - q1
        lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
        inside = vals[(vals >= lo_fence) & (vals <= hi_fence)]
        whisker_lo = float(inside[0]) if inside.size else float(q1)
        whisker_hi = float(inside[-1]) if inside.size else float(q3)
        outliers = [float(v) for v in vals if v < lo_fence or v > hi_fence]
        out.append(
            BoxStats(
                metric=series.name,
                modification=tag,
                min=float(vals[0]),
                q1=float(q1),
                median=float(med),
                q3=float(q3),
                max=float(vals[-1]),
                whisker_lo=whisker_lo,
                whisker_hi=whisker_hi,
                outliers=outliers,
                n=int(vals.size),
            )
        )
    return out


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def render_correlation_csv(corr: CorrelationMatrix) -> str:
    lines = ["metric," + ",".join(corr.cols)]
    for i, row in enumerate(corr.rows):
        cells = []
        for j in range(len(corr.cols)):
            cells.append("" if math.isnan(corr.r[i, j]) else _fmt(corr.r[i, j]))
        lines.append(row + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def render_correlation_md(corr: CorrelationMatrix) -> str:
    header = "| Metric | " + " | ".join(corr.cols) + " |"
    sep = "|" + "---|" * (len(corr.cols) + 1)
    lines = [f"Correlation method: {corr.method}", "", header, sep]
    for i, row in enumerate(corr.rows):
        cells = []
        for j in range(len(corr.cols)):
            if math.isnan(corr.r[i, j]):
                reason = corr.absent_reasons.get((row, corr.cols[j]), "absent")
                cells.append(f"({reason})")
            else:
                cells.append(f"{corr.r[i, j]:.2f}")
        lines.append("| " + row + " | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _boxplot_svg(stats: list[BoxStats]) -> str:
    """Minimal SVG box plot for one metric across modification groups."""
    width_per = 90
    w = max(200, 60 + width_per * len(stats))
    h = 260
    lo = min(s.min for s in stats)
    hi = max(s.max for s in stats)
    span = (hi - lo) or 1.0

    def y(v: float) -> float:
        return 220.0 - 180.0 * (v - lo) / span

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f'<text x="10" y="18" font-size="13">{stats[0].metric}</text>',
    ]
    for k, s in enumerate(stats):
        cx = 80 + width_per * k
        x0, x1 = cx - 25, cx + 25
        parts += [
            f'<line x1="{cx}" y1="{y(s.whisker_lo):.1f}" x2="{cx}" y2="{y(s.whisker_hi):.1f}" stroke="black"/>',
            f'<rect x="{x0}" y="{y(s.q3):.1f}" width="{x1 - x0}" height="{max(y(s.q1) - y(s.q3), 0.5):.1f}" fill="none" stroke="black"/>',
            f'<line x1="{x0}" y1="{y(s.median):.1f}" x2="{x1}" y2="{y(s.median):.1f}" stroke="black"/>',
            f'<text x="{cx}" y="245" font-size="10" text-anchor="middle">{s.modification}</text>',
        ]
        for v in s.outliers:
            parts.append(f'<circle cx="{cx}" cy="{y(v):.1f}" r="2" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_report(
    corr: CorrelationMatrix | None,
    stats: list[BoxStats],
    out_dir: str | Path,
    plots: bool = False,
) -> list[Path]:
    """Write correlation tables and box-plot statistics; rerunning on the
    same inputs produces byte-identical files."""
    if (corr is None or not corr.rows or not corr.cols) and not stats:
        raise EmptyReport("no correlation matrix and no box statistics")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if corr is not None and corr.rows and corr.cols:
        p = out_dir / "correlation.csv"
        p.write_text(render_correlation_csv(corr), encoding="utf-8")
        written.append(p)
        p = out_dir / "correlation.md"
        p.write_text(render_correlation_md(corr), encoding="utf-8")
        written.append(p)
    if stats:
        doc = [
            {
                "metric": s.metric,
                "modification": s.modification,
                "min": s.min,
                "q1": s.q1,
                "median": s.median,
                "q3": s.q3,
                "max": s.max,
                "whisker_lo": s.whisker_lo,
                "whisker_hi": s.whisker_hi,
                "outliers": s.outliers,
                "n": s.n,
            }
            for s in sorted(stats, key=lambda s: (s.metric, s.modification))
        ]
        p = out_dir / "boxstats.json"
        p.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(p)
        if plots:
            plot_dir = out_dir / "plots"
            plot_dir.mkdir(exist_ok=True)
            by_metric: dict[str, list[BoxStats]] = {}
            for s in sorted(stats, key=lambda s: (s.metric, s.modification)):
                by_metric.setdefault(s.metric, []).append(s)
            for metric, group in by_metric.items():
                p = plot_dir / f"{metric}.svg"
                p.write_text(_boxplot_svg(group), encoding="utf-8")
                written.append(p)
    return written
