"""Robustness slopes, win/loss breakdowns and reports."""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

from .corpus_io import atomic_write_text
from .types import ScoreFile

REPORT_COLUMNS = ("system", "metric", "noise_type", "clean", "slope", "n_points", "rss")


@dataclass(frozen=True)
class QualityPoint:
    p: float
    score: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"noise level {self.p} outside [0, 1]")
        if not math.isfinite(self.score):
            raise ValueError("score must be finite")


@dataclass(frozen=True)
class Trajectory:
    system: str
    metric: str
    clean_score: float
    points: tuple[QualityPoint, ...] = ()
    noise_type: str = ""

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        for a, b in zip(pts, pts[1:]):
            if not a.p < b.p:
                raise ValueError("trajectory points must have strictly increasing p")
        if any(pt.p <= 0 for pt in pts):
            raise ValueError("trajectory points must have p > 0; the clean score is stored separately")

    def declines(self) -> list[tuple[float, float]]:
        return [(pt.p, pt.score - self.clean_score) for pt in self.points]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    n_points: int
    rss: float


def fit_slope(trajectory: "Trajectory | Sequence[tuple[float, float]]") -> SlopeFit:
    """Least-squares line through the origin on (p, score - clean) pairs.

    The slope reads as metric points lost if every token were corrupted.
    A plain sequence of ``(p, decline)`` pairs is accepted too.
    """
    pairs = trajectory.declines() if isinstance(trajectory, Trajectory) else [(float(p), float(d)) for p, d in trajectory]
    if not pairs:
        raise ValueError("need at least one point to fit a slope")
    # exact rational sums, rounded once: linear data d = s*p gives back s exactly
    sxx = sum(Fraction(p) ** 2 for p, _ in pairs)
    if sxx == 0:
        raise ValueError("all noise levels are zero; slope is undefined")
    slope = float(sum(Fraction(p) * Fraction(d) for p, d in pairs) / sxx)
    rss = math.fsum((d - slope * p) ** 2 for p, d in pairs)
    return SlopeFit(slope, len(pairs), rss)


Run = Union[ScoreFile, float]


def _corpus_score(run: Run, indices: list[int] | None) -> tuple[float, list[int] | None]:
    if isinstance(run, ScoreFile):
        idx = sorted(run.indices)
        if indices is not None and idx != indices:
            raise ValueError(f"run {run.system}/{run.metric} covers different segment indices")
        return run.mean(), idx
    return float(run), indices


def build_trajectory(
    clean: Run,
    ladder: Iterable[tuple[float, Run]],
    system: str = "",
    metric: str = "",
    noise_type: str = "",
) -> Trajectory:
    """Corpus-level score per noise level; ScoreFiles are averaged in index order.

    Native corpus metrics (chrF, BLEU) can be passed directly as floats.
    """
    clean_score, indices = _corpus_score(clean, None)
    points = []
    seen = set()
    for p, run in ladder:
        p = float(p)
        if p in seen:
            raise ValueError(f"duplicate noise level {p}")
        seen.add(p)
        score, indices = _corpus_score(run, indices)
        points.append(QualityPoint(p, score))
    points.sort(key=lambda pt: pt.p)
    return Trajectory(system, metric, clean_score, tuple(points), noise_type)


@dataclass(frozen=True)
class WinLossBreakdown:
    p: float
    improved: float
    harmed: float
    tied: float


def win_loss(
    baseline: "ScoreFile | Mapping[int, float]",
    challenger: "ScoreFile | Mapping[int, float]",
    tie_epsilon: float = 0.0,
    p: float = float("nan"),
) -> WinLossBreakdown:
    """Fractions of segments where the challenger beats / loses to the baseline by more than epsilon."""
    if tie_epsilon < 0:
        raise ValueError("tie_epsilon must be >= 0")
    a = baseline.as_dict() if isinstance(baseline, ScoreFile) else dict(baseline)
    b = challenger.as_dict() if isinstance(challenger, ScoreFile) else dict(challenger)
    if sorted(a) != sorted(b):
        raise ValueError("baseline and challenger cover different segment indices")
    n = len(a)
    if n == 0:
        raise ValueError("win_loss over zero segments")
    improved = sum(1 for i in a if b[i] - a[i] > tie_epsilon)
    harmed = sum(1 for i in a if a[i] - b[i] > tie_epsilon)
    tied = n - improved - harmed
    return WinLossBreakdown(p, improved / n, harmed / n, tied / n)


# reports ----------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def report_csv(trajectories: Sequence[Trajectory], fits: Sequence[SlopeFit] | None = None) -> str:
    if fits is None:
        fits = [fit_slope(t) if t.points else None for t in trajectories]
    rows = sorted(zip(trajectories, fits), key=lambda tf: (tf[0].system, tf[0].metric, tf[0].noise_type))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for t, f in rows:
        writer.writerow(
            [
                t.system,
                t.metric,
                t.noise_type,
                _fmt(t.clean_score),
                _fmt(f.slope) if f else "",
                f.n_points if f else 0,
                _fmt(f.rss) if f else "",
            ]
        )
    return buf.getvalue()


def breakdown_csv(breakdowns: Mapping[str, Sequence[WinLossBreakdown]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("comparison", "p", "improved", "harmed", "tied"))
    for name in sorted(breakdowns):
        for b in sorted(breakdowns[name], key=lambda b: b.p):
            writer.writerow((name, _fmt(b.p), _fmt(b.improved), _fmt(b.harmed), _fmt(b.tied)))
    return buf.getvalue()


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def svg_chart(title: str, trajectories: Sequence[Trajectory], width: int = 480, height: int = 320) -> str:
    """Line chart of score vs noise level; p = 0 is the clean score."""
    left, right, top, bottom = 56, 120, 32, 40
    pw, ph = width - left - right, height - top - bottom
    series = [(t.system, [(0.0, t.clean_score)] + [(pt.p, pt.score) for pt in t.points]) for t in trajectories]
    ys = [y for _, pts in series for _, y in pts] or [0.0, 1.0]
    lo, hi = min(ys), max(ys)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0

    def sx(p):
        return left + p * pw

    def sy(v):
        return top + (hi - v) / (hi - lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="20" font-family="sans-serif" font-size="13">{_esc(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for k in range(0, 11, 2):
        p = k / 10
        out.append(
            f'<text x="{sx(p):.2f}" y="{top + ph + 16}" font-family="sans-serif" font-size="10" '
            f'text-anchor="middle">{p:.1f}</text>'
        )
    for v in (lo, (lo + hi) / 2, hi):
        out.append(
            f'<text x="{left - 6}" y="{sy(v) + 3:.2f}" font-family="sans-serif" font-size="10" '
            f'text-anchor="end">{v:.2f}</text>'
        )
    out.append(
        f'<text x="{left + pw / 2:.2f}" y="{height - 6}" font-family="sans-serif" font-size="11" '
        f'text-anchor="middle">proportion of noised tokens</text>'
    )
    for k, (name, pts) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        coords = " ".join(f"{sx(p):.2f},{sy(v):.2f}" for p, v in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        ly = top + 14 * k + 8
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 26}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(
            f'<text x="{left + pw + 30}" y="{ly + 4}" font-family="sans-serif" font-size="10">{_esc(name)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _slug(s: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", s) or "_"


def emit_report(
    trajectories: Sequence[Trajectory],
    out_dir: "str | Path",
    fits: Sequence[SlopeFit] | None = None,
    breakdowns: Mapping[str, Sequence[WinLossBreakdown]] | None = None,
    formats: Sequence[str] = ("csv", "svg"),
) -> list[Path]:
    """Write ``report.csv`` and one SVG per (metric, noise type) family."""
    out_dir = Path(out_dir)
    written = []
    if "csv" in formats:
        path = out_dir / "report.csv"
        atomic_write_text(path, report_csv(trajectories, fits))
        written.append(path)
        if breakdowns:
            path = out_dir / "winloss.csv"
            atomic_write_text(path, breakdown_csv(breakdowns))
            written.append(path)
    if "svg" in formats:
        families: dict[tuple[str, str], list[Trajectory]] = {}
        for t in trajectories:
            families.setdefault((t.metric, t.noise_type), []).append(t)
        for (metric, noise_type), members in sorted(families.items()):
            members = sorted(members, key=lambda t: t.system)
            path = out_dir / f"{_slug(metric)}__{_slug(noise_type)}.svg"
            atomic_write_text(path, svg_chart(f"{metric} / {noise_type}", members))
            written.append(path)
    return written
