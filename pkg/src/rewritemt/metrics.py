"""Aggregation of segment scores into evaluation rows, significance tests,
and correlation reports.

Significance is a paired bootstrap over segment-level deltas: 1,000
resamples, two-sided, seeded. The resample index schedule depends only on
(seed, n), so swapping baseline and candidate flips the delta sign and
preserves the p-value exactly. Missing segment scores fail the run; nothing
is imputed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CoverageMismatch, DegenerateInput, PairingMismatch

# Column name -> improvement direction, in report column order.
COLUMNS = {
    "translatability": "higher_better",      # xCOMET(s', t')
    "meaning_preservation": "higher_better",  # xCOMET(s', r)
    "combined": "higher_better",             # xCOMET(s', t', r)
    "metricx_qe": "lower_better",            # MetricX(s', t')
    "metricx_ref": "lower_better",           # MetricX(t', r)
}

COLUMN_LABELS = {
    "translatability": "xCOMET(s,t)",
    "meaning_preservation": "xCOMET(s,r)",
    "combined": "xCOMET(s,t,r)",
    "metricx_qe": "MetricX(s,t)",
    "metricx_ref": "MetricX(t,r)",
}

BASELINE_METHOD = "original"
DEFAULT_RESAMPLES = 1000
DEFAULT_ALPHA = 0.05


@dataclass(frozen=True)
class EvalRow:
    method: str
    n: int
    means: dict = field(default_factory=dict)          # column -> mean (or None)
    p_values: dict = field(default_factory=dict)       # column -> p vs baseline
    significant: dict = field(default_factory=dict)    # column -> bool

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n": self.n,
            "means": {k: (None if v is None else round(v, 6)) for k, v in self.means.items()},
            "p_values": {k: round(v, 6) for k, v in self.p_values.items()},
            "significant": dict(self.significant),
        }


@dataclass(frozen=True)
class CorrelationReport:
    pair: str
    pearson_r: float
    n: int
    grouping: str  # "methods" or "segments"

    def to_dict(self) -> dict:
        return {"pair": self.pair, "pearson_r": round(self.pearson_r, 6),
                "n": self.n, "grouping": self.grouping}


def aggregate(
    per_method: Mapping[str, Mapping[str, Mapping[str, float]]],
    alpha: float = DEFAULT_ALPHA,
    seed: int = 0,
    n_resamples: int = DEFAULT_RESAMPLES,
) -> list[EvalRow]:
    """Mean per column per method, with significance vs the baseline row.

    per_method maps method -> column -> segment_id -> value. Every method
    must cover exactly the baseline's segment ids on every column present
    for that method; a shortfall raises CoverageMismatch.
    """
    if BASELINE_METHOD not in per_method:
        raise CoverageMismatch(BASELINE_METHOD, ["<baseline row absent>"])
    baseline = per_method[BASELINE_METHOD]
    base_ids = _segment_ids(baseline)

    rows = []
    for method in per_method:
        columns = per_method[method]
        ids = _segment_ids(columns)
        missing = base_ids - ids
        if missing:
            raise CoverageMismatch(method, sorted(missing))
        extra = ids - base_ids
        if extra:
            raise CoverageMismatch(method, sorted(extra))

        means: dict = {}
        p_values: dict = {}
        significant: dict = {}
        for column, direction in COLUMNS.items():
            values = columns.get(column)
            if not values:
                means[column] = None
                continue
            means[column] = float(np.mean([values[i] for i in sorted(values)]))
            if method != BASELINE_METHOD and baseline.get(column):
                p, sig = delta_significance(
                    baseline[column], values, alpha=alpha, seed=seed,
                    n_resamples=n_resamples, direction=direction,
                )
                p_values[column] = p
                significant[column] = sig
        rows.append(EvalRow(method=method, n=len(base_ids), means=means,
                            p_values=p_values, significant=significant))
    return rows


def _segment_ids(columns: Mapping[str, Mapping[str, float]]) -> set:
    ids: set = set()
    for values in columns.values():
        if values:
            ids |= set(values)
    return ids


def delta_significance(
    baseline: Mapping[str, float],
    candidate: Mapping[str, float],
    alpha: float = DEFAULT_ALPHA,
    seed: int = 0,
    n_resamples: int = DEFAULT_RESAMPLES,
    direction: str = "higher_better",
) -> tuple[float, bool]:
    """Two-sided paired bootstrap p-value over segment deltas.

    Returns (p_value, significant) where significant means p < alpha AND the
    observed mean delta points in the metric's improvement direction.
    """
    if set(baseline) != set(candidate):
        raise PairingMismatch("baseline and candidate cover different segments")
    ids = sorted(baseline)
    if len(ids) < 2:
        raise PairingMismatch("need at least 2 paired segments")
    deltas = np.array([candidate[i] - baseline[i] for i in ids], dtype=float)

    rng = np.random.default_rng(seed)
    n = len(deltas)
    idx = rng.integers(0, n, size=(n_resamples, n))
    means = deltas[idx].mean(axis=1)

    p_pos = (np.count_nonzero(means >= 0.0) + 1) / (n_resamples + 1)
    p_neg = (np.count_nonzero(means <= 0.0) + 1) / (n_resamples + 1)
    p_value = min(1.0, 2.0 * min(p_pos, p_neg))

    observed = float(deltas.mean())
    improving = observed > 0 if direction == "higher_better" else observed < 0
    return p_value, bool(p_value < alpha and improving)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Standard sample Pearson correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DegenerateInput("inputs must be equal-length vectors")
    if len(x) < 2:
        raise DegenerateInput("need at least 2 points")
    xd = x - x.mean()
    yd = y - y.mean()
    denom = float(np.sqrt((xd ** 2).sum() * (yd ** 2).sum()))
    if denom == 0.0:
        raise DegenerateInput("zero variance")
    r = float((xd * yd).sum() / denom)
    return max(-1.0, min(1.0, r))


def correlation_report(
    pair: str,
    points: Sequence[tuple[float, float]],
    grouping: str = "methods",
) -> CorrelationReport:
    """Pearson trade-off between translatability and meaning preservation.

    points are (translatability, meaning_preservation); grouping labels
    whether they are method-level means or raw segment pairs.
    """
    if grouping not in ("methods", "segments"):
        raise ValueError(f"unknown grouping {grouping!r}")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return CorrelationReport(pair=pair, pearson_r=pearson(xs, ys),
                             n=len(points), grouping=grouping)


def render_results_table(rows: Sequence[EvalRow]) -> str:
    """Text table mirroring the evaluation-table column order, 3 decimals.

    Significant improvements over the baseline are starred.
    """
    headers = ["Method"] + [COLUMN_LABELS[c] for c in COLUMNS] + ["n"]
    body = []
    for row in rows:
        cells = [row.method]
        for column in COLUMNS:
            mean = row.means.get(column)
            if mean is None:
                cells.append("-")
                continue
            mark = "*" if row.significant.get(column) else ""
            cells.append(f"{mean:.3f}{mark}")
        cells.append(str(row.n))
        body.append(cells)

    widths = [max(len(headers[i]), *(len(r[i]) for r in body)) if body else len(headers[i])
              for i in range(len(headers))]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for cells in body:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(cells)))
    return "\n".join(lines) + "\n"
