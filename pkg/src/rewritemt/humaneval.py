"""Win rates, Fleiss' kappa, and Likert summaries over annotation exports.

Ingests flat CSV or line-delimited JSON exports (survey hosting is out of
scope). Ties are a first-class category; win rates are reported both with
ties and among non-ties.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateChance,
    DuplicateJudgment,
    EmptyInput,
    OutOfRange,
    UnevenRaters,
)

AXES = ("fluency", "understandability", "detail", "meaning")
CHOICES = ("original", "rewrite", "tie")


@dataclass(frozen=True)
class PairwiseJudgment:
    item_id: str
    annotator_id: str
    axis: str
    choice: str
    comment: str = ""

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.choice not in CHOICES:
            raise ValueError(f"choice must be one of {CHOICES}, got {self.choice!r}")


@dataclass(frozen=True)
class LikertJudgment:
    item_id: str
    annotator_id: str
    rating: int
    comment: str = ""

    def __post_init__(self):
        if self.rating not in (1, 2, 3, 4):
            raise OutOfRange(self.rating)


def win_rates(judgments: Sequence[PairwiseJudgment]) -> dict:
    """Per-axis percentages for rewrite wins, original wins, and ties.

    Ties-excluded win/loss rates are reported alongside; percentages are
    rounded to one decimal and sum to 100 within rounding.
    """
    if not judgments:
        raise EmptyInput("pairwise judgments")
    seen: set[tuple[str, str, str]] = set()
    for j in judgments:
        key = (j.item_id, j.annotator_id, j.axis)
        if key in seen:
            raise DuplicateJudgment(key)
        seen.add(key)

    out: dict = {}
    for axis in AXES:
        axis_j = [j for j in judgments if j.axis == axis]
        if not axis_j:
            continue
        n = len(axis_j)
        wins = sum(1 for j in axis_j if j.choice == "rewrite")
        losses = sum(1 for j in axis_j if j.choice == "original")
        ties = n - wins - losses
        entry = {
            "n": n,
            "win_pct": round(100.0 * wins / n, 1),
            "loss_pct": round(100.0 * losses / n, 1),
            "tie_pct": round(100.0 * ties / n, 1),
        }
        decided = wins + losses
        if decided:
            entry["win_pct_excl_ties"] = round(100.0 * wins / decided, 1)
            entry["loss_pct_excl_ties"] = round(100.0 * losses / decided, 1)
        out[axis] = entry
    return out


def fleiss_kappa(matrix: Sequence[Sequence[int]]) -> float:
    """Fleiss' kappa from an items x categories count matrix.

    Every item must have the same number of ratings. Returns 1.0 for the
    degenerate all-agree-on-one-category case (chance agreement is 1 there);
    any other zero-denominator case is an error.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise EmptyInput("ratings matrix")
    if (m < 0).any():
        raise ValueError("ratings matrix must be non-negative")
    row_sums = m.sum(axis=1)
    n = row_sums[0]
    if n < 2:
        raise UnevenRaters("<matrix>")
    for i, total in enumerate(row_sums):
        if total != n:
            raise UnevenRaters(str(i))

    p_j = m.sum(axis=0) / m.sum()
    p_i = ((m * m).sum(axis=1) - n) / (n * (n - 1))
    p_bar = float(p_i.mean())
    p_e = float((p_j ** 2).sum())
    if p_e >= 1.0:
        if p_bar >= 1.0:
            return 1.0
        raise DegenerateChance("chance agreement is 1 but observed agreement is not")
    return (p_bar - p_e) / (1.0 - p_e)


def pairwise_matrix(judgments: Sequence[PairwiseJudgment], axis: str) -> list[list[int]]:
    """Items x {original, rewrite, tie} count matrix for one axis."""
    counts: dict[str, list[int]] = {}
    for j in judgments:
        if j.axis != axis:
            continue
        counts.setdefault(j.item_id, [0, 0, 0])[CHOICES.index(j.choice)] += 1
    return [counts[item] for item in sorted(counts)]


def likert_summary(judgments: Sequence[LikertJudgment]) -> tuple[dict[int, int], float]:
    """Counts per rating plus the arithmetic mean to 2 decimals."""
    if not judgments:
        raise EmptyInput("likert judgments")
    counts = {r: 0 for r in (1, 2, 3, 4)}
    for j in judgments:
        counts[j.rating] += 1
    total = sum(counts.values())
    mean = sum(r * c for r, c in counts.items()) / total
    return counts, round(mean, 2)


def emit_survey_manifest(item_ids: Sequence[str], seed: int = 0) -> list[dict]:
    """Pair each item with a randomized A/B presentation order.

    Randomization happens at survey construction; this manifest lets
    analyses de-randomize afterwards.
    """
    rng = random.Random(seed)
    manifest = []
    for item_id in item_ids:
        order = ["original", "rewrite"] if rng.random() < 0.5 else ["rewrite", "original"]
        manifest.append({"item_id": item_id, "order": order})
    return manifest


# ---------------------------------------------------------------------------
# Export-file ingestion (CSV with header, or one JSON object per line)

def load_pairwise(path: str | Path) -> list[PairwiseJudgment]:
    return [
        PairwiseJudgment(
            item_id=str(row["item_id"]),
            annotator_id=str(row["annotator_id"]),
            axis=str(row["axis"]).lower(),
            choice=str(row["choice"]).lower(),
            comment=str(row.get("comment") or ""),
        )
        for row in _rows(path)
    ]


def load_likert(path: str | Path) -> list[LikertJudgment]:
    return [
        LikertJudgment(
            item_id=str(row["item_id"]),
            annotator_id=str(row["annotator_id"]),
            rating=int(row["rating"]),
            comment=str(row.get("comment") or ""),
        )
        for row in _rows(path)
    ]


def _rows(path: str | Path) -> Iterable[dict]:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with path.open("r", encoding="utf-8", newline="") as fh:
            yield from csv.DictReader(fh)
    else:
        with path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield json.loads(line)
