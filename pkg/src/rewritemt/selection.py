"""Translatability-aware selection between an original input and its rewrite.

The rule is strict improvement: the rewrite is chosen only when its QE score
beats the original's; ties keep the original. Selection consumes persisted
scores, never calls a scorer, so every decision is replayable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import MissingScore, RangeViolation

CHOICES = ("original", "rewrite")


@dataclass(frozen=True)
class SelectionOutcome:
    segment_id: str
    chosen: str
    score_original: float
    score_rewrite: float
    margin: float
    method: str

    def to_dict(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "chosen": self.chosen,
            "score_original": self.score_original,
            "score_rewrite": self.score_rewrite,
            "margin": self.margin,
            "method": self.method,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SelectionOutcome":
        return cls(
            segment_id=str(obj["segment_id"]),
            chosen=str(obj["chosen"]),
            score_original=float(obj["score_original"]),
            score_rewrite=float(obj["score_rewrite"]),
            margin=float(obj["margin"]),
            method=str(obj["method"]),
        )


def select_one(segment_id: str, score_original: float, score_rewrite: float,
               method: str) -> SelectionOutcome:
    """Apply the strict-improvement rule to one segment."""
    for value in (score_original, score_rewrite):
        if not (0.0 <= value <= 1.0):
            raise RangeViolation(value)
    margin = score_rewrite - score_original
    chosen = "rewrite" if margin > 0 else "original"
    return SelectionOutcome(segment_id, chosen, score_original, score_rewrite,
                            margin, method)


def batch_select(
    score_pairs: Mapping[str, tuple[float, float]],
    method: str,
    segment_order: Sequence[str] | None = None,
) -> tuple[list[SelectionOutcome], dict]:
    """Select per segment over a corpus.

    score_pairs maps segment_id -> (score_original, score_rewrite); exactly
    one pair per segment. Returns outcomes in segment_order (or sorted id
    order) plus a summary {n_rewrite_chosen, n_total}.
    """
    order = list(segment_order) if segment_order is not None else sorted(score_pairs)
    outcomes = []
    for segment_id in order:
        if segment_id not in score_pairs:
            raise MissingScore(segment_id, method)
        s_orig, s_rw = score_pairs[segment_id]
        outcomes.append(select_one(segment_id, s_orig, s_rw, method))
    summary = {
        "n_rewrite_chosen": sum(1 for o in outcomes if o.chosen == "rewrite"),
        "n_total": len(outcomes),
    }
    return outcomes, summary


def tournament_select(
    candidates: Mapping[str, Mapping[str, float]],
    score_original: Mapping[str, float],
    segment_order: Sequence[str] | None = None,
) -> tuple[list[SelectionOutcome], dict]:
    """Extension mode: argmax over all candidate rewrites per segment.

    candidates maps segment_id -> {method: score_rewrite}. The original wins
    all ties, including ties between methods (resolved by method name for
    determinism). Labeled "tournament" in the outcome's method field.
    """
    order = list(segment_order) if segment_order is not None else sorted(score_original)
    outcomes = []
    for segment_id in order:
        if segment_id not in score_original:
            raise MissingScore(segment_id)
        per_method = candidates.get(segment_id, {})
        if not per_method:
            raise MissingScore(segment_id, "any rewrite method")
        best_method = min(per_method, key=lambda m: (-per_method[m], m))
        best_score = per_method[best_method]
        outcome = select_one(segment_id, score_original[segment_id], best_score,
                             f"tournament:{best_method}")
        outcomes.append(outcome)
    summary = {
        "n_rewrite_chosen": sum(1 for o in outcomes if o.chosen == "rewrite"),
        "n_total": len(outcomes),
    }
    return outcomes, summary
