"""Construction of the positive-rewrite fine-tuning dataset.

Pipeline order is fixed: keep strict translatability improvements, drop
duplicates, then drop lengthy instances above Q3 + k*IQR. Length is measured
in whitespace tokens of the rewrite (configurable); quartiles use linear
interpolation. The module emits instruction-tuning files plus a manifest
recording hyperparameters and per-stage filter counts; training itself
happens elsewhere.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyInput, MissingField, MissingScore
from .prompts import render_prompt
from .rewrite import RewriteRecord, normalize_for_copy

SFT_TEMPLATES = ("basic", "mt", "reference")

# Training hyperparameters recorded for downstream trainers.
TRAINING_HYPERPARAMETERS = {
    "method": "qlora",
    "quantization_bits": 8,
    "lora_rank": 16,
    "lora_alpha": 32,
    "lora_dropout": 0.05,
    "epochs": 10,
}


@dataclass(frozen=True)
class FtdataConfig:
    iqr_multiplier: float = 1.5
    length_unit: str = "whitespace_tokens"  # or "characters"
    train_fraction: float = 0.9
    seed: int = 13

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("train_fraction must be in (0, 1)")
        if self.iqr_multiplier <= 0:
            raise ValueError("iqr_multiplier must be positive")
        if self.length_unit not in ("whitespace_tokens", "characters"):
            raise ValueError(f"unknown length_unit {self.length_unit!r}")


@dataclass(frozen=True)
class SftExample:
    source: str
    rewrite: str
    improvement: float
    mt_output: str | None = None
    reference: str | None = None
    template: str = "basic"

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "rewrite": self.rewrite,
            "improvement": self.improvement,
            "mt_output": self.mt_output,
            "reference": self.reference,
            "template": self.template,
        }


def measure_length(text: str, unit: str) -> int:
    if unit == "characters":
        return len(text)
    return len(text.split())


def iqr_threshold(lengths: Sequence[float], k: float = 1.5) -> float:
    """Q3 + k * (Q3 - Q1) with linear-interpolation quartiles."""
    if len(lengths) == 0:
        raise EmptyInput("lengths")
    q1, q3 = np.percentile(np.asarray(lengths, dtype=float), [25, 75])
    return float(q3 + k * (q3 - q1))


def build_dpos(
    segments,
    rewrites: Sequence[RewriteRecord],
    score_original: Mapping[str, float],
    score_rewrite: Mapping[tuple[str, str], float],
    config: FtdataConfig = FtdataConfig(),
    translations: Mapping[str, str] | None = None,
) -> tuple[list[SftExample], dict]:
    """Keep rewrites that strictly improve translatability, dedup, length-filter.

    score_original maps segment_id -> xCOMET of (s, t); score_rewrite maps
    (segment_id, method) -> xCOMET of (s', t'). Returns the surviving
    examples plus per-stage filter counts for the manifest.
    """
    by_id = {seg.id: seg for seg in segments}
    translations = translations or {}

    improved: list[SftExample] = []
    for rec in rewrites:
        seg = by_id.get(rec.segment_id)
        if seg is None:
            continue
        if rec.segment_id not in score_original:
            raise MissingScore(rec.segment_id)
        key = (rec.segment_id, rec.method)
        if key not in score_rewrite:
            raise MissingScore(rec.segment_id, rec.method)
        improvement = score_rewrite[key] - score_original[rec.segment_id]
        if improvement <= 0:
            continue
        if normalize_for_copy(rec.rewrite) == normalize_for_copy(seg.source):
            continue
        improved.append(SftExample(
            source=seg.source,
            rewrite=rec.rewrite,
            improvement=improvement,
            mt_output=translations.get(rec.segment_id),
            reference=seg.reference,
        ))

    seen: set[tuple[str, str]] = set()
    deduped: list[SftExample] = []
    for ex in improved:
        key = (normalize_for_copy(ex.source), normalize_for_copy(ex.rewrite))
        if key in seen:
            continue
        seen.add(key)
        deduped.append(ex)

    if deduped:
        lengths = [measure_length(ex.rewrite, config.length_unit) for ex in deduped]
        threshold = iqr_threshold(lengths, config.iqr_multiplier)
        kept = [ex for ex, n in zip(deduped, lengths) if n <= threshold]
    else:
        threshold = 0.0
        kept = []

    stats = {
        "candidates": len(rewrites),
        "improved": len(improved),
        "after_dedup": len(deduped),
        "after_length_filter": len(kept),
        "length_threshold": threshold,
        "length_unit": config.length_unit,
        "length_field": "rewrite",
        "iqr_multiplier": config.iqr_multiplier,
    }
    return kept, stats


def emit_sft_records(
    examples: Sequence[SftExample],
    template: str,
    out_base: str | Path,
    config: FtdataConfig = FtdataConfig(),
    tgt_lang: str = "de",
) -> int:
    """Write <out_base>.train.jsonl and <out_base>.valid.jsonl.

    Each record is {"prompt", "completion", "template"}; prompt + completion
    concatenate to the full training-template text. The split is a seeded
    shuffle, deterministic and disjoint.
    """
    if template not in SFT_TEMPLATES:
        raise ValueError(f"template must be one of {SFT_TEMPLATES}, got {template!r}")

    records = []
    for ex in examples:
        if template == "mt" and not ex.mt_output:
            raise MissingField(template, "mt_output")
        if template == "reference" and not ex.reference:
            raise MissingField(template, "reference")
        records.append({
            "prompt": render_sft_prompt(ex, template, tgt_lang=tgt_lang),
            "completion": " " + ex.rewrite,
            "template": template,
        })

    rng = random.Random(config.seed)
    order = list(range(len(records)))
    rng.shuffle(order)
    n_train = int(len(records) * config.train_fraction + 1e-9)
    train_idx = sorted(order[:n_train])
    valid_idx = sorted(order[n_train:])

    out_base = Path(out_base)
    out_base.parent.mkdir(parents=True, exist_ok=True)
    _write_jsonl(Path(str(out_base) + ".train.jsonl"), [records[i] for i in train_idx])
    _write_jsonl(Path(str(out_base) + ".valid.jsonl"), [records[i] for i in valid_idx])
    return len(records)


def render_sft_prompt(ex: SftExample, template: str, tgt_lang: str = "de") -> str:
    method = {"basic": "sft.basic", "mt": "sft.mt", "reference": "sft.reference"}[template]
    return render_prompt(
        method,
        ex.source,
        tgt_lang=tgt_lang,
        mt_output=ex.mt_output,
        reference=ex.reference,
    ).text


def write_training_manifest(path: str | Path, filter_stats: dict,
                            config: FtdataConfig, split_counts: dict | None = None) -> None:
    """Record training hyperparameters and filter statistics for downstream use."""
    manifest = {
        "hyperparameters": dict(TRAINING_HYPERPARAMETERS,
                                train_fraction=config.train_fraction),
        "filter_stats": filter_stats,
        "split": split_counts or {},
        "seed": config.seed,
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def _write_jsonl(path: Path, records: list[dict]) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False))
            fh.write("\n")
