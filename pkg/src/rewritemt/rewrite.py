"""Per-segment rewriting: single-stage methods, the two-stage CoT flow,
post-edit modes, and copy detection.

Empty or degenerate generations are skipped with a logged warning, never
silently replaced by the source, so selection statistics stay unbiased.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .backends import BackendClient, GenerationRequest
from .corpus import SegmentRecord
from .errors import EmptyGeneration, EmptyInput
from .prompts import get_method, render_prompt

log = logging.getLogger(__name__)

POSTEDIT_MODES = ("owo", "ow", "i_plus_o")

_WS_RUN = re.compile(r"\s+")


def normalize_for_copy(text: str) -> str:
    """Trim outer whitespace, collapse interior runs to single spaces.

    Case and punctuation are preserved: template echoes add whitespace
    noise, but casing changes are genuine edits.
    """
    return _WS_RUN.sub(" ", text.strip())


def detect_copy(source: str, rewrite: str) -> bool:
    return normalize_for_copy(source) == normalize_for_copy(rewrite)


def copy_rate(records) -> float:
    """Percentage of records flagged is_copy, to one decimal."""
    records = list(records)
    if not records:
        raise EmptyInput("rewrite records")
    copies = sum(1 for r in records if r.is_copy)
    return round(100.0 * copies / len(records), 1)


@dataclass(frozen=True)
class RewriteRecord:
    segment_id: str
    method: str
    rewrite: str
    is_copy: bool
    stage_outputs: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "method": self.method,
            "rewrite": self.rewrite,
            "is_copy": self.is_copy,
            "stage_outputs": list(self.stage_outputs),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RewriteRecord":
        return cls(
            segment_id=str(obj["segment_id"]),
            method=str(obj["method"]),
            rewrite=str(obj["rewrite"]),
            is_copy=bool(obj["is_copy"]),
            stage_outputs=tuple(obj.get("stage_outputs") or ()),
        )


def run_rewrite(segment: SegmentRecord, method: str, gen: BackendClient,
                max_tokens: int = 256) -> RewriteRecord | None:
    """Rewrite one segment with one method.

    Returns None when the post-processed generation is empty (skip-and-log
    policy). For "cot" the record carries [rewrite, translation] in
    stage_outputs; single-stage methods carry [rewrite].
    """
    spec = get_method(method)
    if spec.family not in ("mt_agnostic", "task_aware"):
        raise ValueError(f"method {method!r} is not a rewriting method")

    prompt = render_prompt(method, segment.source, tgt_lang=segment.tgt_lang, stage=1)
    rewrite = gen.generate(GenerationRequest(prompt=prompt.text, backend_id=gen.backend_id,
                                             max_tokens=max_tokens))
    if not rewrite:
        log.warning("skipping empty generation: segment=%s method=%s", segment.id, method)
        _note_skip(segment.id, method)
        return None

    stage_outputs = [rewrite]
    if len(spec.stages) > 1:
        step2 = render_prompt(method, rewrite, tgt_lang=segment.tgt_lang, stage=2)
        translation = gen.generate(GenerationRequest(prompt=step2.text,
                                                     backend_id=gen.backend_id,
                                                     max_tokens=max_tokens))
        if not translation:
            log.warning("skipping empty stage-2 generation: segment=%s method=%s",
                        segment.id, method)
            _note_skip(segment.id, method)
            return None
        stage_outputs.append(translation)

    return RewriteRecord(
        segment_id=segment.id,
        method=method,
        rewrite=rewrite,
        is_copy=detect_copy(segment.source, rewrite),
        stage_outputs=tuple(stage_outputs),
    )


def _note_skip(segment_id: str, method: str) -> None:
    # Raised-and-caught form keeps the error type in the logs for auditing.
    err = EmptyGeneration(segment_id, method)
    log.info("%s", err)


def run_postedit(segment: SegmentRecord, translation: str, mode: str,
                 gen: BackendClient, max_tokens: int = 256) -> str:
    """Post-edit a translation; ow shows the source, owo does not.

    i_plus_o is the composition rewrite-then-postedit: the caller supplies
    the translation of the selected rewrite, and the edit prompt is the
    source-aware one.
    """
    if mode not in POSTEDIT_MODES:
        raise ValueError(f"mode must be one of {POSTEDIT_MODES}, got {mode!r}")
    if not translation:
        raise EmptyInput("translation")
    method = "postedit.owo" if mode == "owo" else "postedit.ow"
    prompt = render_prompt(method, segment.source, tgt_lang=segment.tgt_lang,
                           mt_output=translation, stage=1)
    edited = gen.generate(GenerationRequest(prompt=prompt.text, backend_id=gen.backend_id,
                                            max_tokens=max_tokens))
    if not edited:
        log.warning("empty post-edit generation for segment=%s mode=%s; keeping input",
                    segment.id, mode)
        return translation
    return edited
