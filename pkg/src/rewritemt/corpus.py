"""Corpus loading and line-delimited record persistence.

One UTF-8 JSON object per line; see FORMATS.md for every record schema.
Loading trims leading/trailing whitespace from text fields (interior
whitespace is preserved because prompt templates are whitespace-sensitive)
and rejects duplicate ids outright.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DuplicateId, EmptySource, IoFailure, MalformedLine


@dataclass(frozen=True)
class LanguagePair:
    src: str
    tgt: str

    def __post_init__(self):
        if not self.src or not self.tgt:
            raise ValueError("language tags must be nonempty")

    @classmethod
    def parse(cls, text: str) -> "LanguagePair":
        src, sep, tgt = text.strip().lower().partition("-")
        if not sep or not src or not tgt:
            raise ValueError(f"expected 'src-tgt' language pair, got {text!r}")
        return cls(src, tgt)

    def __str__(self) -> str:
        return f"{self.src.lower()}-{self.tgt.lower()}"


@dataclass(frozen=True)
class SegmentRecord:
    id: str
    source: str
    reference: str | None
    src_lang: str
    tgt_lang: str

    def validate(self) -> None:
        if not self.id:
            raise ValueError("segment id must be nonempty")
        if not self.source.strip():
            raise EmptySource(self.id)
        if self.src_lang == self.tgt_lang:
            raise ValueError(f"segment {self.id!r}: src_lang equals tgt_lang")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "reference": self.reference,
            "src_lang": self.src_lang,
            "tgt_lang": self.tgt_lang,
        }


def load_segments(path: str | Path, pair: LanguagePair) -> list[SegmentRecord]:
    """Load one SegmentRecord per line, in file order.

    Raises MalformedLine / DuplicateId / EmptySource on the first offending
    line; a partially valid file never yields a partial result.
    """
    records: list[SegmentRecord] = []
    seen: set[str] = set()
    for line_no, raw in _numbered_lines(path):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedLine(line_no, f"invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise MalformedLine(line_no, "record is not an object")
        if "id" not in obj or "source" not in obj:
            missing = "id" if "id" not in obj else "source"
            raise MalformedLine(line_no, f"missing {missing!r} field")
        seg_id = str(obj["id"]).strip()
        if not seg_id:
            raise MalformedLine(line_no, "empty id")
        if seg_id in seen:
            raise DuplicateId(seg_id)
        seen.add(seg_id)
        source = str(obj["source"]).strip()
        if not source:
            raise EmptySource(seg_id)
        reference = obj.get("reference")
        if reference is not None:
            reference = str(reference).strip() or None
        src_lang = str(obj.get("src_lang") or pair.src).lower()
        tgt_lang = str(obj.get("tgt_lang") or pair.tgt).lower()
        if src_lang != pair.src or tgt_lang != pair.tgt:
            raise MalformedLine(line_no, f"language pair {src_lang}-{tgt_lang} does not match {pair}")
        record = SegmentRecord(seg_id, source, reference, src_lang, tgt_lang)
        record.validate()
        records.append(record)
    return records


def write_records(path: str | Path, records: Sequence) -> int:
    """Write records (dataclasses or dicts) one JSON object per line.

    Returns the number of lines written. Round-trip safe: re-loading yields
    field-for-field equal records.
    """
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            count = 0
            for rec in records:
                fh.write(json.dumps(_as_dict(rec), ensure_ascii=False))
                fh.write("\n")
                count += 1
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    return count


def read_jsonl(path: str | Path) -> list[dict]:
    """Load every line of a record file as a dict, in file order."""
    out = []
    for line_no, raw in _numbered_lines(path):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedLine(line_no, f"invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise MalformedLine(line_no, "record is not an object")
        out.append(obj)
    return out


def _numbered_lines(path: str | Path) -> Iterable[tuple[int, str]]:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, start=1):
                if raw.strip():
                    yield line_no, raw
    except OSError as exc:
        raise IoFailure(path, exc) from exc


def _as_dict(rec) -> dict:
    if isinstance(rec, dict):
        return rec
    if hasattr(rec, "to_dict"):
        return rec.to_dict()
    if dataclasses.is_dataclass(rec):
        return dataclasses.asdict(rec)
    raise TypeError(f"cannot serialize record of type {type(rec).__name__}")
