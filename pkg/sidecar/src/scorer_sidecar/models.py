"""Scorer model implementations behind a single batch-scoring interface.

The built-in "overlap" model is a deterministic lexical F1 over case-folded
word multisets: no downloads, stable to 1e-6, good enough to validate the
wire protocol and batching. Real checkpoints (xCOMET-class via the comet
library, MetricX-class via transformers) load lazily from their configured
identifiers; a missing library or failed load surfaces as ModelNotLoaded,
which the service maps to 503.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence


class ModelNotLoaded(Exception):
    def __init__(self, identifier: str, cause: str = ""):
        self.identifier = identifier
        super().__init__(f"model {identifier!r} is not loaded"
                         + (f": {cause}" if cause else ""))


@dataclass(frozen=True)
class ScoreItem:
    source: str
    hypothesis: str
    reference: str | None
    metric: str


def _word_f1(a: str, b: str) -> float:
    ca = Counter(a.lower().split())
    cb = Counter(b.lower().split())
    if not ca or not cb:
        return 0.0
    overlap = sum((ca & cb).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(ca.values())
    recall = overlap / sum(cb.values())
    return 2 * precision * recall / (precision + recall)


class OverlapModel:
    """Deterministic fallback scorer; xCOMET-family range [0, 1]."""

    family = "xcomet"

    def score_batch(self, items: Sequence[ScoreItem]) -> list[float]:
        values = []
        for item in items:
            if item.metric == "qe":
                value = _word_f1(item.hypothesis, item.source)
            elif item.metric == "ref_only":
                value = _word_f1(item.hypothesis, item.reference or "")
            else:
                value = (_word_f1(item.hypothesis, item.source)
                         + _word_f1(item.hypothesis, item.reference or "")) / 2.0
            values.append(value)
        return values


class XCometModel:
    """xCOMET-class checkpoint served through the comet library."""

    family = "xcomet"

    def __init__(self, checkpoint: str, device: str = "cpu"):
        self.checkpoint = checkpoint
        self.device = device
        try:
            from comet import download_model, load_from_checkpoint
        except ImportError as exc:
            raise ModelNotLoaded(checkpoint, f"comet library unavailable ({exc})") from exc
        try:
            path = download_model(checkpoint)
            self._model = load_from_checkpoint(path)
            self._model.eval()
        except Exception as exc:
            raise ModelNotLoaded(checkpoint, str(exc)) from exc

    def score_batch(self, items: Sequence[ScoreItem]) -> list[float]:
        data = []
        for item in items:
            entry = {"src": item.source, "mt": item.hypothesis}
            if item.metric in ("qe_ref", "ref_only"):
                entry["ref"] = item.reference
            if item.metric == "ref_only":
                entry["src"] = item.hypothesis
            data.append(entry)
        gpus = 0 if self.device == "cpu" else 1
        output = self._model.predict(data, batch_size=len(data), gpus=gpus,
                                     progress_bar=False)
        return [float(s) for s in output.scores]


class MetricXModel:
    """MetricX-class regression checkpoint served through transformers."""

    family = "metricx"

    def __init__(self, checkpoint: str, device: str = "cpu"):
        self.checkpoint = checkpoint
        self.device = device
        try:
            import torch  # noqa: F401
            from transformers import AutoModelForSeq2SeqLM, AutoTokenizer
        except ImportError as exc:
            raise ModelNotLoaded(checkpoint, f"transformers unavailable ({exc})") from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(checkpoint)
            self._model = AutoModelForSeq2SeqLM.from_pretrained(checkpoint)
            self._model.to(device)
            self._model.eval()
        except Exception as exc:
            raise ModelNotLoaded(checkpoint, str(exc)) from exc

    def score_batch(self, items: Sequence[ScoreItem]) -> list[float]:
        import torch

        texts = []
        for item in items:
            if item.metric == "ref_only":
                texts.append(f"candidate: {item.hypothesis} reference: {item.reference}")
            else:
                texts.append(f"source: {item.source} candidate: {item.hypothesis}")
        inputs = self._tokenizer(texts, max_length=1024, truncation=True,
                                 padding="longest", return_tensors="pt").to(self.device)
        with torch.no_grad():
            output = self._model(**inputs)
        return [float(v) for v in output.predictions.flatten().tolist()]


_MODEL_CACHE: dict[tuple[str, str], object] = {}


def build_model(identifier: str, device: str = "cpu"):
    """Instantiate (once) the model behind a config identifier."""
    key = (identifier, device)
    if key in _MODEL_CACHE:
        return _MODEL_CACHE[key]
    if identifier == "overlap":
        model = OverlapModel()
    elif identifier.startswith("xcomet:"):
        model = XCometModel(identifier.split(":", 1)[1], device)
    elif identifier.startswith("metricx:"):
        model = MetricXModel(identifier.split(":", 1)[1], device)
    else:
        raise ModelNotLoaded(identifier, "unrecognized model identifier")
    _MODEL_CACHE[key] = model
    return model


def clip_to_range(value: float, family: str) -> float:
    """xCOMET-family values are clipped to [0,1]; MetricX-family to >= 0."""
    if family == "xcomet":
        return min(1.0, max(0.0, value))
    return max(0.0, value)
