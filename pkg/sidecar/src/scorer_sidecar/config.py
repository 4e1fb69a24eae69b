"""Sidecar configuration: which model serves which metric, device, batching.

Model identifiers are configuration, not code, so metric upgrades never
touch the service. Identifier forms:

  "overlap"             built-in deterministic lexical scorer (no downloads)
  "xcomet:<hf-name>"    xCOMET-class checkpoint via the comet library
  "metricx:<hf-name>"   MetricX-class checkpoint via transformers
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

METRICS = ("qe", "qe_ref", "ref_only")


@dataclass
class SidecarConfig:
    models: dict = field(default_factory=lambda: {m: "overlap" for m in METRICS})
    device: str = "cpu"
    max_batch_size: int = 16
    batch_window_ms: float = 20.0
    host: str = "127.0.0.1"
    port: int = 8100

    def __post_init__(self):
        unknown = set(self.models) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metrics in model map: {sorted(unknown)}")
        if self.max_batch_size < 1:
            raise ValueError("max_batch_size must be >= 1")
        if self.batch_window_ms < 0:
            raise ValueError("batch_window_ms must be non-negative")

    @classmethod
    def from_file(cls, path: str | Path) -> "SidecarConfig":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            models=dict(obj.get("models", {m: "overlap" for m in METRICS})),
            device=obj.get("device", "cpu"),
            max_batch_size=int(obj.get("max_batch_size", 16)),
            batch_window_ms=float(obj.get("batch_window_ms", 20.0)),
            host=obj.get("host", "127.0.0.1"),
            port=int(obj.get("port", 8100)),
        )
