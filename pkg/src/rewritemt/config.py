"""Pipeline configuration: backends, methods, seeds, and stage wiring.

Config files are JSON; every key is documented in the README. Backend specs
are either shorthand strings ("stub:rules", "stub:identity", "stub:xcomet",
"stub:metricx", or a base URL) or dicts with kind/preset/family/base_url.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .backends import ResponseCache, make_backend
from .corpus import LanguagePair
from .errors import ConfigError
from .prompts import get_method

REWRITE_FAMILIES = ("mt_agnostic", "task_aware")

DEFAULT_METHODS = (
    "simplification",
    "paraphrase",
    "stylistic.gec",
    "stylistic.coherent",
    "stylistic.understandable",
    "stylistic.formal",
    "easy_translation",
    "cot",
)


@dataclass
class PipelineConfig:
    pair: LanguagePair
    methods: tuple[str, ...] = DEFAULT_METHODS
    backends: dict = field(default_factory=lambda: {
        "gen": "stub:rules",
        "mt": "stub:rules",
        "xcomet": "stub:xcomet",
    })
    generation_backend: str = "gen"
    mt_backend: str = "mt"
    scorer_backend: str = "xcomet"
    metricx_backend: str | None = None
    cache_dir: str | None = None
    seed: int = 13
    max_inflight: int = 8
    max_tokens: int = 256
    selection_method: str = "simplification"
    selection_mode: str = "single"  # or "tournament" (extension)
    postedit_modes: tuple[str, ...] = ("owo", "ow", "i_plus_o")
    humaneval_pairwise: str | None = None
    humaneval_likert: str | None = None

    def __post_init__(self):
        for name in self.methods:
            spec = get_method(name)  # raises UnknownMethod
            if spec.family not in REWRITE_FAMILIES:
                raise ConfigError(f"{name!r} is not a rewriting method")
        if self.selection_method not in self.methods:
            raise ConfigError(
                f"selection_method {self.selection_method!r} is not among methods")
        if self.selection_mode not in ("single", "tournament"):
            raise ConfigError(f"unknown selection_mode {self.selection_mode!r}")
        for backend_id in self._referenced_backends():
            if backend_id not in self.backends:
                raise ConfigError(f"backend {backend_id!r} is not configured")
        if self.max_inflight < 1:
            raise ConfigError("max_inflight must be >= 1")

    def _referenced_backends(self) -> list[str]:
        ids = [self.generation_backend, self.mt_backend, self.scorer_backend]
        if self.metricx_backend:
            ids.append(self.metricx_backend)
        return ids

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConfig":
        try:
            pair = LanguagePair.parse(obj["pair"])
        except KeyError:
            raise ConfigError("config must set 'pair' (e.g. \"en-de\")") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        known = {
            "methods": tuple(obj.get("methods", DEFAULT_METHODS)),
            "backends": dict(obj.get("backends", {})) or None,
            "generation_backend": obj.get("generation_backend", "gen"),
            "mt_backend": obj.get("mt_backend", "mt"),
            "scorer_backend": obj.get("scorer_backend", "xcomet"),
            "metricx_backend": obj.get("metricx_backend"),
            "cache_dir": obj.get("cache_dir"),
            "seed": int(obj.get("seed", 13)),
            "max_inflight": int(obj.get("max_inflight", 8)),
            "max_tokens": int(obj.get("max_tokens", 256)),
            "selection_method": obj.get("selection_method", "simplification"),
            "selection_mode": obj.get("selection_mode", "single"),
            "postedit_modes": tuple(obj.get("postedit_modes", ("owo", "ow", "i_plus_o"))),
            "humaneval_pairwise": obj.get("humaneval_pairwise"),
            "humaneval_likert": obj.get("humaneval_likert"),
        }
        if known["backends"] is None:
            known.pop("backends")
        try:
            return cls(pair=pair, **known)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except ValueError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(obj)

    def build_clients(self) -> dict:
        """Instantiate one BackendClient per referenced backend id."""
        cache = ResponseCache(self.cache_dir)
        clients = {}
        for backend_id in dict.fromkeys(self._referenced_backends()):
            clients[backend_id] = make_backend(
                backend_id, self.backends[backend_id], cache=cache,
                max_inflight=self.max_inflight)
        return clients
