"""Generation and scoring backends over a two-endpoint wire protocol.

A backend is either a live HTTP service (POST {base}/v1/generate and
POST {base}/v1/score) or a deterministic offline stub. Every call goes
through a persistent file cache keyed by a digest of the full request, so
pipeline results are byte-identical between cold and warm runs.

Stub scorers use a normalized character 3-gram F-score: order-sensitive,
deterministic, and correlated with copying, which is enough to exercise
selection logic offline. Temperature is fixed at 0.0 in all pipeline paths.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import requests

from .errors import (
    BackendError,
    BackendTimeout,
    BackendUnreachable,
    ConfigError,
    RangeViolation,
)

log = logging.getLogger(__name__)

CACHE_DIR_ENV = "REWRITEMT_CACHE_DIR"

METRIC_ARITIES = ("qe", "qe_ref", "ref_only")

# Score direction and admissible range per metric family.
FAMILY_DIRECTIONS = {"xcomet": "higher_better", "metricx": "lower_better"}


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    backend_id: str
    max_tokens: int = 256
    temperature: float = 0.0

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.temperature < 0.0:
            raise ValueError("temperature must be non-negative")


@dataclass(frozen=True)
class ScoreRequest:
    source: str
    hypothesis: str
    reference: str | None
    metric: str
    backend_id: str

    def __post_init__(self):
        if self.metric not in METRIC_ARITIES:
            raise ValueError(f"metric must be one of {METRIC_ARITIES}, got {self.metric!r}")
        needs_ref = self.metric in ("qe_ref", "ref_only")
        if needs_ref and not self.reference:
            raise ValueError(f"metric {self.metric!r} requires a reference")
        if not needs_ref and self.reference is not None:
            raise ValueError(f"metric {self.metric!r} must not carry a reference")
        if not self.hypothesis:
            raise ValueError("hypothesis must be nonempty")
        if self.metric in ("qe", "qe_ref") and not self.source:
            raise ValueError(f"metric {self.metric!r} requires a source")


@dataclass(frozen=True)
class ScoreRecord:
    segment_id: str
    metric: str
    arity: str
    value: float
    direction: str

    def to_dict(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "metric": self.metric,
            "arity": self.arity,
            "value": self.value,
            "direction": self.direction,
        }


# ---------------------------------------------------------------------------
# Generation post-processing

_QUOTE_PAIRS = (('"', '"'), ("'", "'"), ("“", "”"), ("‘", "’"))


def postprocess_generation(text: str) -> str:
    """Take text up to the first blank line, trim, strip one quote pair.

    Completions often echo trailing content after the answer slot; the
    templates end with an answer cue so everything after a blank line is
    noise.
    """
    head = text.split("\n\n", 1)[0]
    head = head.strip()
    for opener, closer in _QUOTE_PAIRS:
        if len(head) >= 2 and head.startswith(opener) and head.endswith(closer):
            head = head[1:-1].strip()
            break
    return head


# ---------------------------------------------------------------------------
# Stub backends

def _extract_payload(prompt: str) -> str:
    """Pull the embedded text a template is asking the model to work on.

    The registry's templates carry the payload after the last "Original: "
    line (post-edit prompts have two), after "English: " for the translation
    step, or after the single instruction colon for the CoEdIT-style
    one-liners.
    """
    original_lines = [ln[len("Original: "):] for ln in prompt.splitlines()
                      if ln.startswith("Original: ")]
    if original_lines:
        return original_lines[-1]
    for ln in prompt.splitlines():
        if ln.startswith("English: "):
            return ln[len("English: "):]
    first_line = prompt.splitlines()[0] if prompt else ""
    if ": " in first_line:
        return first_line.split(": ", 1)[1]
    return prompt


def _drop_long_words(text: str, limit: int) -> str:
    kept = [w for w in text.split() if len(w) <= limit]
    return " ".join(kept) if kept else text


def _rotate_words(text: str) -> str:
    words = text.split()
    if len(words) < 2:
        return text
    return " ".join(words[1:] + words[:1])


def _reverse_words(text: str) -> str:
    return " ".join(w[::-1] for w in text.split())


def _capitalize_words(text: str) -> str:
    return " ".join(w[:1].upper() + w[1:] for w in text.split())


# Cue -> transformation of the embedded payload. Checked in order; identity
# cues model the high copy rates the CoEdIT prompts show in practice.
_STUB_RULES: tuple[tuple[str, Callable[[str], str]], ...] = (
    ("Fix the grammar:", lambda s: s),
    ("Make this text coherent:", lambda s: s),
    ("Rewrite to make this easier to understand:", lambda s: s.lower()),
    ("Write this more formally:", _capitalize_words),
    ("Simplify the", lambda s: _drop_long_words(s.lower(), 9)),
    ("Paraphrase the", _rotate_words),
    ("Rewrite the Original English sentence", lambda s: _drop_long_words(s.lower(), 10)),
    ("Rewrite the Original sentence", lambda s: _drop_long_words(s.lower(), 11)),
    ("Now, translate the English sentence", _reverse_words),
    ("### Instruction:", lambda s: _rotate_words(s.lower())),
)


class StubGenerationBackend:
    """Deterministic generator: output is a pure function of prompt and seed.

    preset "rules" applies the per-method rule table; preset "identity"
    echoes the embedded source for every prompt (copy-rate modelling).
    """

    def __init__(self, backend_id: str, preset: str = "rules", seed: int = 0):
        if preset not in ("rules", "identity"):
            raise ConfigError(f"unknown stub generator preset {preset!r}")
        self.backend_id = backend_id
        self.preset = preset
        self.seed = seed

    def raw_generate(self, req: GenerationRequest) -> str:
        payload = _extract_payload(req.prompt)
        if self.preset == "identity":
            return payload
        for cue, rule in _STUB_RULES:
            if cue in req.prompt:
                return rule(payload)
        return payload

    def config_digest(self) -> dict:
        return {"kind": "stub", "preset": self.preset, "seed": self.seed}


def char_ngram_fscore(a: str, b: str, n: int = 3) -> float:
    """Normalized character n-gram F1 between two strings, in [0, 1]."""
    def grams(text: str) -> Counter:
        if len(text) < n:
            return Counter([text]) if text else Counter()
        return Counter(text[i:i + n] for i in range(len(text) - n + 1))

    ga, gb = grams(a), grams(b)
    if not ga or not gb:
        return 0.0
    overlap = sum((ga & gb).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(ga.values())
    recall = overlap / sum(gb.values())
    return 2 * precision * recall / (precision + recall)


class StubScoreBackend:
    """Deterministic scorer over character 3-gram overlap.

    family "xcomet": F-score in [0,1], higher better.
    family "metricx": 25 * (1 - F), >= 0, lower better.
    """

    def __init__(self, backend_id: str, family: str = "xcomet", seed: int = 0):
        if family not in FAMILY_DIRECTIONS:
            raise ConfigError(f"unknown scorer family {family!r}")
        self.backend_id = backend_id
        self.family = family
        self.seed = seed

    def raw_score(self, req: ScoreRequest) -> float:
        if req.metric == "qe":
            f = char_ngram_fscore(req.hypothesis, req.source)
        elif req.metric == "ref_only":
            f = char_ngram_fscore(req.hypothesis, req.reference or "")
        else:
            f_src = char_ngram_fscore(req.hypothesis, req.source)
            f_ref = char_ngram_fscore(req.hypothesis, req.reference or "")
            f = (f_src + f_ref) / 2.0
        if self.family == "metricx":
            return 25.0 * (1.0 - f)
        return f

    def config_digest(self) -> dict:
        return {"kind": "stub", "family": self.family, "seed": self.seed}


# ---------------------------------------------------------------------------
# Wire protocol bodies (shared with the golden protocol fixtures)

def generation_request_body(req: GenerationRequest) -> dict:
    return {"prompt": req.prompt, "max_tokens": req.max_tokens,
            "temperature": req.temperature}


def score_request_body(req: ScoreRequest) -> dict:
    return {"source": req.source, "hypothesis": req.hypothesis,
            "reference": req.reference, "metric": req.metric}


def parse_generation_response(data: dict, backend_id: str = "?") -> str:
    if "text" not in data:
        raise BackendError(backend_id, 200, "response missing 'text'")
    return str(data["text"])


def parse_score_response(data: dict, backend_id: str = "?") -> float:
    if "value" not in data:
        raise BackendError(backend_id, 200, "response missing 'value'")
    return float(data["value"])


# ---------------------------------------------------------------------------
# HTTP backends

class HttpBackend:
    """Client for the two-endpoint wire protocol with bounded retries.

    3 attempts with exponential backoff starting at 500 ms; connection
    failures surface as BackendUnreachable, timeouts as BackendTimeout,
    and non-retryable HTTP statuses as BackendError.
    """

    MAX_ATTEMPTS = 3

    def __init__(self, backend_id: str, base_url: str, family: str = "xcomet",
                 timeout: float = 60.0, retry_base_delay: float = 0.5,
                 session: requests.Session | None = None):
        self.backend_id = backend_id
        self.base_url = base_url.rstrip("/")
        self.family = family
        self.timeout = timeout
        self.retry_base_delay = retry_base_delay
        self.session = session or requests.Session()

    def raw_generate(self, req: GenerationRequest) -> str:
        data = self._post("/v1/generate", generation_request_body(req))
        return parse_generation_response(data, self.backend_id)

    def raw_score(self, req: ScoreRequest) -> float:
        data = self._post("/v1/score", score_request_body(req))
        return parse_score_response(data, self.backend_id)

    def _post(self, endpoint: str, body: dict) -> dict:
        url = self.base_url + endpoint
        last_exc: Exception | None = None
        for attempt in range(self.MAX_ATTEMPTS):
            if attempt:
                time.sleep(self.retry_base_delay * (2 ** (attempt - 1)))
            try:
                resp = self.session.post(url, json=body, timeout=self.timeout)
            except requests.Timeout as exc:
                last_exc = BackendTimeout(self.backend_id)
                last_exc.__cause__ = exc
                continue
            except requests.ConnectionError as exc:
                last_exc = BackendUnreachable(self.backend_id, exc)
                continue
            if resp.status_code >= 500:
                last_exc = BackendError(self.backend_id, resp.status_code, resp.text)
                continue
            if resp.status_code >= 400:
                raise BackendError(self.backend_id, resp.status_code, resp.text)
            try:
                return resp.json()
            except ValueError:
                raise BackendError(self.backend_id, resp.status_code,
                                   f"non-JSON response: {resp.text[:200]}") from None
        assert last_exc is not None
        raise last_exc

    def config_digest(self) -> dict:
        return {"kind": "http", "base_url": self.base_url, "family": self.family}


# ---------------------------------------------------------------------------
# Response cache

class ResponseCache:
    """File-per-entry cache; concurrent readers, serialized atomic writes.

    A corrupt entry is treated as a miss with a warning, never an error.
    """

    def __init__(self, directory: str | Path | None):
        env_dir = os.environ.get(CACHE_DIR_ENV)
        chosen = env_dir or directory
        self.directory = Path(chosen) if chosen else None
        if self.directory:
            self.directory.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @property
    def enabled(self) -> bool:
        return self.directory is not None

    @staticmethod
    def key_for(payload: dict) -> str:
        canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def get(self, key: str):
        if not self.enabled:
            return None
        path = self.directory / f"{key}.json"
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
            return entry["response"]
        except (OSError, ValueError, KeyError):
            log.warning("corrupt cache entry %s; treating as miss", key)
            return None

    def put(self, key: str, response) -> None:
        if not self.enabled:
            return
        path = self.directory / f"{key}.json"
        tmp = path.with_suffix(".tmp")
        with self._write_lock:
            tmp.write_text(json.dumps({"response": response}, ensure_ascii=False),
                           encoding="utf-8")
            os.replace(tmp, path)


def cached_call(cache: ResponseCache, key: str, inner: Callable[[], object]):
    """Return the cached response for key, invoking inner only on a miss."""
    cached = cache.get(key)
    if cached is not None:
        return cached
    value = inner()
    cache.put(key, value)
    return value


# ---------------------------------------------------------------------------
# Client facade

class BackendClient:
    """Caching, concurrency-bounded facade over a raw backend.

    At most max_inflight requests are outstanding at once; responses map
    back to their requests positionally, so completion order never affects
    results.
    """

    def __init__(self, backend, cache: ResponseCache | None = None,
                 max_inflight: int = 8):
        self.backend = backend
        self.backend_id = backend.backend_id
        self.cache = cache or ResponseCache(None)
        self._slots = threading.Semaphore(max_inflight)
        self.max_inflight = max_inflight
        self.calls = 0  # actual backend invocations (cache misses)

    # -- generation ---------------------------------------------------------

    def generate(self, req: GenerationRequest) -> str:
        key = self.cache.key_for({
            "op": "generate",
            "backend": self.backend.config_digest(),
            "prompt": req.prompt,
            "max_tokens": req.max_tokens,
            "temperature": req.temperature,
        })
        def invoke() -> str:
            with self._slots:
                raw = self.backend.raw_generate(req)
                self.calls += 1
            return raw

        return postprocess_generation(str(cached_call(self.cache, key, invoke)))

    def generate_many(self, reqs: Sequence[GenerationRequest]) -> list[str]:
        return self._map(self.generate, reqs)

    # -- scoring ------------------------------------------------------------

    @property
    def family(self) -> str:
        return getattr(self.backend, "family", "xcomet")

    def score(self, req: ScoreRequest, segment_id: str = "") -> ScoreRecord:
        key = self.cache.key_for({
            "op": "score",
            "backend": self.backend.config_digest(),
            "source": req.source,
            "hypothesis": req.hypothesis,
            "reference": req.reference,
            "metric": req.metric,
        })
        def invoke() -> float:
            with self._slots:
                value = float(self.backend.raw_score(req))
                self.calls += 1
            return value

        value = float(cached_call(self.cache, key, invoke))
        self._check_range(value)
        return ScoreRecord(
            segment_id=segment_id,
            metric=self.family,
            arity=req.metric,
            value=value,
            direction=FAMILY_DIRECTIONS[self.family],
        )

    def score_many(self, reqs: Sequence[tuple[ScoreRequest, str]]) -> list[ScoreRecord]:
        return self._map(lambda pair: self.score(pair[0], pair[1]), reqs)

    def _check_range(self, value: float) -> None:
        # Out-of-range service values are hard errors, never clamped.
        if self.family == "xcomet" and not (0.0 <= value <= 1.0):
            raise RangeViolation(value, "[0,1]")
        if self.family == "metricx" and value < 0.0:
            raise RangeViolation(value, ">= 0")

    def _map(self, fn: Callable, items: Iterable) -> list:
        items = list(items)
        if len(items) <= 1 or self.max_inflight <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.max_inflight) as pool:
            return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Construction from configuration

def make_backend(backend_id: str, spec, cache: ResponseCache | None = None,
                 max_inflight: int = 8, retry_base_delay: float = 0.5) -> BackendClient:
    """Build a client from a config entry.

    spec is either a shorthand string ("stub:rules", "stub:identity",
    "stub:xcomet", "stub:metricx", or a base URL) or a dict with keys
    kind/preset/family/base_url/seed.
    """
    if isinstance(spec, str):
        if spec.startswith("stub:"):
            spec = {"kind": "stub", "preset": spec.split(":", 1)[1]}
        else:
            spec = {"kind": "http", "base_url": spec}
    if not isinstance(spec, dict):
        raise ConfigError(f"backend {backend_id!r}: unsupported spec {spec!r}")

    kind = spec.get("kind", "stub")
    seed = int(spec.get("seed", 0))
    if kind == "stub":
        preset = spec.get("preset", "rules")
        if preset in ("xcomet", "metricx") or "family" in spec:
            family = spec.get("family", preset)
            backend = StubScoreBackend(backend_id, family=family, seed=seed)
        else:
            backend = StubGenerationBackend(backend_id, preset=preset, seed=seed)
    elif kind == "http":
        base_url = spec.get("base_url")
        if not base_url:
            raise ConfigError(f"backend {backend_id!r}: http backend needs base_url")
        backend = HttpBackend(backend_id, base_url, family=spec.get("family", "xcomet"),
                              timeout=float(spec.get("timeout", 60.0)),
                              retry_base_delay=retry_base_delay)
    else:
        raise ConfigError(f"backend {backend_id!r}: unknown kind {kind!r}")
    return BackendClient(backend, cache=cache, max_inflight=max_inflight)
