import json
import threading
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from scorer_sidecar.app import create_app
from scorer_sidecar.batching import MicroBatcher
from scorer_sidecar.config import SidecarConfig
from scorer_sidecar.models import OverlapModel, ScoreItem, build_model, clip_to_range

GOLDEN = Path(__file__).resolve().parents[2] / "golden"


@pytest.fixture(scope="module")
def client():
    app = create_app(SidecarConfig(batch_window_ms=1.0))
    with TestClient(app) as tc:
        yield tc


# -- protocol conformance -----------------------------------------------------

def test_healthz(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_all_golden_requests_accepted(client):
    lines = (GOLDEN / "score_requests.jsonl").read_text(encoding="utf-8").splitlines()
    assert lines, "golden request fixtures missing"
    for line in lines:
        response = client.post("/v1/score", json=json.loads(line))
        assert response.status_code == 200, (line, response.text)
        body = response.json()
        # same shape the golden response fixtures pin: exactly {"value": num}
        assert set(body) == {"value"}
        assert isinstance(body["value"], (int, float))
        assert 0.0 <= body["value"] <= 1.0


def test_responses_match_golden_response_schema(client):
    golden_lines = (GOLDEN / "score_responses.jsonl").read_text(encoding="utf-8").splitlines()
    golden_keys = {frozenset(json.loads(line)) for line in golden_lines}
    assert golden_keys == {frozenset({"value"})}
    response = client.post("/v1/score", json={
        "source": "a b c", "hypothesis": "a b c", "reference": None, "metric": "qe"})
    assert frozenset(response.json()) in golden_keys


def test_malformed_body_is_400(client):
    for payload in (
        {"hypothesis": "x", "metric": "qe"},                      # missing source
        {"source": "s", "hypothesis": "h", "metric": "bleu"},     # unknown metric
        {"source": "s", "hypothesis": "h", "metric": "qe_ref"},   # ref required
        {"source": "s", "hypothesis": "h", "reference": "r", "metric": "qe"},
        {"source": "s", "hypothesis": "", "metric": "qe"},        # empty hypothesis
    ):
        response = client.post("/v1/score", json=payload)
        assert response.status_code == 400, payload


def test_not_json_is_400(client):
    response = client.post("/v1/score", content=b"not json at all",
                           headers={"Content-Type": "application/json"})
    assert response.status_code == 400


def test_self_translation_sanity_offline(client):
    text = "The committee met yesterday to discuss the plan."
    response = client.post("/v1/score", json={
        "source": text, "hypothesis": text, "reference": text, "metric": "qe_ref"})
    assert response.status_code == 200
    assert response.json()["value"] >= 0.95


def test_determinism_within_1e6(client):
    payload = {"source": "a quick brown fox", "hypothesis": "a brown fox runs quick",
               "reference": None, "metric": "qe"}
    values = {client.post("/v1/score", json=payload).json()["value"] for _ in range(5)}
    assert max(values) - min(values) < 1e-6


def test_metric_without_model_is_503():
    app = create_app(SidecarConfig(models={"qe": "overlap"}))
    with TestClient(app) as tc:
        ok = tc.post("/v1/score", json={"source": "s", "hypothesis": "s",
                                        "metric": "qe"})
        assert ok.status_code == 200
        missing = tc.post("/v1/score", json={"source": "s", "hypothesis": "s",
                                             "reference": "r", "metric": "qe_ref"})
        assert missing.status_code == 503


def test_unloadable_model_identifier_is_503():
    app = create_app(SidecarConfig(models={"qe": "nonsense:what"}))
    with TestClient(app) as tc:
        response = tc.post("/v1/score", json={"source": "s", "hypothesis": "s",
                                              "metric": "qe"})
        assert response.status_code == 503


# -- real-model sanity (runs only when a checkpoint is configured) ---------------

@pytest.mark.skipif("SIDECAR_XCOMET_MODEL" not in __import__("os").environ,
                    reason="set SIDECAR_XCOMET_MODEL to an xCOMET-class checkpoint "
                           "to run the real-model sanity check")
def test_self_translation_sanity_real_model():
    import os
    identifier = f"xcomet:{os.environ['SIDECAR_XCOMET_MODEL']}"
    app = create_app(SidecarConfig(models={"qe_ref": identifier}))
    with TestClient(app) as tc:
        text = "The committee met yesterday to discuss the plan."
        response = tc.post("/v1/score", json={
            "source": text, "hypothesis": text, "reference": text, "metric": "qe_ref"})
        assert response.status_code == 200
        assert response.json()["value"] >= 0.95


# -- batching and models ---------------------------------------------------------

def test_microbatcher_matches_responses_to_requests():
    class RecordingModel(OverlapModel):
        def __init__(self):
            self.batch_sizes = []

        def score_batch(self, items):
            self.batch_sizes.append(len(items))
            return [float(len(item.hypothesis)) for item in items]

    model = RecordingModel()
    batcher = MicroBatcher(model, max_batch_size=4, window_ms=30.0)
    items = [ScoreItem("s", "h" * (i + 1), None, "qe") for i in range(12)]
    results = [None] * len(items)

    def worker(i):
        results[i] = batcher.submit(items[i])

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(len(items))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    batcher.close()

    assert results == [float(i + 1) for i in range(12)]
    assert all(size <= 4 for size in model.batch_sizes)
    assert any(size > 1 for size in model.batch_sizes)


def test_batcher_propagates_model_errors():
    class FailingModel(OverlapModel):
        def score_batch(self, items):
            raise RuntimeError("device on fire")

    batcher = MicroBatcher(FailingModel(), max_batch_size=2, window_ms=1.0)
    with pytest.raises(RuntimeError):
        batcher.submit(ScoreItem("s", "h", None, "qe"))
    batcher.close()


def test_overlap_model_metric_arities():
    model = OverlapModel()
    same = ScoreItem("a b", "a b", "a b", "qe_ref")
    disjoint = ScoreItem("a b", "c d", None, "qe")
    values = model.score_batch([same, disjoint])
    assert values[0] == pytest.approx(1.0)
    assert values[1] == 0.0


def test_shared_identifier_loads_one_instance():
    a = build_model("overlap")
    b = build_model("overlap")
    assert a is b


def test_clip_to_range():
    assert clip_to_range(1.7, "xcomet") == 1.0
    assert clip_to_range(-0.2, "xcomet") == 0.0
    assert clip_to_range(-3.0, "metricx") == 0.0
    assert clip_to_range(7.5, "metricx") == 7.5
