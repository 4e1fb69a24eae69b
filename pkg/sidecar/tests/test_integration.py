"""Full-loop check over a real socket: the batch harness's HTTP client
scoring against a live sidecar. Skips when the harness package is not
installed; the sidecar itself never depends on it.
"""

import threading
import time

import pytest
import uvicorn

rewritemt_backends = pytest.importorskip("rewritemt.backends")

from scorer_sidecar.app import create_app
from scorer_sidecar.config import SidecarConfig


@pytest.fixture(scope="module")
def live_sidecar():
    app = create_app(SidecarConfig(batch_window_ms=1.0))
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("sidecar failed to start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_harness_client_scores_through_live_sidecar(live_sidecar):
    client = rewritemt_backends.make_backend("sidecar", live_sidecar)
    record = client.score(rewritemt_backends.ScoreRequest(
        source="The committee met.", hypothesis="The committee met.",
        reference="The committee met.", metric="qe_ref", backend_id="sidecar"),
        segment_id="s1")
    assert record.value >= 0.95
    assert record.direction == "higher_better"


def test_harness_client_all_arities_through_live_sidecar(live_sidecar):
    client = rewritemt_backends.make_backend("sidecar", live_sidecar)
    requests = [
        rewritemt_backends.ScoreRequest(source="a b c", hypothesis="a b d",
                                        reference=None, metric="qe",
                                        backend_id="sidecar"),
        rewritemt_backends.ScoreRequest(source="", hypothesis="a b c",
                                        reference="a c b", metric="ref_only",
                                        backend_id="sidecar"),
        rewritemt_backends.ScoreRequest(source="a b", hypothesis="a b",
                                        reference="a b x", metric="qe_ref",
                                        backend_id="sidecar"),
    ]
    for req in requests:
        record = client.score(req)
        assert 0.0 <= record.value <= 1.0


def test_malformed_request_rejected_as_client_error(live_sidecar):
    import requests

    response = requests.post(f"{live_sidecar}/v1/score",
                             json={"metric": "qe"}, timeout=10)
    assert response.status_code == 400
