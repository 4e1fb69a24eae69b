"""FastAPI service implementing POST /v1/score and GET /healthz.

Schema violations return 400 (including body-validation failures, which
FastAPI would otherwise report as 422); a metric whose model is not loaded
returns 503. Values are clipped to the serving model's family range before
they leave the service.
"""

from __future__ import annotations

import logging
from typing import Literal

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .batching import MicroBatcher
from .config import SidecarConfig
from .models import ModelNotLoaded, ScoreItem, build_model, clip_to_range

log = logging.getLogger(__name__)


class ScoreRequestBody(BaseModel):
    source: str
    hypothesis: str
    reference: str | None = None
    metric: Literal["qe", "qe_ref", "ref_only"]


class ScoreResponseBody(BaseModel):
    value: float


def create_app(config: SidecarConfig | None = None) -> FastAPI:
    config = config or SidecarConfig()
    app = FastAPI(title="scorer-sidecar")
    app.state.config = config
    app.state.batchers = {}
    app.state.load_errors = {}

    for metric, identifier in config.models.items():
        try:
            model = build_model(identifier, config.device)
        except ModelNotLoaded as exc:
            log.warning("metric %s: %s", metric, exc)
            app.state.load_errors[metric] = str(exc)
            continue
        app.state.batchers[metric] = MicroBatcher(
            model, max_batch_size=config.max_batch_size,
            window_ms=config.batch_window_ms)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "metrics": sorted(app.state.batchers)}

    @app.post("/v1/score", response_model=ScoreResponseBody)
    def score(body: ScoreRequestBody):
        needs_ref = body.metric in ("qe_ref", "ref_only")
        if needs_ref and not body.reference:
            raise HTTPException(status_code=400,
                                detail=f"metric {body.metric!r} requires a reference")
        if not needs_ref and body.reference is not None:
            raise HTTPException(status_code=400,
                                detail=f"metric {body.metric!r} must not carry a reference")
        if not body.hypothesis:
            raise HTTPException(status_code=400, detail="hypothesis must be nonempty")
        if body.metric in ("qe", "qe_ref") and not body.source:
            raise HTTPException(status_code=400,
                                detail=f"metric {body.metric!r} requires a source")

        batcher = app.state.batchers.get(body.metric)
        if batcher is None:
            reason = app.state.load_errors.get(body.metric, "no model configured")
            raise HTTPException(status_code=503,
                                detail=f"metric {body.metric!r} unavailable: {reason}")
        item = ScoreItem(source=body.source, hypothesis=body.hypothesis,
                         reference=body.reference, metric=body.metric)
        try:
            value = batcher.submit(item)
        except ModelNotLoaded as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc
        return {"value": clip_to_range(value, batcher.model.family)}

    return app
