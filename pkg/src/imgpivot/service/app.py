"""HTTP front end for the campaign store.

Thin by design: routes parse the request, call one store method, and map
store exceptions onto status codes.  All invariants live in the store.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .config import ServiceConfig
from .store import (
    CampaignClosed,
    CampaignStore,
    EmptySubmission,
    InvalidSpec,
    InvalidSubmission,
    LeaseExpired,
    NoTasksAvailable,
    QuotaExceeded,
    UnknownCampaign,
    UnknownLease,
    UnknownTask,
    WorkerIneligible,
)

_STATUS = {
    InvalidSpec: 400,
    EmptySubmission: 400,
    InvalidSubmission: 400,
    WorkerIneligible: 403,
    UnknownCampaign: 404,
    UnknownTask: 404,
    UnknownLease: 404,
    CampaignClosed: 409,
    QuotaExceeded: 409,
    LeaseExpired: 410,
}


class LeaseRequest(BaseModel):
    worker_id: str
    attributes: dict = {}


class CaptionSubmission(BaseModel):
    lease_id: str
    text: str


class RatingSubmission(BaseModel):
    lease_id: str
    rating: int


def create_app(
    config: ServiceConfig | None = None, store: CampaignStore | None = None
) -> FastAPI:
    config = config or ServiceConfig()
    if store is None:
        Path(config.data_dir).mkdir(parents=True, exist_ok=True)
        store = CampaignStore(
            config.data_dir,
            lease_ttl=config.lease_ttl,
            lease_slack=config.lease_slack,
        )
    app = FastAPI(title="imgpivot campaign service")
    app.state.store = store
    app.state.config = config

    def _error_handler(request: Request, exc: Exception) -> JSONResponse:
        status = _STATUS[type(exc)]
        body: dict = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, InvalidSpec):
            body["diagnostics"] = [
                {"field": field, "message": message}
                for field, message in exc.diagnostics
            ]
        return JSONResponse(body, status_code=status)

    for exc_type in _STATUS:
        app.add_exception_handler(exc_type, _error_handler)

    @app.post("/campaigns", status_code=201)
    def create_campaign(spec: dict) -> dict:
        state = store.create_campaign(spec)
        return {"id": state["id"], "kind": state["kind"], "tasks": len(state["tasks"])}

    @app.post("/campaigns/{campaign_id}/close")
    def close_campaign(campaign_id: str) -> dict:
        store.close_campaign(campaign_id)
        return {"id": campaign_id, "state": "closed"}

    @app.post("/campaigns/{campaign_id}/lease")
    def lease(campaign_id: str, request: LeaseRequest) -> Response:
        try:
            payload = store.lease_task(
                campaign_id, request.worker_id, request.attributes
            )
        except NoTasksAvailable:
            return Response(status_code=204)
        return JSONResponse(payload)

    @app.post("/tasks/{task_id:path}/caption", status_code=201)
    def submit_caption(task_id: str, submission: CaptionSubmission) -> dict:
        return store.submit_caption(task_id, submission.lease_id, submission.text)

    @app.post("/tasks/{task_id:path}/rating", status_code=201)
    def submit_rating(task_id: str, submission: RatingSubmission) -> dict:
        return store.submit_rating(task_id, submission.lease_id, submission.rating)

    @app.get("/campaigns/{campaign_id}/export")
    def export(campaign_id: str, format: str) -> PlainTextResponse:
        try:
            content, collected, expected = store.export_campaign(campaign_id, format)
        except ValueError as exc:
            if isinstance(exc, tuple(_STATUS)):
                raise
            return JSONResponse(
                {"error": "BadFormat", "detail": str(exc)}, status_code=400
            )
        return PlainTextResponse(
            content,
            media_type="text/plain; charset=utf-8",
            headers={"X-Complete": f"{collected}/{expected}"},
        )

    @app.get("/campaigns/{campaign_id}/stats")
    def stats(campaign_id: str) -> dict:
        return store.stats(campaign_id)

    ui_dir = config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        # Mounted last so API routes take precedence.
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:

        @app.get("/")
        def index() -> dict:
            return {"service": "imgpivot campaign service", "ui": "not configured"}

    return app
