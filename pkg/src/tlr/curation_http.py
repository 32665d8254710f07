"""HTTP/JSON surface for the curation session (all paths under /api/v1).

Errors come back as {"error": <code>, "message": <text>} with a matching
HTTP status. Mutations are serialized by the session's internal lock, so
concurrent reads see consistent snapshots.
"""

from __future__ import annotations

from fastapi import FastAPI, Header, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .curation import CurationSession, render_overlay_png
from .errors import (
    FrameNotFound,
    InvalidGroup,
    PendingRemain,
    PointIndexOutOfRange,
    TlrError,
    UnknownCandidate,
)
from .mapping import TLCandidate, prior_map_to_wire

_ERROR_STATUS = {
    UnknownCandidate: (404, "unknown_candidate"),
    FrameNotFound: (404, "frame_not_found"),
    PointIndexOutOfRange: (400, "point_index_out_of_range"),
    InvalidGroup: (400, "invalid_group"),
    PendingRemain: (409, "pending_remain"),
}


class DecisionBody(BaseModel):
    decision: str = Field(pattern="^(accept|reject)$")
    group: str | None = None
    relevant_for: list[str] = Field(default_factory=list)


class ManualBody(BaseModel):
    t: float
    point_index: int


class SaveBody(BaseModel):
    force: bool = False


def _candidate_wire(session: CurationSession, c: TLCandidate) -> dict:
    wire = c.to_wire()
    t = session.nearest_frame_time(c)
    wire["overlay_ref"] = None if t is None else f"/api/v1/frames/{t:.6f}/overlay"
    return wire


def create_app(session: CurationSession, out_map_path) -> FastAPI:
    app = FastAPI(title="tlr curation", docs_url=None, redoc_url=None)
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(TlrError)
    async def _tlr_error(_request: Request, exc: TlrError):
        status, code = 500, "internal"
        for etype, (st, cd) in _ERROR_STATUS.items():
            if isinstance(exc, etype):
                status, code = st, cd
                break
        return JSONResponse(status_code=status, content={"error": code, "message": str(exc)})

    @app.get("/api/v1/candidates")
    def list_candidates():
        return {"candidates": [_candidate_wire(session, c) for c in session.list_candidates()]}

    @app.get("/api/v1/candidates/{candidate_id}")
    def get_candidate(candidate_id: str):
        return _candidate_wire(session, session.get(candidate_id))

    @app.post("/api/v1/candidates/{candidate_id}/decision")
    def decide(candidate_id: str, body: DecisionBody,
               x_curation_actor: str = Header(default="anonymous")):
        c = session.decide(candidate_id, body.decision, body.group, body.relevant_for,
                           actor=x_curation_actor)
        return _candidate_wire(session, c)

    @app.post("/api/v1/candidates/manual")
    def manual(body: ManualBody, x_curation_actor: str = Header(default="anonymous")):
        c = session.manual_candidate(body.t, body.point_index, actor=x_curation_actor)
        return _candidate_wire(session, c)

    @app.get("/api/v1/frames/{t}/overlay")
    def overlay(t: float):
        return Response(content=render_overlay_png(session, t), media_type="image/png")

    @app.post("/api/v1/save")
    def save(body: SaveBody, x_curation_actor: str = Header(default="anonymous")):
        prior = session.save(out_map_path, force=body.force, actor=x_curation_actor)
        return {"path": str(out_map_path), "map": prior_map_to_wire(prior)}

    @app.get("/api/v1/map")
    def draft_map():
        return prior_map_to_wire(session.draft_map())

    return app


def serve(session: CurationSession, out_map_path, host: str, port: int) -> None:
    import uvicorn

    app = create_app(session, out_map_path)
    uvicorn.run(app, host=host, port=port, log_level="warning")
