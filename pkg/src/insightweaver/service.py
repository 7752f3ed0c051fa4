"""HTTP binding of the analysis engine, versioned under /v1.

Errors use one envelope: {"code", "message", "detail"}. Mutations are
serialized per session and snapshotted after each change, so a restarted
process rehydrates sessions lazily from the persistence directory. The
story export endpoint returns the canonical document bytes unmodified;
clients may diff them.
"""
from __future__ import annotations

import json
import logging
from collections import Counter

from fastapi import FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .config import ServiceConfig
from .engine import (
    AnalysisSession,
    SessionStore,
    node_doc,
    canonical_json,
    query_turn,
    subspace_insights,
)
from .insights import insight_doc
from .retrieval import ProviderError
from .story import (
    StoryError,
    delete_node,
    export_story,
    history_path,
    import_story,
    move_node,
    seed_first_layer,
    set_state,
    user_add_node,
)
from .tables import IngestError, LocatorError

logger = logging.getLogger(__name__)

__all__ = ["ApiError", "create_app"]


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail

    def response(self) -> JSONResponse:
        return JSONResponse(
            status_code=self.status,
            content={"code": self.code, "message": self.message, "detail": self.detail},
        )


class CreateSessionBody(BaseModel):
    csv: str
    hints: dict | None = None


class QueryBody(BaseModel):
    focused_node: str
    text: str
    step: int | None = None


class AddNodeBody(BaseModel):
    parent: str
    insight_id: str


class MoveNodeBody(BaseModel):
    new_parent: str


class StateBody(BaseModel):
    op: str


def _session_summary(session: AnalysisSession, created: bool | None = None) -> dict:
    counts = Counter(i.itype for i in session.catalog.insights)
    doc = {
        "session_id": session.session_id,
        "catalog_hash": session.catalog.catalog_hash,
        "row_count": len(session.table.rows),
        "dropped_rows": session.table.dropped_rows,
        "insight_count": len(session.catalog.insights),
        "counts_by_type": {k: counts[k] for k in sorted(counts)},
        "columns": [
            {
                "name": spec.name,
                "kind": spec.kind,
                "ordinal": spec.is_ordinal,
                "values": sorted(set(session.table.column_values(spec.name)))
                if spec.kind == "categorical"
                else None,
            }
            for spec in session.table.schema.columns
        ],
        "seeded_nodes": [
            node_doc(session, nid)
            for nid, node in sorted(session.story.nodes.items())
            if node.depth == 0 and node.added_by == "system"
        ],
    }
    if created is not None:
        doc["created"] = created
    return doc


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="insightweaver", version=__version__)
    store = SessionStore(config)
    app.state.store = store
    app.state.config = config

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return exc.response()

    @app.exception_handler(RequestValidationError)
    async def _validation(request: Request, exc: RequestValidationError):
        return ApiError(400, "validation_error", "invalid request body", exc.errors()).response()

    @app.exception_handler(Exception)
    async def _internal(request: Request, exc: Exception):
        logger.exception("unhandled error")
        return ApiError(500, "internal", str(exc)).response()

    def require(session_id: str) -> AnalysisSession:
        session = store.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        return session

    def node_or_404(session: AnalysisSession, node_id: str):
        node = session.story.nodes.get(node_id)
        if node is None:
            raise ApiError(404, "unknown_node", f"no node {node_id!r}")
        return node

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "version": __version__, "offline": config.offline}

    @app.post("/v1/sessions")
    def create_session(body: CreateSessionBody):
        hints_text = canonical_json(body.hints) if body.hints is not None else None
        try:
            session, created = store.create(body.csv, hints_text)
        except IngestError as exc:
            raise ApiError(400, "ingest_error", str(exc))
        except ProviderError as exc:
            raise ApiError(502, "provider_error", str(exc))
        return JSONResponse(
            status_code=201 if created else 200,
            content=_session_summary(session, created=created),
        )

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        session = require(session_id)
        with store.lock(session_id):
            return _session_summary(session)

    @app.get("/v1/sessions/{session_id}/status")
    def get_status(session_id: str):
        session = require(session_id)
        with store.lock(session_id):
            return {
                "session_id": session_id,
                "state": "ready",
                "insight_count": len(session.catalog.insights),
                "node_count": len(session.story.nodes),
            }

    @app.get("/v1/sessions/{session_id}/subspaces")
    def get_subspaces(session_id: str, filter: list[str] = Query(default=[])):
        session = require(session_id)
        with store.lock(session_id):
            try:
                return subspace_insights(session, filter)
            except (LocatorError, ValueError) as exc:
                raise ApiError(400, "bad_filter", str(exc))

    @app.get("/v1/sessions/{session_id}/insights/{insight_id}")
    def get_insight(session_id: str, insight_id: str):
        session = require(session_id)
        with store.lock(session_id):
            ins = session.catalog.by_id.get(insight_id)
            if ins is None:
                raise ApiError(404, "unknown_insight", f"no insight {insight_id!r}")
            return dict(insight_doc(ins), description=session.descriptions[insight_id].text)

    @app.post("/v1/sessions/{session_id}/seed")
    def seed(session_id: str):
        session = require(session_id)
        with store.lock(session_id):
            if not session.story.nodes:
                seed_first_layer(session.story, session.catalog)
                store.save(session)
            roots = [
                node_doc(session, nid)
                for nid, node in sorted(session.story.nodes.items())
                if node.depth == 0 and node.added_by == "system"
            ]
            return {"seeded_nodes": roots}

    @app.post("/v1/sessions/{session_id}/query")
    def query(session_id: str, body: QueryBody):
        session = require(session_id)
        with store.lock(session_id):
            node_or_404(session, body.focused_node)
            try:
                doc = query_turn(session, body.focused_node, body.text, step=body.step)
            except ProviderError as exc:
                raise ApiError(502, "provider_error", str(exc))
            store.save(session)
            return Response(content=canonical_json(doc), media_type="application/json")

    @app.get("/v1/sessions/{session_id}/story")
    def get_story(session_id: str):
        session = require(session_id)
        with store.lock(session_id):
            return json.loads(export_story(session.story))

    @app.get("/v1/sessions/{session_id}/story/export")
    def get_story_export(session_id: str):
        session = require(session_id)
        with store.lock(session_id):
            return Response(content=export_story(session.story), media_type="application/json")

    @app.put("/v1/sessions/{session_id}/story")
    def put_story(session_id: str, body: dict):
        session = require(session_id)
        with store.lock(session_id):
            try:
                story = import_story(canonical_json(body))
            except StoryError as exc:
                raise ApiError(400, "story_error", str(exc))
            if story.catalog_hash != session.catalog.catalog_hash:
                raise ApiError(409, "catalog_mismatch", "story belongs to a different catalog")
            unknown = [
                n.insight_id for n in story.nodes.values() if n.insight_id not in session.catalog.by_id
            ]
            if unknown:
                raise ApiError(409, "unknown_insight", "story references unknown insights", unknown)
            session.story = story
            store.save(session)
            return {"nodes": len(story.nodes), "edges": len(story.edges)}

    @app.post("/v1/sessions/{session_id}/story/nodes", status_code=201)
    def add_node(session_id: str, body: AddNodeBody):
        session = require(session_id)
        with store.lock(session_id):
            node_or_404(session, body.parent)
            if body.insight_id not in session.catalog.by_id:
                raise ApiError(404, "unknown_insight", f"no insight {body.insight_id!r}")
            try:
                nid = user_add_node(session.story, body.parent, body.insight_id, session.catalog)
            except StoryError as exc:
                raise ApiError(409, "duplicate_insight", str(exc))
            store.save(session)
            return {"node": node_doc(session, nid)}

    @app.post("/v1/sessions/{session_id}/story/nodes/{node_id}/move")
    def move(session_id: str, node_id: str, body: MoveNodeBody):
        session = require(session_id)
        with store.lock(session_id):
            node_or_404(session, node_id)
            node_or_404(session, body.new_parent)
            try:
                move_node(session.story, node_id, body.new_parent)
            except StoryError as exc:
                raise ApiError(409, "cycle", str(exc))
            store.save(session)
            return {"node": node_doc(session, node_id)}

    @app.delete("/v1/sessions/{session_id}/story/nodes/{node_id}")
    def remove(session_id: str, node_id: str):
        session = require(session_id)
        with store.lock(session_id):
            node_or_404(session, node_id)
            before = set(session.story.nodes)
            delete_node(session.story, node_id)
            store.save(session)
            return {"removed": sorted(before - set(session.story.nodes))}

    @app.post("/v1/sessions/{session_id}/story/nodes/{node_id}/state")
    def state(session_id: str, node_id: str, body: StateBody):
        session = require(session_id)
        with store.lock(session_id):
            node_or_404(session, node_id)
            try:
                set_state(session.story, node_id, body.op)
            except StoryError as exc:
                raise ApiError(400, "bad_state_op", str(exc))
            store.save(session)
            return {"node": node_doc(session, node_id)}

    @app.get("/v1/sessions/{session_id}/story/nodes/{node_id}/history")
    def history(session_id: str, node_id: str):
        session = require(session_id)
        with store.lock(session_id):
            node_or_404(session, node_id)
            path = history_path(session.story, node_id)
            return {
                "path": [
                    {"node": node_doc(session, node.node_id), "query": query}
                    for node, query in path
                ]
            }

    return app
