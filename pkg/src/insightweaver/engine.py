"""Session core shared by the HTTP service and the CLI.

A session binds one table to everything derived from it: the insight
catalog, the subspace graph, the vector index over description texts, and
the story. Query turns run the full acting loop (structural filter,
dual-path retrieval, constrained merge, voted reasoning, story append).
Sessions are content-addressed so identical uploads converge, and snapshots
rebuild the derived state from the raw CSV rather than pickling it.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .config import ServiceConfig, config_doc, config_from_doc
from .graph import SubspaceGraph, build_graph, structural_filter
from .insights import InsightCatalog, extract_all
from .narrator import InsightDescription, describe_catalog
from .reasoner import (
    HistoryTurn,
    LMProvider,
    Recommendation,
    ReasoningError,
    RemoteLM,
    StubLM,
    compose_prompt,
    recommend,
)
from .retrieval import (
    EmbeddingProvider,
    RemoteEmbedder,
    StubEmbedder,
    VectorIndex,
    apply_constraints,
    dual_path_merge,
    search,
)
from .story import (
    Story,
    add_recommendations,
    export_story,
    import_story,
    new_story,
    seed_first_layer,
)
from .tables import Locator, Table, apply_locator, enumerate_subspaces, load_schema_hints, load_table

logger = logging.getLogger(__name__)

__all__ = [
    "SESSION_SCHEMA",
    "AnalysisSession",
    "SessionStore",
    "build_session",
    "restore_session",
    "session_id_for",
    "query_turn",
    "subspace_insights",
    "node_doc",
    "canonical_json",
]

SESSION_SCHEMA = "iw-session/1"

FALLBACK_RELATION = "structurally related"


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _hints_canonical(hints_text: str | None) -> str:
    if hints_text is None:
        return ""
    return canonical_json(json.loads(hints_text))


def session_id_for(csv_text: str, hints_text: str | None, config: ServiceConfig) -> str:
    """Identity covers the data and the extraction knobs, nothing operational."""
    extraction = canonical_json(config_doc(config)["extraction"])
    raw = "\x1f".join(["iw-session", extraction, csv_text, _hints_canonical(hints_text)])
    return hashlib.sha256(raw.encode("utf-8")).hexdigest()[:16]


@dataclass
class AnalysisSession:
    session_id: str
    csv_text: str
    hints_text: str | None
    config: ServiceConfig
    table: Table
    catalog: InsightCatalog
    graph: SubspaceGraph
    index: VectorIndex
    descriptions: dict[str, InsightDescription]
    story: Story
    embedder: EmbeddingProvider | None = field(repr=False, default=None)

    def snapshot(self) -> str:
        doc = {
            "schema": SESSION_SCHEMA,
            "session_id": self.session_id,
            "csv": self.csv_text,
            "hints": json.loads(self.hints_text) if self.hints_text else None,
            "config": config_doc(self.config),
            "story": json.loads(export_story(self.story)),
        }
        return canonical_json(doc)


def _make_embedder(config: ServiceConfig) -> EmbeddingProvider:
    if config.offline:
        return StubEmbedder()
    return RemoteEmbedder(
        endpoint=config.embed_endpoint,
        dimension=config.embed_dimension,
        api_key=config.embed_api_key,
    )


def _make_lm(config: ServiceConfig) -> LMProvider:
    if config.offline:
        return StubLM()
    return RemoteLM(
        endpoint=config.lm_endpoint,
        model=config.lm_model,
        api_key=config.lm_api_key,
        diversity=config.lm_diversity,
    )


def build_session(
    csv_text: str, hints_text: str | None, config: ServiceConfig, seed: bool = True
) -> AnalysisSession:
    hints = load_schema_hints(hints_text) if hints_text else None
    table = load_table(csv_text, hints)
    catalog = extract_all(table, config.extraction)
    subspaces = enumerate_subspaces(table, config.extraction.max_locator_length)
    graph = build_graph(subspaces)
    descriptions = describe_catalog(catalog, table.schema)

    embedder = _make_embedder(config)
    index = VectorIndex(dimension=embedder.dimension)
    ids = sorted(descriptions)
    if ids:
        vectors = embedder.embed([descriptions[i].text for i in ids])
        index.add(
            ids,
            vectors,
            [
                {
                    "itype": catalog.by_id[i].itype,
                    "category": catalog.by_id[i].category,
                    "score": catalog.by_id[i].score,
                    "locator": catalog.by_id[i].ae.subspace.locator.text(),
                }
                for i in ids
            ],
        )

    sid = session_id_for(csv_text, hints_text, config)
    story = new_story(sid, catalog.catalog_hash)
    if seed:
        seed_first_layer(story, catalog)
    return AnalysisSession(
        session_id=sid,
        csv_text=csv_text,
        hints_text=hints_text,
        config=config,
        table=table,
        catalog=catalog,
        graph=graph,
        index=index,
        descriptions=descriptions,
        story=story,
        embedder=embedder,
    )


def restore_session(snapshot_text: str, env: dict | None = None) -> AnalysisSession:
    doc = json.loads(snapshot_text)
    if doc.get("schema") != SESSION_SCHEMA:
        raise ValueError(f"unsupported session schema {doc.get('schema')!r}")
    config = config_from_doc(doc["config"], env)
    hints_text = canonical_json(doc["hints"]) if doc["hints"] is not None else None
    session = build_session(doc["csv"], hints_text, config, seed=False)
    story = import_story(canonical_json(doc["story"]))
    if story.catalog_hash != session.catalog.catalog_hash:
        raise ValueError("snapshot story does not match the rebuilt catalog")
    session.story = story
    return session


def _history(session: AnalysisSession) -> list[HistoryTurn]:
    turns = []
    for entry in session.story.query_log:
        if entry.orphaned or not entry.recommended:
            continue
        node = session.story.nodes.get(entry.recommended[0])
        if node is None:
            continue
        turns.append(HistoryTurn(query=entry.query, chosen_text=session.descriptions[node.insight_id].text))
    return turns


def node_doc(session: AnalysisSession, node_id: str) -> dict:
    node = session.story.nodes[node_id]
    edge = next((e for e in session.story.edges if e.child == node_id), None)
    return {
        "node_id": node.node_id,
        "insight_id": node.insight_id,
        "depth": node.depth,
        "state": node.state,
        "pinned": node.pinned,
        "focused": node.focused,
        "added_by": node.added_by,
        "parent": edge.parent if edge else None,
        "edge_kind": edge.kind if edge else None,
        "relation_text": edge.relation_text if edge else None,
        "description": session.descriptions[node.insight_id].text,
        "itype": session.catalog.by_id[node.insight_id].itype,
        "category": session.catalog.by_id[node.insight_id].category,
        "score": session.descriptions[node.insight_id].score,
    }


def query_turn(
    session: AnalysisSession,
    focused_node: str,
    text: str,
    step: int | None = None,
    provider: LMProvider | None = None,
) -> dict:
    """One acting turn; mutates the story and returns the response document."""
    story = session.story
    node = story.nodes.get(focused_node)
    if node is None:
        raise KeyError(f"no node {focused_node!r} in story")
    cfg = session.config
    focused_ins = session.catalog.by_id[node.insight_id]
    hops = cfg.step if step is None else step

    reachable = structural_filter(session.catalog, session.graph, focused_ins, step=hops).insights
    # insights already placed in the story would only be skipped downstream;
    # drop them here so they don't occupy candidate slots
    present = {n.insight_id for n in story.nodes.values()}
    candidates = tuple(c for c in reachable if c.id not in present)
    path = "retrieval"
    if candidates:
        sub = session.index.subset({c.id for c in candidates})
        user_vec = session.embedder.embed([text])[0]
        c_user = search(sub, user_vec, cfg.merge.k)
        c_context = search(sub, session.index.vector_of(focused_ins.id), cfg.merge.k)
        merged = dual_path_merge(c_user, c_context, cfg.merge)
        final_ids = apply_constraints(merged, sub, cfg.merge)
        if not final_ids:
            # every candidate fell to the constraints; reason over the
            # structural ranking instead
            path = "structural"
            final_ids = [c.id for c in candidates[: cfg.merge.K]]
    else:
        path = "structural"
        final_ids = []

    if final_ids:
        bundle = compose_prompt(
            _history(session),
            text,
            session.descriptions[focused_ins.id],
            [session.descriptions[i] for i in final_ids],
            window=cfg.history_window,
        )
        lm = provider if provider is not None else _make_lm(cfg)
        try:
            rec = recommend(lm, bundle, m=cfg.samples)
        except ReasoningError:
            logger.warning("reasoning failed; falling back to ranked candidates")
            rec = Recommendation(
                chosen=tuple((iid, FALLBACK_RELATION, 1) for iid in final_ids),
                samples_used=0,
                fallback=True,
            )
    else:
        rec = Recommendation(chosen=(), samples_used=0, fallback=True)

    new_ids = add_recommendations(story, focused_node, rec, session.catalog, query=text)
    return {
        "recommendation": rec.doc(),
        "new_nodes": [node_doc(session, nid) for nid in new_ids],
        "path": path,
        "candidates_considered": len(candidates),
        "focused_node": focused_node,
    }


def subspace_insights(session: AnalysisSession, filters: list[str]) -> dict:
    """Insights of the subspace matching dim=value filters; [] when unmatched."""
    from .insights import insight_doc

    pairs = []
    for raw in filters:
        if "=" not in raw:
            raise ValueError(f"filter {raw!r} is not dim=value")
        dim, value = raw.split("=", 1)
        pairs.append((dim, value))
    loc = Locator(tuple(pairs))
    sub = apply_locator(session.table, loc)
    insights = [] if sub is None else session.catalog.by_locator.get(loc.text(), [])
    return {
        "locator": loc.text(),
        "insights": [
            dict(insight_doc(i), description=session.descriptions[i.id].text) for i in insights
        ],
    }


class SessionStore:
    """In-memory sessions with optional JSON snapshots on disk.

    One lock per session serializes mutations; reads of distinct sessions
    never contend.
    """

    def __init__(self, base_config: ServiceConfig):
        self.base_config = base_config
        self._sessions: dict[str, AnalysisSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry:
            return self._locks.setdefault(session_id, threading.Lock())

    def _snapshot_path(self, session_id: str) -> Path | None:
        if not self.base_config.persist_dir:
            return None
        return Path(self.base_config.persist_dir) / f"{session_id}.json"

    def save(self, session: AnalysisSession) -> None:
        path = self._snapshot_path(session.session_id)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(session.snapshot(), encoding="utf-8")
        os.replace(tmp, path)

    def create(self, csv_text: str, hints_text: str | None) -> tuple[AnalysisSession, bool]:
        sid = session_id_for(csv_text, hints_text, self.base_config)
        existing = self.get(sid)
        if existing is not None:
            return existing, False
        session = build_session(csv_text, hints_text, self.base_config)
        self._sessions[sid] = session
        self.save(session)
        return session, True

    def get(self, session_id: str) -> AnalysisSession | None:
        session = self._sessions.get(session_id)
        if session is not None:
            return session
        path = self._snapshot_path(session_id)
        if path is None or not path.exists():
            return None
        session = restore_session(path.read_text("utf-8"))
        self._sessions[session_id] = session
        return session
