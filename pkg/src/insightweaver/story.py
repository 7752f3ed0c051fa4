"""The radial insight tree: nodes, typed edges, interaction state, history.

A story is a forest. Every node holds one catalog insight; edges carry the
structural relation between the two subspaces when one exists, and the
reasoner's one-sentence relation when the edge came from a query turn.
Query-log entries are never deleted; entries referencing removed nodes are
marked orphaned so provenance survives pruning.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .graph import relation_of
from .insights import Insight, InsightCatalog
from .reasoner import Recommendation

logger = logging.getLogger(__name__)

__all__ = [
    "STORY_SCHEMA",
    "SEED_COUNT",
    "SEED_DIVERSITY",
    "StoryError",
    "StoryNode",
    "StoryEdge",
    "QueryLogEntry",
    "Story",
    "new_story",
    "seed_first_layer",
    "add_recommendations",
    "user_add_node",
    "move_node",
    "delete_node",
    "set_state",
    "history_path",
    "export_story",
    "import_story",
]

STORY_SCHEMA = "iw-story/1"
SEED_COUNT = 8
SEED_DIVERSITY = 3

EDGE_KINDS = ("structural_parent_child", "structural_sibling", "user_added")
NODE_STATES = ("collapsed", "expanded")


class StoryError(ValueError):
    """Invalid story mutation or malformed story document."""


@dataclass
class StoryNode:
    node_id: str
    insight_id: str
    depth: int
    state: str = "collapsed"
    pinned: bool = False
    focused: bool = False
    added_by: str = "system"

    def __post_init__(self) -> None:
        if self.state not in NODE_STATES:
            raise StoryError(f"bad node state {self.state!r}")
        if self.added_by not in ("system", "user"):
            raise StoryError(f"bad added_by {self.added_by!r}")
        if self.depth < 0:
            raise StoryError("depth must be nonnegative")


@dataclass(frozen=True)
class StoryEdge:
    parent: str
    child: str
    kind: str
    relation_text: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in EDGE_KINDS:
            raise StoryError(f"bad edge kind {self.kind!r}")


@dataclass
class QueryLogEntry:
    query: str
    focused_node: str
    recommended: tuple[str, ...]
    orphaned: bool = False


@dataclass
class Story:
    session_id: str
    catalog_hash: str
    nodes: dict[str, StoryNode] = field(default_factory=dict)
    edges: list[StoryEdge] = field(default_factory=list)
    query_log: list[QueryLogEntry] = field(default_factory=list)
    next_node: int = 1

    def _new_node_id(self) -> str:
        nid = f"n{self.next_node:04d}"
        self.next_node += 1
        return nid

    def parent_of(self, node_id: str) -> str | None:
        for e in self.edges:
            if e.child == node_id:
                return e.parent
        return None

    def children_of(self, node_id: str) -> list[str]:
        return sorted(e.child for e in self.edges if e.parent == node_id)

    def subtree(self, node_id: str) -> list[str]:
        """node_id plus all descendants, preorder with sorted children."""
        out: list[str] = []

        def walk(nid: str) -> None:
            out.append(nid)
            for kid in self.children_of(nid):
                walk(kid)

        walk(node_id)
        return out

    def has_insight(self, insight_id: str) -> bool:
        return any(n.insight_id == insight_id for n in self.nodes.values())

    def _require(self, node_id: str) -> StoryNode:
        node = self.nodes.get(node_id)
        if node is None:
            raise KeyError(f"no node {node_id!r} in story")
        return node


def new_story(session_id: str, catalog_hash: str) -> Story:
    return Story(session_id=session_id, catalog_hash=catalog_hash)


def _edge_kind_for(a: Insight, b: Insight) -> str:
    """Structural kind when the subspaces relate; sibling as the neutral kind."""
    rel = relation_of(a.ae.subspace.locator, b.ae.subspace.locator)
    if rel is not None and rel.tag == "parent_child":
        return "structural_parent_child"
    return "structural_sibling"


def seed_first_layer(
    story: Story, catalog: InsightCatalog, n: int = SEED_COUNT, diversity: int = SEED_DIVERSITY
) -> list[str]:
    """Initial recommendation layer: top-n by score, diversity-capped, depth 0."""
    ranked = sorted(catalog.insights, key=lambda i: (-i.score, i.id))
    per_type: dict[tuple[str, str], int] = {}
    new_ids = []
    for ins in ranked:
        if len(new_ids) == n:
            break
        key = (ins.category, ins.itype)
        if per_type.get(key, 0) >= diversity:
            continue
        if story.has_insight(ins.id):
            continue
        per_type[key] = per_type.get(key, 0) + 1
        nid = story._new_node_id()
        story.nodes[nid] = StoryNode(
            node_id=nid, insight_id=ins.id, depth=0, state="expanded", added_by="system"
        )
        new_ids.append(nid)
    return new_ids


def add_recommendations(
    story: Story,
    focused: str,
    rec: Recommendation,
    catalog: InsightCatalog,
    query: str = "",
) -> list[str]:
    """One collapsed child per recommended insight; duplicates skipped.

    The query log is appended even when nothing was added.
    """
    parent = story._require(focused)
    parent_ins = catalog.by_id[parent.insight_id]
    new_ids = []
    for insight_id, relation_text, _votes in rec.chosen:
        if story.has_insight(insight_id):
            logger.info("insight %s already in story; skipped", insight_id)
            continue
        ins = catalog.by_id.get(insight_id)
        if ins is None:
            raise StoryError(f"recommended insight {insight_id!r} not in catalog")
        nid = story._new_node_id()
        story.nodes[nid] = StoryNode(
            node_id=nid,
            insight_id=insight_id,
            depth=parent.depth + 1,
            state="collapsed",
            added_by="system",
        )
        story.edges.append(
            StoryEdge(
                parent=focused,
                child=nid,
                kind=_edge_kind_for(parent_ins, ins),
                relation_text=relation_text,
            )
        )
        new_ids.append(nid)
    story.query_log.append(
        QueryLogEntry(query=query, focused_node=focused, recommended=tuple(new_ids))
    )
    return new_ids


def user_add_node(
    story: Story, parent: str, insight_id: str, catalog: InsightCatalog | None = None
) -> str:
    parent_node = story._require(parent)
    if story.has_insight(insight_id):
        raise StoryError(f"insight {insight_id!r} is already in the story")
    if catalog is not None and insight_id not in catalog.by_id:
        raise StoryError(f"insight {insight_id!r} not in catalog")
    nid = story._new_node_id()
    story.nodes[nid] = StoryNode(
        node_id=nid,
        insight_id=insight_id,
        depth=parent_node.depth + 1,
        state="collapsed",
        added_by="user",
    )
    story.edges.append(StoryEdge(parent=parent, child=nid, kind="user_added"))
    return nid


def move_node(story: Story, node_id: str, new_parent: str) -> Story:
    """Re-parent the whole subtree; depths recomputed; cycles rejected."""
    story._require(node_id)
    target = story._require(new_parent)
    if new_parent == node_id or new_parent in story.subtree(node_id):
        raise StoryError("move would create a cycle")
    if story.parent_of(node_id) == new_parent:
        return story
    story.edges = [e for e in story.edges if e.child != node_id]
    # the re-parent is a user gesture; the old relation text described the old parent
    story.edges.append(StoryEdge(parent=new_parent, child=node_id, kind="user_added"))
    delta = (target.depth + 1) - story.nodes[node_id].depth
    for nid in story.subtree(node_id):
        story.nodes[nid].depth += delta
    return story


def delete_node(story: Story, node_id: str) -> Story:
    """Removes the node and its subtree; log entries touching them go orphaned."""
    story._require(node_id)
    doomed = set(story.subtree(node_id))
    for nid in doomed:
        del story.nodes[nid]
    story.edges = [e for e in story.edges if e.parent not in doomed and e.child not in doomed]
    for entry in story.query_log:
        if entry.focused_node in doomed or any(r in doomed for r in entry.recommended):
            entry.orphaned = True
    return story


def set_state(story: Story, node_id: str, op: str) -> Story:
    node = story._require(node_id)
    if op == "pin":
        node.pinned = True
    elif op == "unpin":
        node.pinned = False
    elif op == "collapse":
        node.state = "collapsed"
    elif op == "expand":
        node.state = "expanded"
    elif op == "focus":
        for other in story.nodes.values():
            other.focused = False
        node.focused = True
    else:
        raise StoryError(f"unknown state op {op!r}")
    return story


def history_path(story: Story, node_id: str) -> list[tuple[StoryNode, str | None]]:
    """Root-to-node chain, each node paired with the query that produced it."""
    story._require(node_id)
    produced_by: dict[str, str] = {}
    for entry in story.query_log:
        for rec in entry.recommended:
            produced_by.setdefault(rec, entry.query)
    chain = []
    cur: str | None = node_id
    while cur is not None:
        chain.append((story.nodes[cur], produced_by.get(cur)))
        cur = story.parent_of(cur)
    chain.reverse()
    return chain


def export_story(story: Story) -> str:
    doc = {
        "schema": STORY_SCHEMA,
        "session_id": story.session_id,
        "catalog_hash": story.catalog_hash,
        "next_node": story.next_node,
        "nodes": [
            {
                "node_id": n.node_id,
                "insight_id": n.insight_id,
                "depth": n.depth,
                "state": n.state,
                "pinned": n.pinned,
                "focused": n.focused,
                "added_by": n.added_by,
            }
            for _, n in sorted(story.nodes.items())
        ],
        "edges": [
            {"from": e.parent, "to": e.child, "kind": e.kind, "relation_text": e.relation_text}
            for e in sorted(story.edges, key=lambda e: (e.parent, e.child))
        ],
        "query_log": [
            {
                "query": q.query,
                "focused_node": q.focused_node,
                "recommended": list(q.recommended),
                "orphaned": q.orphaned,
            }
            for q in story.query_log
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def import_story(text: str) -> Story:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StoryError(f"malformed story document: {exc}") from exc
    if doc.get("schema") != STORY_SCHEMA:
        raise StoryError(f"unsupported story schema {doc.get('schema')!r}")
    story = Story(
        session_id=doc["session_id"],
        catalog_hash=doc["catalog_hash"],
        next_node=int(doc["next_node"]),
    )
    for nd in doc["nodes"]:
        node = StoryNode(
            node_id=nd["node_id"],
            insight_id=nd["insight_id"],
            depth=int(nd["depth"]),
            state=nd["state"],
            pinned=bool(nd["pinned"]),
            focused=bool(nd["focused"]),
            added_by=nd["added_by"],
        )
        if node.node_id in story.nodes:
            raise StoryError(f"duplicate node id {node.node_id!r}")
        story.nodes[node.node_id] = node
    if sum(1 for n in story.nodes.values() if n.focused) > 1:
        raise StoryError("more than one focused node")
    seen_children = set()
    for ed in doc["edges"]:
        if ed["from"] not in story.nodes or ed["to"] not in story.nodes:
            raise StoryError(f"edge references missing node: {ed['from']}->{ed['to']}")
        if ed["to"] in seen_children:
            raise StoryError(f"node {ed['to']!r} has two parents")
        seen_children.add(ed["to"])
        story.edges.append(
            StoryEdge(parent=ed["from"], child=ed["to"], kind=ed["kind"], relation_text=ed["relation_text"])
        )
    for qd in doc["query_log"]:
        story.query_log.append(
            QueryLogEntry(
                query=qd["query"],
                focused_node=qd["focused_node"],
                recommended=tuple(qd["recommended"]),
                orphaned=bool(qd["orphaned"]),
            )
        )
    return story
