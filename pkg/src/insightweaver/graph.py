"""Structural relations between subspaces and BFS candidate filtering.

Two subspaces are siblings when their locators have equal length, filter
the same dimensions, and differ in exactly one value. They are parent and
child when the lengths differ by one and the shorter locator's filters all
appear verbatim in the longer one. The graph over all enumerated subspaces
drives structural filtering: a breadth-first walk of bounded depth around
a focused insight's subspace, collecting every cataloged insight that
lives in a reached subspace.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .insights import Insight, InsightCatalog
from .tables import Locator, Subspace

__all__ = [
    "RelationKind",
    "SubspaceEdge",
    "SubspaceGraph",
    "CandidateSet",
    "relation_of",
    "build_graph",
    "structural_filter",
    "export_graph",
]

CANDIDATE_CAP = 500


@dataclass(frozen=True)
class RelationKind:
    """tag is "sibling" or "parent_child"; parent names the parent endpoint."""

    tag: str
    parent: str | None = None  # "a" | "b" for parent_child, None for sibling

    def __post_init__(self) -> None:
        if self.tag not in ("sibling", "parent_child"):
            raise ValueError(f"unknown relation tag {self.tag!r}")
        if (self.tag == "parent_child") != (self.parent in ("a", "b")):
            raise ValueError("parent endpoint must be set exactly for parent_child")


@dataclass(frozen=True)
class SubspaceEdge:
    a: str  # locator text
    b: str
    kind: RelationKind


@dataclass
class SubspaceGraph:
    nodes: tuple[str, ...]  # locator texts, sorted
    edges: tuple[SubspaceEdge, ...]
    adjacency: dict

    def neighbors(self, node: str) -> tuple[str, ...]:
        return self.adjacency.get(node, ())


def relation_of(a: Locator, b: Locator) -> RelationKind | None:
    """Classify the pair, or None when neither relation holds."""
    fa, fb = dict(a.filters), dict(b.filters)
    if fa == fb:
        return None
    if len(fa) == len(fb):
        if set(fa) != set(fb):
            return None
        diffs = sum(1 for d in fa if fa[d] != fb[d])
        return RelationKind("sibling") if diffs == 1 else None
    if abs(len(fa) - len(fb)) != 1:
        return None
    (small, big, parent) = (fa, fb, "a") if len(fa) < len(fb) else (fb, fa, "b")
    if all(big.get(d) == v for d, v in small.items()):
        return RelationKind("parent_child", parent=parent)
    return None


def build_graph(subspaces: list[Subspace]) -> SubspaceGraph:
    """Relation edges over the lattice without the all-pairs scan.

    Sibling candidates share a (dimension set, all-but-one filters) key;
    parent-child candidates are found by dropping one filter and looking
    the rest up. Both directions of every relation collapse into one edge.
    """
    locs = {s.locator.text(): s.locator for s in subspaces}
    texts = sorted(locs)
    edges: set[tuple] = set()

    # siblings: bucket by the filters left after hiding one dimension
    buckets: dict[tuple, list[str]] = {}
    for text in texts:
        loc = locs[text]
        for hide, _ in loc.filters:
            key = (hide, tuple(p for p in loc.filters if p[0] != hide))
            buckets.setdefault(key, []).append(text)
    for members in buckets.values():
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                edges.add(("sibling", members[i], members[j]))

    # parent-child: drop one filter, look up the remainder
    for text in texts:
        loc = locs[text]
        for drop, _ in loc.filters:
            parent = Locator(tuple(p for p in loc.filters if p[0] != drop))
            ptext = parent.text()
            if ptext in locs:
                edges.add(("parent_child", ptext, text))

    out: list[SubspaceEdge] = []
    for tag, x, y in sorted(edges):
        kind = RelationKind(tag) if tag == "sibling" else RelationKind(tag, parent="a")
        out.append(SubspaceEdge(a=x, b=y, kind=kind))

    adjacency: dict[str, tuple[str, ...]] = {}
    neigh: dict[str, set[str]] = {t: set() for t in texts}
    for e in out:
        neigh[e.a].add(e.b)
        neigh[e.b].add(e.a)
    for t in texts:
        adjacency[t] = tuple(sorted(neigh[t]))
    return SubspaceGraph(nodes=tuple(texts), edges=tuple(out), adjacency=adjacency)


@dataclass(frozen=True)
class CandidateSet:
    origin_insight: str
    step: int
    insights: tuple[Insight, ...]


def structural_filter(
    catalog: InsightCatalog,
    graph: SubspaceGraph,
    focused: Insight,
    step: int = 1,
    cap: int = CANDIDATE_CAP,
) -> CandidateSet:
    """Insights within `step` hops of the focused insight's subspace.

    The origin subspace itself is included (distance zero), the focused
    insight is not its own candidate. Candidates come back score-descending
    (ties by id) and are truncated to the cap.
    """
    if focused.id not in catalog.by_id:
        raise KeyError(f"focused insight {focused.id} is not in the catalog")
    if step < 0:
        raise ValueError("step must be nonnegative")
    origin = focused.ae.subspace.locator.text()
    seen = {origin}
    frontier = deque([(origin, 0)])
    while frontier:
        node, dist = frontier.popleft()
        if dist == step:
            continue
        for nxt in graph.neighbors(node):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append((nxt, dist + 1))
    found = [
        ins
        for text in sorted(seen)
        for ins in catalog.by_locator.get(text, [])
        if ins.id != focused.id
    ]
    found.sort(key=lambda ins: (-ins.score, ins.id))
    return CandidateSet(origin_insight=focused.id, step=step, insights=tuple(found[:cap]))


def export_graph(graph: SubspaceGraph) -> str:
    """Graph dump: nodes as canonical locator texts, edges with their kinds."""
    doc = {
        "nodes": list(graph.nodes),
        "edges": [
            {
                "a": e.a,
                "b": e.b,
                "kind": e.kind.tag,
                "parent": e.a if e.kind.tag == "parent_child" else None,
            }
            for e in graph.edges
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
