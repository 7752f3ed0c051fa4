import { describe, expect, it } from "vitest";

import { FOCUS_BORDER, PLAIN_BORDER, buildScene } from "../src/tree";
import { RING_BASE, radialLayout, ringRadius, toXY } from "../src/layout";
import { adoptLayout, initialState, interact } from "../src/state";
import type {
  EdgeKind,
  InsightDetailDoc,
  InsightType,
  StoryDoc,
  StoryNodeDoc,
} from "../src/types";

function mkNode(
  nodeId: string,
  insightId: string,
  depth: number,
  extra: Partial<StoryNodeDoc> = {},
): StoryNodeDoc {
  return {
    node_id: nodeId,
    insight_id: insightId,
    depth,
    state: "collapsed",
    pinned: false,
    focused: false,
    added_by: "system",
    ...extra,
  };
}

function mkDetail(id: string, itype: InsightType = "trend"): InsightDetailDoc {
  const category =
    itype === "trend" || itype === "skewness" || itype === "kurtosis" || itype === "evenness"
      ? "shape"
      : itype === "temporal_correlation" || itype === "linear_correlation" || itype === "dependence"
        ? "compound"
        : "point";
  return {
    schema: "iw-catalog/1",
    id,
    category,
    itype,
    score: 0.9,
    highlight: { direction: "rising", r: 0.95 },
    ae: { locator: { Dim: "v" }, breakdown: "B", measure: "M", aggregate: "sum" },
    series: { labels: ["a", "b", "c", "d"], values: [1, 2, 3, 4], ordinal: true },
    series2: null,
    description: `insight ${id}`,
  };
}

/**
 * A thirteen-node story spread over four depths: one root ring of
 * three seeds, then 5, 3 and 2 nodes hanging off them. Shapes follow
 * the story export schema exactly.
 */
function thirteenNodeStory(): StoryDoc {
  const nodes: StoryNodeDoc[] = [];
  const edges: StoryDoc["edges"] = [];
  const depths: Record<number, string[]> = { 0: [], 1: [], 2: [], 3: [] };
  const plan: [number, number][] = [
    [0, 3],
    [1, 5],
    [2, 3],
    [3, 2],
  ];
  let n = 0;
  for (const [depth, count] of plan) {
    for (let i = 0; i < count; i++) {
      n += 1;
      const nodeId = `n${String(n).padStart(4, "0")}`;
      nodes.push(mkNode(nodeId, `i${n}`, depth));
      depths[depth]!.push(nodeId);
      if (depth > 0) {
        const parents = depths[depth - 1]!;
        const parent = parents[i % parents.length]!;
        const kind: EdgeKind = n % 5 === 0 ? "user_added" : "structural_parent_child";
        edges.push({ from: parent, to: nodeId, kind, relation_text: `${parent} to ${nodeId}` });
      }
    }
  }
  return {
    schema: "iw-story/1",
    session_id: "feedfeedfeedfeed",
    catalog_hash: "cafecafecafecafe",
    next_node: 14,
    nodes,
    edges,
    query_log: [],
  };
}

describe("ring geometry", () => {
  it("radius strictly increases with depth", () => {
    for (let d = 0; d < 8; d++) {
      expect(ringRadius(d + 1)).toBeGreaterThan(ringRadius(d));
    }
    expect(() => ringRadius(-1)).toThrow();
    expect(() => ringRadius(1.5)).toThrow();
  });

  it("a thirteen-node story over four depths renders four concentric rings", () => {
    const story = thirteenNodeStory();
    expect(story.nodes).toHaveLength(13);
    const layout = radialLayout(story);
    const details = new Map(story.nodes.map((n) => [n.insight_id, mkDetail(n.insight_id)]));
    const scene = buildScene(story, layout, details);
    expect(scene.rings).toHaveLength(4);
    for (let i = 1; i < scene.rings.length; i++) {
      expect(scene.rings[i]!).toBeGreaterThan(scene.rings[i - 1]!);
    }
    // every node sits exactly on its depth's ring
    for (const node of story.nodes) {
      const pos = layout[node.node_id]!;
      expect(pos.radius).toBe(ringRadius(node.depth));
      const { x, y } = toXY(pos);
      expect(Math.hypot(x, y)).toBeCloseTo(pos.radius, 6);
    }
  });

  it("an empty story still shows the seed ring and nothing else", () => {
    const story: StoryDoc = {
      schema: "iw-story/1",
      session_id: "feedfeedfeedfeed",
      catalog_hash: "cafecafecafecafe",
      next_node: 1,
      nodes: [],
      edges: [],
      query_log: [],
    };
    const scene = buildScene(story, radialLayout(story), new Map());
    expect(scene.rings).toEqual([RING_BASE]);
    expect(scene.nodes).toHaveLength(0);
    expect(scene.edges).toHaveLength(0);
  });

  it("layout is deterministic and keeps ring mates apart", () => {
    const story = thirteenNodeStory();
    const a = radialLayout(story);
    const b = radialLayout(story);
    expect(a).toEqual(b);
    const ring1 = story.nodes.filter((n) => n.depth === 1).map((n) => a[n.node_id]!);
    for (let i = 0; i < ring1.length; i++) {
      for (let j = i + 1; j < ring1.length; j++) {
        const pi = toXY(ring1[i]!);
        const pj = toXY(ring1[j]!);
        expect(Math.hypot(pi.x - pj.x, pi.y - pj.y)).toBeGreaterThan(20);
      }
    }
  });

  it("pinned nodes keep their angle through force updates and relayouts", () => {
    const story = thirteenNodeStory();
    const target = story.nodes.find((n) => n.depth === 1)!;
    target.pinned = true;
    const theta = 2.4;

    const layout = radialLayout(story, { pinnedAngles: { [target.node_id]: theta } });
    expect(layout[target.node_id]!.angle).toBeCloseTo(theta, 12);

    // drag updates the stored position, then a fresh layout adoption
    // leaves the pinned angle alone while unpinned nodes move freely
    let state = adoptLayout({ ...initialState(), positions: {} }, layout, new Set([target.node_id]));
    state = interact(state, { type: "drag", nodeId: target.node_id, angle: 0.7 }).state;
    expect(state.positions[target.node_id]!.angle).toBeCloseTo(0.7, 12);

    const relayout = radialLayout(story, { pinnedAngles: { [target.node_id]: 0.7 } });
    state = adoptLayout(state, relayout, new Set([target.node_id]));
    expect(state.positions[target.node_id]!.angle).toBeCloseTo(0.7, 12);
    expect(state.positions[target.node_id]!.radius).toBe(ringRadius(1));
  });
});

describe("scene encoding", () => {
  it("collapsed nodes are glyph discs, expanded nodes are chart cards, focused nodes get the thick border", () => {
    const story = thirteenNodeStory();
    story.nodes[0]!.state = "expanded";
    story.nodes[1]!.focused = true;
    const details = new Map(story.nodes.map((n) => [n.insight_id, mkDetail(n.insight_id)]));
    const scene = buildScene(story, radialLayout(story), details);

    const byId = new Map(scene.nodes.map((n) => [n.nodeId, n]));
    const card = byId.get(story.nodes[0]!.node_id)!;
    expect(card.kind).toBe("card");
    expect(card.chart).not.toBeNull();
    expect(card.chart!.form).toBe("line-marked");

    const focused = byId.get(story.nodes[1]!.node_id)!;
    expect(focused.kind).toBe("disc");
    expect(focused.chart).toBeNull();
    expect(focused.borderWidth).toBe(FOCUS_BORDER);
    expect(card.borderWidth).toBe(PLAIN_BORDER);
  });

  it("edges carry their relation text and the style for their kind", () => {
    const story = thirteenNodeStory();
    const details = new Map(story.nodes.map((n) => [n.insight_id, mkDetail(n.insight_id)]));
    const scene = buildScene(story, radialLayout(story), details);
    expect(scene.edges).toHaveLength(story.edges.length);
    const kinds = new Set(story.edges.map((e) => e.kind));
    expect(kinds).toContain("user_added");
    for (const edge of scene.edges) {
      const source = story.edges.find((e) => e.from === edge.from && e.to === edge.to)!;
      expect(edge.relationText).toBe(source.relation_text);
      if (source.kind === "structural_parent_child") expect(edge.style.form).toBe("taper");
      if (source.kind === "user_added") expect(edge.style.dash).not.toBeNull();
    }
  });

  it("nodes whose insight detail has not loaded yet stay out of the scene instead of rendering wrong", () => {
    const story = thirteenNodeStory();
    const details = new Map([[story.nodes[0]!.insight_id, mkDetail(story.nodes[0]!.insight_id)]]);
    const scene = buildScene(story, radialLayout(story), details);
    expect(scene.nodes).toHaveLength(1);
  });
});

describe("query box state", () => {
  it("submit sends the pending text to the focused node exactly once", () => {
    let state = initialState();
    state = interact(state, { type: "edit_query", text: "  why is winter down  " }).state;
    const { state: inFlight, effects } = interact(state, {
      type: "submit_query",
      focusedNode: "n0002",
    });
    expect(effects).toEqual([
      { kind: "post_query", focusedNode: "n0002", text: "why is winter down" },
    ]);
    expect(inFlight.queryInFlight).toBe(true);

    // a second submit while the first is pending is a no-op
    const again = interact(inFlight, { type: "submit_query", focusedNode: "n0002" });
    expect(again.effects).toHaveLength(0);
  });

  it("empty query text never reaches the service", () => {
    const state = interact(initialState(), { type: "edit_query", text: "   " }).state;
    const { effects } = interact(state, { type: "submit_query", focusedNode: "n0001" });
    expect(effects).toHaveLength(0);
  });

  it("clicking a node focuses it through the service, never locally", () => {
    const { state, effects } = interact(initialState(), { type: "click", nodeId: "n0003" });
    expect(state.panel.selectedNode).toBe("n0003");
    expect(effects).toEqual([{ kind: "set_node_state", nodeId: "n0003", op: "focus" }]);
  });
});
