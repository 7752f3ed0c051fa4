/**
 * Scene assembly: story document plus layout plus loaded insight
 * details, flattened into drawable shapes. Pure data in, pure data
 * out, so the renderer stays dumb and the tests stay DOM-free.
 */

import { buildChartSpec, type ChartSpec } from "./charts.js";
import { categoryColor, edgeStyle, typeGlyph, type EdgeStyle, type Glyph } from "./encoding.js";
import { toXY, ringRadius } from "./layout.js";
import type { NodePosition } from "./state.js";
import type { InsightDetailDoc, StoryDoc } from "./types.js";

export interface SceneNode {
  nodeId: string;
  insightId: string;
  x: number;
  y: number;
  /** collapsed nodes draw as glyph discs, expanded ones as chart cards */
  kind: "disc" | "card";
  color: string;
  glyph: Glyph;
  /** focused node gets the thick border */
  borderWidth: number;
  pinned: boolean;
  chart: ChartSpec | null;
  hoverText: string;
}

export interface SceneEdge {
  from: string;
  to: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  style: EdgeStyle;
  relationText: string;
}

export interface Scene {
  nodes: SceneNode[];
  edges: SceneEdge[];
  /** radii of the ring guides; an empty story still shows the seed ring */
  rings: number[];
}

export const FOCUS_BORDER = 4;
export const PLAIN_BORDER = 1.5;

export function buildScene(
  story: StoryDoc,
  positions: Record<string, NodePosition>,
  details: ReadonlyMap<string, InsightDetailDoc>,
): Scene {
  const xy = new Map<string, { x: number; y: number }>();
  const nodes: SceneNode[] = [];
  for (const node of story.nodes) {
    const pos = positions[node.node_id];
    if (!pos) continue;
    const point = toXY(pos);
    xy.set(node.node_id, point);
    const detail = details.get(node.insight_id);
    if (!detail) continue;
    const expanded = node.state === "expanded";
    nodes.push({
      nodeId: node.node_id,
      insightId: node.insight_id,
      x: point.x,
      y: point.y,
      kind: expanded ? "card" : "disc",
      color: categoryColor(detail.category),
      glyph: typeGlyph(detail.itype),
      borderWidth: node.focused ? FOCUS_BORDER : PLAIN_BORDER,
      pinned: node.pinned,
      chart: expanded ? buildChartSpec(detail) : null,
      hoverText: detail.description,
    });
  }

  const edges: SceneEdge[] = [];
  for (const edge of story.edges) {
    const a = xy.get(edge.from);
    const b = xy.get(edge.to);
    if (!a || !b) continue;
    edges.push({
      from: edge.from,
      to: edge.to,
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
      style: edgeStyle(edge.kind),
      relationText: edge.relation_text,
    });
  }

  const depths = new Set<number>([0]);
  for (const node of story.nodes) depths.add(node.depth);
  const rings = [...depths].sort((a, b) => a - b).map(ringRadius);

  return { nodes, edges, rings };
}
