/**
 * Radial tree layout.
 *
 * Nodes sit on concentric rings, one ring per story depth, radius
 * strictly increasing with depth. Within a ring a small deterministic
 * force pass spreads nodes apart while pulling children toward their
 * parent's bearing. No randomness: the same story always lays out the
 * same way.
 */

import type { NodePosition } from "./state.js";
import type { StoryDoc } from "./types.js";

export const RING_BASE = 80;
export const RING_STEP = 95;

export function ringRadius(depth: number): number {
  if (depth < 0 || !Number.isInteger(depth)) {
    throw new Error(`bad depth: ${depth}`);
  }
  return RING_BASE + depth * RING_STEP;
}

const TAU = Math.PI * 2;
const ITERATIONS = 48;
const PARENT_PULL = 0.12;
const MIN_GAP_PX = 56;

function normalize(angle: number): number {
  const a = angle % TAU;
  return a < 0 ? a + TAU : a;
}

/** Signed shortest angular distance from a to b, in (-pi, pi]. */
function angularDelta(a: number, b: number): number {
  let d = normalize(b) - normalize(a);
  if (d > Math.PI) d -= TAU;
  if (d <= -Math.PI) d += TAU;
  return d;
}

export interface LayoutOptions {
  /** Angles to hold fixed (pinned nodes keep the user's placement). */
  pinnedAngles?: Record<string, number>;
}

/**
 * Compute a position for every node in the story.
 *
 * Parent edges are the structural parent-child and user-added kinds;
 * sibling edges do not influence layout.
 */
export function radialLayout(story: StoryDoc, options: LayoutOptions = {}): Record<string, NodePosition> {
  const pinnedAngles = options.pinnedAngles ?? {};
  const parentOf = new Map<string, string>();
  for (const edge of story.edges) {
    if (edge.kind === "structural_parent_child" || edge.kind === "user_added") {
      parentOf.set(edge.to, edge.from);
    }
  }

  const byDepth = new Map<number, string[]>();
  const depthOf = new Map<string, number>();
  for (const node of story.nodes) {
    depthOf.set(node.node_id, node.depth);
    const ring = byDepth.get(node.depth);
    if (ring) ring.push(node.node_id);
    else byDepth.set(node.depth, [node.node_id]);
  }

  const angles = new Map<string, number>();
  const depths = [...byDepth.keys()].sort((a, b) => a - b);
  for (const depth of depths) {
    const ring = byDepth.get(depth)!;
    ring.sort();
    ring.forEach((nodeId, i) => {
      const pinned = pinnedAngles[nodeId];
      if (pinned !== undefined) {
        angles.set(nodeId, normalize(pinned));
        return;
      }
      const parent = parentOf.get(nodeId);
      const parentAngle = parent !== undefined ? angles.get(parent) : undefined;
      if (parentAngle === undefined) {
        angles.set(nodeId, (TAU * i) / ring.length);
      } else {
        // fan children a little to either side of the parent bearing
        const spread = 0.35 * (i - (ring.length - 1) / 2);
        angles.set(nodeId, normalize(parentAngle + spread));
      }
    });
  }

  for (let pass = 0; pass < ITERATIONS; pass++) {
    for (const depth of depths) {
      const ring = byDepth.get(depth)!;
      if (ring.length === 0) continue;
      const radius = ringRadius(depth);
      const minGap = Math.min(MIN_GAP_PX / radius, TAU / ring.length);

      for (const nodeId of ring) {
        if (pinnedAngles[nodeId] !== undefined) continue;
        let angle = angles.get(nodeId)!;

        const parent = parentOf.get(nodeId);
        if (parent !== undefined) {
          const parentAngle = angles.get(parent);
          if (parentAngle !== undefined) {
            angle = normalize(angle + PARENT_PULL * angularDelta(angle, parentAngle));
          }
        }

        // push away from ring neighbours that are too close
        for (const other of ring) {
          if (other === nodeId) continue;
          const d = angularDelta(angles.get(other)!, angle);
          const dist = Math.abs(d);
          if (dist < minGap && dist > 1e-9) {
            angle = normalize(angle + Math.sign(d) * (minGap - dist) * 0.5);
          } else if (dist <= 1e-9) {
            // coincident: break the tie by node id order
            angle = normalize(angle + (nodeId > other ? 1 : -1) * minGap * 0.5);
          }
        }
        angles.set(nodeId, angle);
      }
    }
  }

  const out: Record<string, NodePosition> = {};
  for (const node of story.nodes) {
    out[node.node_id] = {
      angle: angles.get(node.node_id)!,
      radius: ringRadius(node.depth),
    };
  }
  return out;
}

export function toXY(pos: NodePosition): { x: number; y: number } {
  return {
    x: pos.radius * Math.cos(pos.angle - Math.PI / 2),
    y: pos.radius * Math.sin(pos.angle - Math.PI / 2),
  };
}
