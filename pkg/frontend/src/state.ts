/**
 * View state and the interaction reducer.
 *
 * The UI never owns story state; it owns presentation state (layout
 * positions, panel contents, pending query text) and expresses every
 * story mutation as an effect for the app shell to run against the
 * service. `interact` is a pure function so the whole event surface
 * can be tested without a DOM.
 */

import type { InsightDetailDoc, NodeDoc, StoryDoc } from "./types.js";

export interface NodePosition {
  angle: number;
  radius: number;
}

export interface PanelState {
  /** Active subspace filters, {dimension: value}. */
  filters: Record<string, string>;
  selectedNode: string | null;
  /** node_id whose root path the history view is showing. */
  historySelection: string | null;
}

export interface HoverState {
  kind: "node" | "edge" | "chart-point";
  /** relation text for edges, description for nodes, datum for points. */
  text: string;
}

export interface ViewState {
  sessionId: string | null;
  positions: Record<string, NodePosition>;
  panel: PanelState;
  pendingQuery: string;
  queryInFlight: boolean;
  hover: HoverState | null;
  notices: string[];
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    positions: {},
    panel: { filters: {}, selectedNode: null, historySelection: null },
    pendingQuery: "",
    queryInFlight: false,
    hover: null,
    notices: [],
  };
}

export type UiEvent =
  | { type: "click"; nodeId: string }
  | { type: "hover"; target: HoverState | null }
  | { type: "drag"; nodeId: string; angle: number }
  | { type: "pin"; nodeId: string; pinned: boolean }
  | { type: "collapse"; nodeId: string }
  | { type: "expand"; nodeId: string }
  | { type: "inspect"; insight: InsightDetailDoc }
  | { type: "edit_query"; text: string }
  | { type: "submit_query"; focusedNode: string }
  | { type: "select_history"; nodeId: string | null }
  | { type: "dismiss_notice"; index: number };

export type Effect =
  | { kind: "fetch_subspaces"; filters: string[] }
  | { kind: "fetch_insight"; insightId: string }
  | { kind: "fetch_history"; nodeId: string }
  | { kind: "post_query"; focusedNode: string; text: string }
  | { kind: "set_node_state"; nodeId: string; op: "collapse" | "expand" | "pin" | "unpin" | "focus" };

export interface Transition {
  state: ViewState;
  effects: Effect[];
}

/** Panel filters as sorted "Dimension=value" conjuncts for the API. */
export function filterConjuncts(filters: Record<string, string>): string[] {
  return Object.keys(filters)
    .sort()
    .map((dim) => `${dim}=${filters[dim]}`);
}

export function interact(state: ViewState, event: UiEvent): Transition {
  switch (event.type) {
    case "click": {
      // selecting a node focuses it on the service and opens its detail
      const panel = { ...state.panel, selectedNode: event.nodeId };
      return {
        state: { ...state, panel },
        effects: [{ kind: "set_node_state", nodeId: event.nodeId, op: "focus" }],
      };
    }

    case "hover":
      return { state: { ...state, hover: event.target }, effects: [] };

    case "drag": {
      const prev = state.positions[event.nodeId];
      if (!prev) return { state, effects: [] };
      const positions = {
        ...state.positions,
        // radius is owned by the ring; a drag only moves along it
        [event.nodeId]: { angle: event.angle, radius: prev.radius },
      };
      return { state: { ...state, positions }, effects: [] };
    }

    case "pin":
      return {
        state,
        effects: [
          { kind: "set_node_state", nodeId: event.nodeId, op: event.pinned ? "pin" : "unpin" },
        ],
      };

    case "collapse":
      return {
        state,
        effects: [{ kind: "set_node_state", nodeId: event.nodeId, op: "collapse" }],
      };

    case "expand":
      return {
        state,
        effects: [{ kind: "set_node_state", nodeId: event.nodeId, op: "expand" }],
      };

    case "inspect": {
      // copy the insight's locator into the filter panel verbatim and
      // refresh the subspace listing from the new panel state
      const filters = { ...event.insight.ae.locator };
      const panel = { ...state.panel, filters };
      const next = { ...state, panel };
      return {
        state: next,
        effects: [{ kind: "fetch_subspaces", filters: filterConjuncts(next.panel.filters) }],
      };
    }

    case "edit_query":
      return { state: { ...state, pendingQuery: event.text }, effects: [] };

    case "submit_query": {
      const text = state.pendingQuery.trim();
      if (!text || state.queryInFlight) return { state, effects: [] };
      return {
        state: { ...state, queryInFlight: true },
        effects: [{ kind: "post_query", focusedNode: event.focusedNode, text }],
      };
    }

    case "select_history": {
      const panel = { ...state.panel, historySelection: event.nodeId };
      const effects: Effect[] =
        event.nodeId === null ? [] : [{ kind: "fetch_history", nodeId: event.nodeId }];
      return { state: { ...state, panel }, effects };
    }

    case "dismiss_notice": {
      const notices = state.notices.filter((_, i) => i !== event.index);
      return { state: { ...state, notices }, effects: [] };
    }
  }
}

/** Record a failed effect as a non-blocking notice. */
export function noteError(state: ViewState, message: string): ViewState {
  return {
    ...state,
    queryInFlight: false,
    notices: [...state.notices, message].slice(-5),
  };
}

export function queryResolved(state: ViewState): ViewState {
  return { ...state, pendingQuery: "", queryInFlight: false };
}

/** Merge freshly computed layout positions, never touching pinned angles. */
export function adoptLayout(
  state: ViewState,
  layout: Record<string, NodePosition>,
  pinned: ReadonlySet<string>,
): ViewState {
  const positions: Record<string, NodePosition> = {};
  for (const [nodeId, pos] of Object.entries(layout)) {
    const prev = state.positions[nodeId];
    if (pinned.has(nodeId) && prev) {
      positions[nodeId] = { angle: prev.angle, radius: pos.radius };
    } else {
      positions[nodeId] = pos;
    }
  }
  return { ...state, positions };
}

/** Drop positions for nodes the story no longer contains. */
export function pruneToStory(state: ViewState, story: StoryDoc): ViewState {
  const keep = new Set(story.nodes.map((n) => n.node_id));
  const positions: Record<string, NodePosition> = {};
  for (const [nodeId, pos] of Object.entries(state.positions)) {
    if (keep.has(nodeId)) positions[nodeId] = pos;
  }
  const panel = { ...state.panel };
  if (panel.selectedNode !== null && !keep.has(panel.selectedNode)) panel.selectedNode = null;
  if (panel.historySelection !== null && !keep.has(panel.historySelection)) {
    panel.historySelection = null;
  }
  return { ...state, positions, panel };
}

export function focusedNodeOf(nodes: NodeDoc[]): string | null {
  for (const node of nodes) if (node.focused) return node.node_id;
  return null;
}
