/**
 * Effect execution. The reducer in state.ts describes what should hit
 * the service; this module actually sends it. Kept separate from the
 * DOM shell so tests can run real effects against a stub server.
 */

import type { ApiClient } from "./api.js";
import type { Effect } from "./state.js";
import type {
  HistoryEntryDoc,
  InsightDetailDoc,
  NodeDoc,
  QueryTurnDoc,
  SubspaceListingDoc,
} from "./types.js";

export type EffectResult =
  | { kind: "subspaces"; listing: SubspaceListingDoc }
  | { kind: "insight"; insight: InsightDetailDoc }
  | { kind: "history"; path: HistoryEntryDoc[] }
  | { kind: "query"; turn: QueryTurnDoc }
  | { kind: "node"; node: NodeDoc };

export async function runEffect(
  api: ApiClient,
  sessionId: string,
  effect: Effect,
): Promise<EffectResult> {
  switch (effect.kind) {
    case "fetch_subspaces": {
      const listing = await api.subspaces(sessionId, effect.filters);
      return { kind: "subspaces", listing };
    }
    case "fetch_insight": {
      const insight = await api.insight(sessionId, effect.insightId);
      return { kind: "insight", insight };
    }
    case "fetch_history": {
      const { path } = await api.history(sessionId, effect.nodeId);
      return { kind: "history", path };
    }
    case "post_query": {
      const turn = await api.query(sessionId, effect.focusedNode, effect.text);
      return { kind: "query", turn };
    }
    case "set_node_state": {
      const { node } = await api.setNodeState(sessionId, effect.nodeId, effect.op);
      return { kind: "node", node };
    }
  }
}
