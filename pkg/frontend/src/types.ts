/**
 * Wire types for the insightweaver /v1 API.
 *
 * These mirror the JSON documents the service emits, field for field.
 * Nothing in here is invented by the UI; if a shape changes on the
 * service side this file is the single place to update.
 */

export type Category = "point" | "shape" | "compound";

export type InsightType =
  | "dominance"
  | "top2"
  | "outlier"
  | "outstanding_negative"
  | "trend"
  | "skewness"
  | "kurtosis"
  | "evenness"
  | "temporal_correlation"
  | "linear_correlation"
  | "dependence";

export type EdgeKind =
  | "structural_parent_child"
  | "structural_sibling"
  | "user_added";

export type NodeState = "collapsed" | "expanded";

/** One plotted series; ordinal says whether label order is meaningful. */
export interface SeriesDoc {
  labels: string[];
  values: number[];
  ordinal: boolean;
}

export interface AnalysisEntity {
  /** Subspace filters as {dimension: value}. Empty object is the root. */
  locator: Record<string, string>;
  breakdown: string;
  measure: string;
  aggregate: string;
}

export interface InsightDoc {
  schema: "iw-catalog/1";
  id: string;
  category: Category;
  itype: InsightType;
  score: number;
  highlight: Record<string, unknown>;
  ae: AnalysisEntity;
  series: SeriesDoc | null;
  series2: SeriesDoc | null;
}

/** Insight detail endpoint adds the generated sentence. */
export interface InsightDetailDoc extends InsightDoc {
  description: string;
}

/** Node document returned by session and query endpoints. */
export interface NodeDoc {
  node_id: string;
  insight_id: string;
  depth: number;
  state: NodeState;
  pinned: boolean;
  focused: boolean;
  added_by: string;
  parent: string | null;
  edge_kind: EdgeKind | null;
  relation_text: string | null;
  description: string;
  itype: InsightType;
  category: Category;
  score: number;
}

/** Leaner node shape used inside the story export document. */
export interface StoryNodeDoc {
  node_id: string;
  insight_id: string;
  depth: number;
  state: NodeState;
  pinned: boolean;
  focused: boolean;
  added_by: string;
}

export interface StoryEdgeDoc {
  from: string;
  to: string;
  kind: EdgeKind;
  relation_text: string;
}

export interface QueryLogDoc {
  query: string;
  focused_node: string;
  recommended: string[];
  orphaned: string[];
}

export interface StoryDoc {
  schema: "iw-story/1";
  session_id: string;
  catalog_hash: string;
  next_node: number;
  nodes: StoryNodeDoc[];
  edges: StoryEdgeDoc[];
  query_log: QueryLogDoc[];
}

export interface ColumnDoc {
  name: string;
  kind: string;
  ordinal: boolean;
  values: string[];
}

export interface SessionSummaryDoc {
  session_id: string;
  catalog_hash: string;
  row_count: number;
  dropped_rows: number;
  insight_count: number;
  counts_by_type: Record<string, number>;
  columns: ColumnDoc[];
  seeded_nodes: NodeDoc[];
  created?: boolean;
}

export interface RecommendationDoc {
  chosen: {
    insight_id: string;
    relation_text: string;
    votes: number;
  }[];
  samples_used: number;
  fallback: boolean;
}

export interface QueryTurnDoc {
  recommendation: RecommendationDoc;
  new_nodes: NodeDoc[];
  path: string;
  candidates_considered: number;
  focused_node: string;
}

export interface SubspaceListingDoc {
  locator: string;
  insights: InsightDetailDoc[];
}

/** One hop on the root-to-node path; query is null for seeded hops. */
export interface HistoryEntryDoc {
  node: NodeDoc;
  query: string | null;
}

export interface HealthDoc {
  status: string;
  version: string;
  offline: boolean;
}

export interface StatusDoc {
  session_id: string;
  state: string;
  insight_count: number;
  node_count: number;
}

export interface ErrorEnvelope {
  code: string;
  message: string;
  detail?: unknown;
}
