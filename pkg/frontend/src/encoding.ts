/**
 * Visual encoding tables.
 *
 * Every category, insight type, and edge kind the service can emit has
 * exactly one entry here, and lookups throw on anything unknown rather
 * than falling back to a default. A node that renders in the fallback
 * style is a bug you can see; a node that renders plausibly wrong is
 * not, so there is no fallback.
 */

import type { Category, EdgeKind, InsightType } from "./types.js";

export const CATEGORIES: readonly Category[] = ["point", "shape", "compound"];

export const INSIGHT_TYPES: readonly InsightType[] = [
  "dominance",
  "top2",
  "outlier",
  "outstanding_negative",
  "trend",
  "skewness",
  "kurtosis",
  "evenness",
  "temporal_correlation",
  "linear_correlation",
  "dependence",
];

export const EDGE_KINDS: readonly EdgeKind[] = [
  "structural_parent_child",
  "structural_sibling",
  "user_added",
];

// One hue per category. Chosen to stay distinguishable for the common
// red-green deficiencies: blue, orange, and a dark teal.
export const CATEGORY_COLORS: Record<Category, string> = {
  point: "#3c6fd1",
  shape: "#e08a2e",
  compound: "#2e8577",
};

/**
 * Glyph drawn inside a collapsed node disc.
 *
 * `path` is an SVG path in a 20x20 box centred on (10,10); `title` is
 * the tooltip label. The artwork is original; each shape is a small
 * abstract mark suggesting the statistic rather than an icon-font pick.
 */
export interface Glyph {
  path: string;
  title: string;
}

export const TYPE_GLYPHS: Record<InsightType, Glyph> = {
  // one tall bar above its peers
  dominance: {
    path: "M3 16h3v-4H3zM8.5 16h3V3h-3zM14 16h3v-6h-3z",
    title: "dominance",
  },
  // two near-equal leaders
  top2: {
    path: "M3 16h3v-9H3zM8.5 16h3V6h-3zM14 16h3v-3h-3z",
    title: "top two",
  },
  // a point far off the band
  outlier: {
    path: "M3 13h10v2H3zM15 4a2 2 0 1 1 0 4 2 2 0 0 1 0-4z",
    title: "outlier",
  },
  // bar dropping below the axis
  outstanding_negative: {
    path: "M3 9h3v-4H3zM8.5 9h3V5h-3zM14 17h3V9h-3zM2 9h16v1H2z",
    title: "outstanding negative",
  },
  // rising slope
  trend: {
    path: "M3 15L9 10l3 2 5-7 1.5 1-6 8.5-3-2-5 4z",
    title: "trend",
  },
  // lopsided hump
  skewness: {
    path: "M2 16c2-9 4-12 6-12s3 5 4 8 3 4 6 4z",
    title: "skewness",
  },
  // narrow spike over wide shoulders
  kurtosis: {
    path: "M2 16c4-1 6-2 7-9l1-4 1 4c1 7 3 8 7 9z",
    title: "kurtosis",
  },
  // level bars
  evenness: {
    path: "M3 16h3v-7H3zM8.5 16h3v-7h-3zM14 16h3v-7h-3z",
    title: "evenness",
  },
  // two phases moving together
  temporal_correlation: {
    path: "M2 8c2-4 4-4 6 0s4 4 6 0M2 14c2-4 4-4 6 0s4 4 6 0",
    title: "temporal correlation",
  },
  // points hugging a line
  linear_correlation: {
    path: "M3 16L16 4l1 1L4 17zM5 11a1.4 1.4 0 1 1 0 2.8 1.4 1.4 0 0 1 0-2.8zM11 7a1.4 1.4 0 1 1 0 2.8 1.4 1.4 0 0 1 0-2.8zM14 11a1.4 1.4 0 1 1 0 2.8 1.4 1.4 0 0 1 0-2.8z",
    title: "linear correlation",
  },
  // linked cells
  dependence: {
    path: "M3 3h6v6H3zM11 11h6v6h-6zM8 8l4 4-1 1-4-4z",
    title: "dependence",
  },
};

/**
 * Edge rendering style.
 *
 * Parent-child edges taper: thick at the parent end, thin at the
 * child, so direction reads without arrowheads. Sibling edges are a
 * uniform hairline. User-added edges are dashed.
 */
export interface EdgeStyle {
  form: "taper" | "uniform";
  /** Stroke widths in px; for taper [parentEnd, childEnd]. */
  width: [number, number];
  dash: string | null;
  title: string;
}

export const EDGE_STYLES: Record<EdgeKind, EdgeStyle> = {
  structural_parent_child: {
    form: "taper",
    width: [5, 1.2],
    dash: null,
    title: "parent-child",
  },
  structural_sibling: {
    form: "uniform",
    width: [1.2, 1.2],
    dash: null,
    title: "sibling",
  },
  user_added: {
    form: "uniform",
    width: [1.6, 1.6],
    dash: "6 4",
    title: "user added",
  },
};

/**
 * Chart form used when a node expands into a card. One form per type:
 * point types highlight a position in a bar chart, shape types show
 * the distribution outline, compound types overlay or cross the two
 * series.
 */
export type ChartForm =
  | "bar-highlight"
  | "line-marked"
  | "area-distribution"
  | "dual-line"
  | "scatter";

export const CHART_FORMS: Record<InsightType, ChartForm> = {
  dominance: "bar-highlight",
  top2: "bar-highlight",
  outlier: "bar-highlight",
  outstanding_negative: "bar-highlight",
  trend: "line-marked",
  skewness: "area-distribution",
  kurtosis: "area-distribution",
  evenness: "area-distribution",
  temporal_correlation: "dual-line",
  linear_correlation: "scatter",
  dependence: "scatter",
};

function lookup<K extends string, V>(table: Record<K, V>, key: string, what: string): V {
  if (!Object.prototype.hasOwnProperty.call(table, key)) {
    throw new Error(`unknown ${what}: ${JSON.stringify(key)}`);
  }
  return table[key as K];
}

export function categoryColor(category: string): string {
  return lookup(CATEGORY_COLORS, category, "category");
}

export function typeGlyph(itype: string): Glyph {
  return lookup(TYPE_GLYPHS, itype, "insight type");
}

export function edgeStyle(kind: string): EdgeStyle {
  return lookup(EDGE_STYLES, kind, "edge kind");
}

export function chartForm(itype: string): ChartForm {
  return lookup(CHART_FORMS, itype, "insight type");
}
