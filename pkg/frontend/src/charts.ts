/**
 * Chart specs for expanded insight cards.
 *
 * A spec is renderer-independent: which form to draw, the series to
 * plot, and what to emphasise. The view layer turns it into SVG.
 */

import { categoryColor, chartForm, type ChartForm } from "./encoding.js";
import type { InsightDetailDoc, SeriesDoc } from "./types.js";

export interface ChartSpec {
  form: ChartForm;
  color: string;
  /** axis caption, e.g. "sum(Sales) by Season" */
  caption: string;
  series: SeriesDoc[];
  /** labels of bars or points the insight singles out */
  emphasis: string[];
  /** short annotation drawn on the card, e.g. "rising r=0.98" */
  annotation: string | null;
}

function asStr(value: unknown): string | null {
  return typeof value === "string" ? value : null;
}

function asNum(value: unknown): number | null {
  return typeof value === "number" && Number.isFinite(value) ? value : null;
}

function emphasisOf(insight: InsightDetailDoc): string[] {
  const h = insight.highlight;
  const single = asStr(h["label"]);
  if (single !== null) return [single];
  const pair = h["labels"];
  if (Array.isArray(pair)) return pair.filter((l): l is string => typeof l === "string");
  return [];
}

function annotationOf(insight: InsightDetailDoc): string | null {
  const h = insight.highlight;
  switch (insight.itype) {
    case "dominance": {
      const share = asNum(h["share"]);
      return share === null ? null : `${(share * 100).toFixed(0)}% of total`;
    }
    case "top2": {
      const share = asNum(h["share"]);
      return share === null ? null : `top two hold ${(share * 100).toFixed(0)}%`;
    }
    case "outlier": {
      const z = asNum(h["z"]);
      return z === null ? null : `z = ${z.toFixed(1)}`;
    }
    case "outstanding_negative": {
      const value = asNum(h["value"]);
      return value === null ? "below zero" : `drops to ${value}`;
    }
    case "trend": {
      const r = asNum(h["r"]);
      const direction = asStr(h["direction"]) ?? "";
      return r === null ? direction : `${direction} r = ${r.toFixed(2)}`;
    }
    case "skewness": {
      const tail = asStr(h["tail"]);
      return tail === null ? null : `${tail} tail`;
    }
    case "kurtosis": {
      const g2 = asNum(h["g2"]);
      return g2 === null ? null : `excess kurtosis ${g2.toFixed(1)}`;
    }
    case "evenness": {
      const cv = asNum(h["cv"]);
      return cv === null ? null : `cv = ${cv.toFixed(2)}`;
    }
    case "temporal_correlation":
    case "linear_correlation": {
      const r = asNum(h["r"]);
      return r === null ? null : `r = ${r.toFixed(2)}`;
    }
    case "dependence": {
      const rho = asNum(h["rho"]);
      return rho === null ? null : `rho = ${rho.toFixed(2)}`;
    }
  }
}

export function buildChartSpec(insight: InsightDetailDoc): ChartSpec {
  const series: SeriesDoc[] = [];
  if (insight.series) series.push(insight.series);
  if (insight.series2) series.push(insight.series2);
  const caption = `${insight.ae.aggregate}(${insight.ae.measure}) by ${insight.ae.breakdown}`;
  return {
    form: chartForm(insight.itype),
    color: categoryColor(insight.category),
    caption,
    series,
    emphasis: emphasisOf(insight),
    annotation: annotationOf(insight),
  };
}

/** Hover payload for a single datum on a chart card. */
export function datumText(series: SeriesDoc, index: number): string {
  const label = series.labels[index] ?? `#${index}`;
  const value = series.values[index];
  return `${label}: ${value}`;
}
