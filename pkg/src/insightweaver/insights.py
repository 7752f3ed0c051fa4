"""Insight detectors and whole-table extraction.

Eleven insight types in three categories. Point types read a single
aggregated series for standout values, shape types read its distribution,
and compound types compare two sub-series obtained by splitting the same
entity along one further dimension. Every emitted insight carries a score
in [0, 1] that never falls below its type's firing threshold (with default
config; impact weighting deliberately trades that bound for cross-subspace
comparability).
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .tables import (
    AnalysisEntity,
    Series,
    Subspace,
    Table,
    aggregate,
    enumerate_analysis_entities,
    enumerate_subspaces,
)

__all__ = [
    "POINT_TYPES",
    "SHAPE_TYPES",
    "COMPOUND_TYPES",
    "CATEGORY_OF",
    "ExtractionConfig",
    "Finding",
    "Insight",
    "SeriesPair",
    "InsightCatalog",
    "detect_point_insights",
    "detect_shape_insights",
    "detect_compound_insights",
    "extract_all",
    "export_catalog",
    "insight_id",
]

logger = logging.getLogger(__name__)

CATALOG_SCHEMA = "iw-catalog/1"

POINT_TYPES = ("dominance", "top2", "outlier", "outstanding_negative")
SHAPE_TYPES = ("trend", "skewness", "kurtosis", "evenness")
COMPOUND_TYPES = ("temporal_correlation", "linear_correlation", "dependence")

CATEGORY_OF = {t: "point" for t in POINT_TYPES}
CATEGORY_OF.update({t: "shape" for t in SHAPE_TYPES})
CATEGORY_OF.update({t: "compound" for t in COMPOUND_TYPES})

# MAD-to-sigma consistency constant for normally distributed data.
_MAD_SCALE = 1.4826


@dataclass(frozen=True)
class ExtractionConfig:
    """Extraction knobs. Thresholds are in each criterion's natural unit.

    score_threshold() maps them into score space so admission and the
    soundness checks can compare like with like.
    """

    max_locator_length: int = 3
    aggregates: tuple[str, ...] = ("sum",)
    measures: tuple[str, ...] | None = None
    dominance_share: float = 0.5
    top2_share: float = 0.7
    outlier_z: float = 3.0
    trend_abs_r: float = 0.7
    skewness_g1: float = 1.0
    kurtosis_g2: float = 1.0
    evenness_cv: float = 0.1
    correlation_abs_r: float = 0.7
    dependence_abs_rho: float = 0.8
    min_point_length: int = 3
    min_trend_length: int = 3
    min_distribution_length: int = 4
    min_compound_length: int = 4
    compound_all_pairs: bool = False
    impact_weighting: bool = False

    def score_threshold(self, itype: str) -> float:
        """Lower bound, in score space, of what a given type can emit."""
        table = {
            "dominance": self.dominance_share,
            "top2": self.top2_share,
            "outlier": min(1.0, self.outlier_z / 6.0),
            "outstanding_negative": min(1.0, self.outlier_z / 6.0),
            "trend": self.trend_abs_r**2,
            "skewness": min(1.0, self.skewness_g1 / 3.0),
            "kurtosis": min(1.0, self.kurtosis_g2 / 5.0),
            "evenness": 0.0,
            "temporal_correlation": self.correlation_abs_r,
            "linear_correlation": self.correlation_abs_r,
            "dependence": self.dependence_abs_rho,
        }
        return table[itype]


@dataclass(frozen=True)
class Finding:
    """A detector hit not yet bound to its analysis entity."""

    itype: str
    score: float
    highlight: dict

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score out of range: {self.score}")


@dataclass(frozen=True)
class SeriesPair:
    """Two sub-series of one entity, split along an extra dimension."""

    split_dimension: str
    left_key: str
    right_key: str
    left: Series
    right: Series

    def __post_init__(self) -> None:
        if self.left.labels != self.right.labels:
            raise ValueError("paired series must share labels and order")


@dataclass(frozen=True)
class Insight:
    id: str
    ae: AnalysisEntity
    category: str
    itype: str
    score: float
    highlight: dict
    series: Series
    series2: Series | None = None


def insight_id(
    locator_text: str,
    breakdown: str,
    measure: str,
    agg: str,
    itype: str,
    highlight_key: str,
) -> str:
    """Stable content hash; equal analytical facts always collide."""
    payload = "\x1f".join([locator_text, breakdown, measure, agg, itype, highlight_key])
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def highlight_key(itype: str, highlight: dict) -> str:
    """The discrete identity-bearing part of a highlight."""
    if itype in ("dominance", "outlier", "outstanding_negative"):
        return f"label:{highlight['label']}"
    if itype == "top2":
        return "labels:" + ",".join(highlight["labels"])
    if itype == "trend":
        return f"direction:{highlight['direction']}"
    if itype == "skewness":
        return f"tail:{highlight['tail']}"
    if itype in COMPOUND_TYPES:
        return (
            f"split:{highlight['split_dimension']}:"
            f"{highlight['left']}|{highlight['right']}"
        )
    return ""


def _finite(x: float) -> float | None:
    return round(float(x), 12) if math.isfinite(x) else None


def _robust_z(values: np.ndarray) -> np.ndarray:
    """Signed robust z-scores; leave-one-out mean/std fallback when MAD is 0.

    A point deviating from an otherwise zero-variance rest gets an unbounded
    z, so constant-except-one series always flag their odd point.
    """
    med = float(np.median(values))
    mad = float(np.median(np.abs(values - med)))
    if mad > 0.0:
        return (values - med) / (_MAD_SCALE * mad)
    n = len(values)
    z = np.zeros(n)
    for i in range(n):
        rest = np.delete(values, i)
        mu = float(rest.mean())
        sd = float(rest.std())
        d = float(values[i]) - mu
        if sd > 0.0:
            z[i] = d / sd
        elif d != 0.0:
            z[i] = math.inf if d > 0 else -math.inf
    return z


def detect_point_insights(series: Series, cfg: ExtractionConfig) -> list[Finding]:
    """Dominance, top2, outlier and outstanding_negative over one series."""
    if len(series) < cfg.min_point_length:
        return []
    values = np.asarray(series.values, dtype=float)
    findings: list[Finding] = []

    # Share-based types work on magnitudes when any value is negative.
    absolute = bool(np.any(values < 0))
    basis = np.abs(values) if absolute else values
    total = float(basis.sum())
    dominance_fired = False
    if total > 0.0:
        i_max = int(np.argmax(basis))
        share = float(basis[i_max] / total)
        if share >= cfg.dominance_share:
            dominance_fired = True
            findings.append(
                Finding(
                    itype="dominance",
                    score=min(1.0, share),
                    highlight={
                        "label": series.labels[i_max],
                        "share": round(share, 12),
                        "absolute": absolute,
                    },
                )
            )
        if not dominance_fired and len(basis) >= 2:
            order = sorted(range(len(basis)), key=lambda i: (-basis[i], i))
            i1, i2 = order[0], order[1]
            share2 = float((basis[i1] + basis[i2]) / total)
            if share2 >= cfg.top2_share:
                findings.append(
                    Finding(
                        itype="top2",
                        score=min(1.0, share2),
                        highlight={
                            "labels": [series.labels[i1], series.labels[i2]],
                            "share": round(share2, 12),
                            "absolute": absolute,
                        },
                    )
                )

    z = _robust_z(values)

    pos = [i for i in range(len(z)) if z[i] >= cfg.outlier_z]
    if pos:
        i_out = max(pos, key=lambda i: (z[i], -i))
        findings.append(
            Finding(
                itype="outlier",
                score=min(1.0, float(z[i_out]) / 6.0),
                highlight={
                    "label": series.labels[i_out],
                    "index": i_out,
                    "value": float(values[i_out]),
                    "z": _finite(z[i_out]),
                },
            )
        )

    i_min = int(np.argmin(values))
    lone_negative = bool(
        values[i_min] < 0 and np.all(np.delete(values, i_min) >= 0)
    )
    z_fired = bool(z[i_min] <= -cfg.outlier_z)
    if lone_negative or z_fired:
        floor = min(1.0, cfg.outlier_z / 6.0)
        score = min(1.0, abs(float(z[i_min])) / 6.0) if z_fired else floor
        findings.append(
            Finding(
                itype="outstanding_negative",
                score=max(score, floor if lone_negative else 0.0),
                highlight={
                    "label": series.labels[i_min],
                    "index": i_min,
                    "value": float(values[i_min]),
                    "z": _finite(z[i_min]),
                    "rule": "z" if z_fired else "sign",
                },
            )
        )
    return findings


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xd = x - x.mean()
    yd = y - y.mean()
    denom = math.sqrt(float((xd * xd).sum()) * float((yd * yd).sum()))
    if denom == 0.0:
        return 0.0
    r = float((xd * yd).sum()) / denom
    return max(-1.0, min(1.0, r))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def detect_shape_insights(series: Series, cfg: ExtractionConfig) -> list[Finding]:
    """Trend, skewness, kurtosis and evenness over one series.

    Zero-variance series yield only evenness (score 1.0); a zero mean makes
    the coefficient of variation undefined, so evenness is skipped there.
    """
    findings: list[Finding] = []
    n = len(series)
    values = np.asarray(series.values, dtype=float)
    mu = float(values.mean()) if n else 0.0
    sigma = float(values.std()) if n else 0.0

    if n >= cfg.min_distribution_length and mu != 0.0:
        cv = sigma / abs(mu)
        if cv <= cfg.evenness_cv:
            findings.append(
                Finding(
                    itype="evenness",
                    score=max(0.0, 1.0 - cv / cfg.evenness_cv),
                    highlight={"cv": round(cv, 12)},
                )
            )
    if sigma == 0.0:
        return findings

    if series.ordinal and n >= cfg.min_trend_length:
        r = _pearson(np.arange(n, dtype=float), values)
        if abs(r) >= cfg.trend_abs_r:
            findings.append(
                Finding(
                    itype="trend",
                    score=min(1.0, r * r),
                    highlight={
                        "direction": "rising" if r > 0 else "falling",
                        "r": round(r, 12),
                    },
                )
            )

    if n >= cfg.min_distribution_length:
        dev = values - mu
        m2 = float((dev**2).mean())
        m3 = float((dev**3).mean())
        m4 = float((dev**4).mean())
        g1 = m3 / m2**1.5
        if abs(g1) >= cfg.skewness_g1:
            findings.append(
                Finding(
                    itype="skewness",
                    score=min(1.0, abs(g1) / 3.0),
                    highlight={"g1": round(g1, 12), "tail": "high" if g1 > 0 else "low"},
                )
            )
        g2 = m4 / m2**2 - 3.0
        if g2 >= cfg.kurtosis_g2:
            findings.append(
                Finding(
                    itype="kurtosis",
                    score=min(1.0, g2 / 5.0),
                    highlight={"g2": round(g2, 12)},
                )
            )
    return findings


def detect_compound_insights(pair: SeriesPair, cfg: ExtractionConfig) -> list[Finding]:
    """Correlation or monotone dependence between two aligned sub-series.

    The Pearson-based type (temporal over ordinal breakdowns, linear
    otherwise) has priority; Spearman dependence only fires when it did
    not. Either side having zero variance skips the pair.
    """
    if len(pair.left) < cfg.min_compound_length:
        return []
    a = np.asarray(pair.left.values, dtype=float)
    b = np.asarray(pair.right.values, dtype=float)
    if float(a.std()) == 0.0 or float(b.std()) == 0.0:
        return []
    base = {
        "split_dimension": pair.split_dimension,
        "left": pair.left_key,
        "right": pair.right_key,
    }
    r = _pearson(a, b)
    itype = "temporal_correlation" if pair.left.ordinal else "linear_correlation"
    if abs(r) >= cfg.correlation_abs_r:
        return [
            Finding(
                itype=itype,
                score=abs(r),
                highlight={
                    **base,
                    "r": round(r, 12),
                    "direction": "positive" if r >= 0 else "negative",
                },
            )
        ]
    rho = _pearson(_average_ranks(a), _average_ranks(b))
    if abs(rho) >= cfg.dependence_abs_rho:
        return [
            Finding(
                itype="dependence",
                score=abs(rho),
                highlight={
                    **base,
                    "rho": round(rho, 12),
                    "direction": "positive" if rho >= 0 else "negative",
                },
            )
        ]
    return []


@dataclass
class InsightCatalog:
    """Every insight extracted from one table, with lookup indexes."""

    insights: tuple[Insight, ...]
    config: ExtractionConfig
    diagnostics: dict = field(default_factory=dict)
    by_id: dict = field(init=False, repr=False)
    by_locator: dict = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.by_id = {ins.id: ins for ins in self.insights}
        self.by_locator = {}
        for ins in self.insights:
            self.by_locator.setdefault(ins.ae.subspace.locator.text(), []).append(ins)

    def of_type(self, itype: str) -> list[Insight]:
        return [ins for ins in self.insights if ins.itype == itype]

    @property
    def catalog_hash(self) -> str:
        return hashlib.sha256(export_catalog(self).encode("utf-8")).hexdigest()


def _sub_series(
    table: Table,
    ae: AnalysisEntity,
    split_idx: int,
    split_value: str,
    labels: tuple[str, ...],
) -> Series | None:
    rows = [i for i in sorted(ae.subspace.row_index) if table.rows[i][split_idx] == split_value]
    if not rows:
        return None
    sub = Subspace(locator=ae.subspace.locator, row_index=frozenset(rows))
    restricted = replace(ae, subspace=sub)
    s = aggregate(restricted, table)
    keep = [k for k, lab in enumerate(s.labels) if lab in set(labels)]
    return Series(
        labels=tuple(s.labels[k] for k in keep),
        values=tuple(s.values[k] for k in keep),
        ordinal=s.ordinal,
    )


def _compound_pairs(
    table: Table, ae: AnalysisEntity, cfg: ExtractionConfig, diag: dict
) -> list[SeriesPair]:
    filtered = set(ae.subspace.locator.dims) | {ae.breakdown}
    eligible = [
        d
        for d in sorted(table.schema.categorical)
        if d not in filtered
        and len(table.column_values(d, ae.subspace.row_index)) >= 2
    ]
    if not eligible:
        return []
    split_dims = eligible if cfg.compound_all_pairs else eligible[:1]
    pairs: list[SeriesPair] = []
    for d in split_dims:
        d_idx = table.schema.index_of(d)
        candidates = []
        for w in table.column_values(d, ae.subspace.row_index):
            s = _sub_series(table, ae, d_idx, w, table.label_orders[ae.breakdown])
            if s is not None and len(s) > 0:
                candidates.append((w, s))
        candidates.sort(key=lambda ws: (-sum(abs(v) for v in ws[1].values), ws[0]))
        if len(candidates) < 2:
            diag["compound_too_few_subseries"] = diag.get("compound_too_few_subseries", 0) + 1
            continue
        (w1, s1), (w2, s2) = candidates[0], candidates[1]
        common = [lab for lab in table.label_orders[ae.breakdown] if lab in set(s1.labels) and lab in set(s2.labels)]
        if len(common) < cfg.min_compound_length:
            diag["compound_short_alignment"] = diag.get("compound_short_alignment", 0) + 1
            continue
        left = _align(s1, common)
        right = _align(s2, common)
        pairs.append(
            SeriesPair(split_dimension=d, left_key=w1, right_key=w2, left=left, right=right)
        )
    return pairs


def _align(s: Series, labels: list[str]) -> Series:
    pos = {lab: k for k, lab in enumerate(s.labels)}
    return Series(
        labels=tuple(labels),
        values=tuple(s.values[pos[lab]] for lab in labels),
        ordinal=s.ordinal,
    )


def _impact_weight(table: Table, ae: AnalysisEntity) -> float:
    m_idx = table.schema.index_of(ae.measure)
    total = sum(abs(r[m_idx]) for r in table.rows)
    if total == 0.0:
        return 0.0
    part = sum(abs(table.rows[i][m_idx]) for i in ae.subspace.row_index)
    return part / total


def extract_all(table: Table, cfg: ExtractionConfig | None = None) -> InsightCatalog:
    """Scan every subspace x entity, run all detectors, build the catalog.

    Per-entity failures degrade to counted skips rather than aborting the
    scan. Insights are sorted by id; ids hash the analytical identity
    (locator, breakdown, measure, aggregate, type, highlight key) so equal
    facts from repeated runs coincide.
    """
    cfg = cfg or ExtractionConfig()
    diag: dict = {"entities_scanned": 0, "entities_failed": 0}
    insights: list[Insight] = []
    for sub in enumerate_subspaces(table, cfg.max_locator_length):
        for ae in enumerate_analysis_entities(sub, table.schema, cfg.measures, cfg.aggregates):
            diag["entities_scanned"] += 1
            try:
                series = aggregate(ae, table)
                found: list[tuple[Finding, Series, Series | None]] = []
                for f in detect_point_insights(series, cfg):
                    found.append((f, series, None))
                for f in detect_shape_insights(series, cfg):
                    found.append((f, series, None))
                for pair in _compound_pairs(table, ae, cfg, diag):
                    for f in detect_compound_insights(pair, cfg):
                        found.append((f, pair.left, pair.right))
            except Exception:
                diag["entities_failed"] += 1
                logger.exception(
                    "entity skipped: %s x %s", sub.locator.text(), ae.breakdown
                )
                continue
            w = _impact_weight(table, ae) if cfg.impact_weighting else 1.0
            for f, s1, s2 in found:
                insights.append(
                    Insight(
                        id=insight_id(
                            sub.locator.text(),
                            ae.breakdown,
                            ae.measure,
                            ae.aggregate,
                            f.itype,
                            highlight_key(f.itype, f.highlight),
                        ),
                        ae=ae,
                        category=CATEGORY_OF[f.itype],
                        itype=f.itype,
                        score=f.score * w,
                        highlight=f.highlight,
                        series=s1,
                        series2=s2,
                    )
                )
    insights.sort(key=lambda ins: ins.id)
    return InsightCatalog(insights=tuple(insights), config=cfg, diagnostics=diag)


def _series_doc(s: Series | None):
    if s is None:
        return None
    return {"labels": list(s.labels), "values": list(s.values), "ordinal": s.ordinal}


def insight_doc(ins: Insight) -> dict:
    return {
        "schema": CATALOG_SCHEMA,
        "id": ins.id,
        "category": ins.category,
        "itype": ins.itype,
        "score": ins.score,
        "highlight": ins.highlight,
        "ae": {
            "locator": dict(ins.ae.subspace.locator.filters),
            "breakdown": ins.ae.breakdown,
            "measure": ins.ae.measure,
            "aggregate": ins.ae.aggregate,
        },
        "series": _series_doc(ins.series),
        "series2": _series_doc(ins.series2),
    }


def export_catalog(catalog: InsightCatalog) -> str:
    """Catalog as JSON lines, one insight per line, id-sorted, canonical keys."""
    lines = [
        json.dumps(insight_doc(ins), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        for ins in catalog.insights
    ]
    return "\n".join(lines) + ("\n" if lines else "")
