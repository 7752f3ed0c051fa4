"""Render insights into compact natural-language descriptions.

Each description is a 4-tuple: a header listing the locator's filter
values (in schema column order), the insight type, the score shown to
three decimals, and one sentence naming the breakdown dimension and the
highlighted value(s). Sentences come from fixed per-type templates shipped
as a versioned resource file.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .insights import Insight, InsightCatalog
from .tables import Schema

__all__ = [
    "TemplateError",
    "InsightDescription",
    "load_templates",
    "describe",
    "describe_catalog",
    "export_descriptions",
]

TEMPLATE_SCHEMA = "iw-templates/1"

_AGG_WORDS = {
    "sum": "total",
    "mean": "average",
    "min": "minimum",
    "max": "maximum",
    "count": "count of",
}


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class InsightDescription:
    insight_id: str
    header: tuple[str, ...]
    itype: str
    score: float  # rounded to 3 decimals for display parity
    text: str

    def doc(self) -> dict:
        return {
            "insight_id": self.insight_id,
            "header": list(self.header),
            "itype": self.itype,
            "score": self.score,
            "text": self.text,
        }


_template_cache: dict[str, str] | None = None


def load_templates() -> dict[str, str]:
    """Sentence templates keyed by insight type, validated against the tag."""
    global _template_cache
    if _template_cache is None:
        raw = resources.files("insightweaver.resources").joinpath("templates_v1.json").read_text("utf-8")
        doc = json.loads(raw)
        if doc.get("version") != TEMPLATE_SCHEMA:
            raise TemplateError(f"unsupported template version {doc.get('version')!r}")
        templates = doc.get("templates", {})
        from .insights import CATEGORY_OF

        missing = sorted(set(CATEGORY_OF) - set(templates))
        if missing:
            raise TemplateError(f"templates missing for {missing}")
        _template_cache = {k: str(v) for k, v in templates.items()}
    return _template_cache


def _fmt(x: float) -> str:
    """Three significant digits; integral values lose the trailing .0."""
    s = format(float(x), ".3g")
    return s[:-2] if s.endswith(".0") else s


def _plural(word: str) -> str:
    w = word.lower()
    if w.endswith("y") and len(w) > 1 and w[-2] not in "aeiou":
        return w[:-1] + "ies"
    if w.endswith(("s", "x", "z", "ch", "sh")):
        return w + "es"
    return w + "s"


def _scope(ins: Insight, schema: Schema) -> str:
    filters = dict(ins.ae.subspace.locator.filters)
    ordered = [filters[c.name] for c in schema.columns if c.name in filters]
    return ", ".join(ordered) if ordered else "the whole table"


def _slots(ins: Insight, schema: Schema) -> dict[str, str]:
    h = ins.highlight
    slots = {
        "scope": _scope(ins, schema),
        "agg": _AGG_WORDS[ins.ae.aggregate],
        "measure": ins.ae.measure,
        "breakdown_plural": _plural(ins.ae.breakdown),
    }
    if ins.itype in ("dominance", "outlier", "outstanding_negative"):
        slots["label"] = h["label"]
    if ins.itype in ("outlier", "outstanding_negative"):
        slots["value"] = _fmt(h["value"])
    if ins.itype == "top2":
        slots["label1"], slots["label2"] = h["labels"]
        slots["share"] = _fmt(h["share"])
    if ins.itype == "trend":
        slots["direction"] = h["direction"]
    if ins.itype == "skewness":
        slots["tail"] = h["tail"]
    if ins.itype in ("temporal_correlation", "linear_correlation", "dependence"):
        slots["left"] = h["left"]
        slots["right"] = h["right"]
        positive = h["direction"] == "positive"
        if ins.itype == "temporal_correlation":
            slots["pattern"] = "similar" if positive else "opposite"
        elif ins.itype == "linear_correlation":
            slots["pattern"] = "positively" if positive else "negatively"
        else:
            slots["pattern"] = "rise and fall together" if positive else "move in opposite directions"
    return slots


def describe(ins: Insight, schema: Schema) -> InsightDescription:
    """One insight -> (header, type, score, sentence)."""
    template = load_templates()[ins.itype]
    text = template.format(**_slots(ins, schema))
    filters = dict(ins.ae.subspace.locator.filters)
    header = tuple(filters[c.name] for c in schema.columns if c.name in filters)
    return InsightDescription(
        insight_id=ins.id,
        header=header,
        itype=ins.itype,
        score=round(ins.score, 3),
        text=text,
    )


def describe_catalog(catalog: InsightCatalog, schema: Schema) -> dict[str, InsightDescription]:
    return {ins.id: describe(ins, schema) for ins in catalog.insights}


def export_descriptions(catalog: InsightCatalog, schema: Schema) -> str:
    """Description records as JSON lines, id-sorted like the catalog export."""
    lines = [
        json.dumps(describe(ins, schema).doc(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        for ins in catalog.insights
    ]
    return "\n".join(lines) + ("\n" if lines else "")
