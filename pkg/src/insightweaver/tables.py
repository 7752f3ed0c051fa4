"""Tabular data model: schemas, subspaces, analysis entities, aggregation.

A table is a flat relation of categorical dimensions and numerical measures.
A locator is a conjunction of dimension=value filters; applying one to a
table yields a subspace (the matching row set). Analysis entities bind a
subspace to a breakdown dimension, a measure, and an aggregate, and
aggregating one produces the series the insight detectors consume.
"""
from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field

__all__ = [
    "IngestError",
    "LocatorError",
    "ColumnSpec",
    "Schema",
    "Table",
    "Locator",
    "Subspace",
    "AnalysisEntity",
    "Series",
    "AGGREGATES",
    "load_table",
    "load_schema_hints",
    "locator_length",
    "apply_locator",
    "enumerate_subspaces",
    "enumerate_analysis_entities",
    "aggregate",
]

AGGREGATES = ("sum", "mean", "min", "max", "count")

_NUMERIC_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class IngestError(ValueError):
    """Raised when a CSV source or schema hint cannot produce a valid table."""


class LocatorError(ValueError):
    """Raised when a locator references an unknown or non-categorical dimension."""


@dataclass(frozen=True)
class ColumnSpec:
    """One column: a categorical dimension or a numerical measure.

    ordinal_order fixes the label order of a categorical column explicitly.
    A column declared ordinal without an explicit list sorts its distinct
    values numerically (Year-like numerals).
    """

    name: str
    kind: str  # "categorical" | "numerical"
    ordinal_order: tuple[str, ...] | None = None
    ordinal: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("categorical", "numerical"):
            raise IngestError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.ordinal_order is not None and self.kind != "categorical":
            raise IngestError(f"column {self.name!r}: ordinal_order requires a categorical column")

    @property
    def is_ordinal(self) -> bool:
        return self.ordinal or self.ordinal_order is not None


@dataclass(frozen=True)
class Schema:
    """Ordered column specs; at least one dimension and one measure."""

    columns: tuple[ColumnSpec, ...]

    def __post_init__(self) -> None:
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise IngestError("duplicate column names in schema")
        if not any(c.kind == "categorical" for c in self.columns):
            raise IngestError("schema needs at least one categorical column")
        if not any(c.kind == "numerical" for c in self.columns):
            raise IngestError("schema needs at least one numerical column")

    def __getitem__(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def index_of(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise KeyError(name)

    @property
    def categorical(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns if c.kind == "categorical")

    @property
    def numerical(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns if c.kind == "numerical")


@dataclass(frozen=True)
class Table:
    """Immutable parsed table.

    Categorical cells stay strings; numerical cells are finite floats.
    dropped_rows counts source rows discarded for empty measure cells.
    label_orders maps each categorical column to its canonical label
    order over the distinct values actually present.
    """

    schema: Schema
    rows: tuple[tuple, ...]
    dropped_rows: int = 0
    label_orders: dict[str, tuple[str, ...]] = field(default_factory=dict, compare=False)

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def column_values(self, name: str, row_index=None):
        """Distinct values of a categorical column, in canonical label order."""
        order = self.label_orders[name]
        if row_index is None:
            return order
        idx = self.schema.index_of(name)
        present = {self.rows[i][idx] for i in row_index}
        return tuple(v for v in order if v in present)


def _looks_numeric(cell: str) -> bool:
    return bool(_NUMERIC_RE.match(cell.strip()))


def _canonical_label_order(spec: ColumnSpec, values: set[str]) -> tuple[str, ...]:
    if spec.ordinal_order is not None:
        declared = set(spec.ordinal_order)
        if len(declared) != len(spec.ordinal_order):
            raise IngestError(f"column {spec.name!r}: ordinal_order repeats a value")
        missing = sorted(values - declared)
        if missing:
            raise IngestError(
                f"column {spec.name!r}: ordinal_order does not cover the data "
                f"(missing {missing})"
            )
        return tuple(v for v in spec.ordinal_order if v in values)
    if spec.ordinal:
        try:
            return tuple(sorted(values, key=lambda v: (float(v), v)))
        except ValueError:
            bad = next(v for v in sorted(values) if not _looks_numeric(v))
            raise IngestError(
                f"column {spec.name!r}: declared ordinal without an order but "
                f"value {bad!r} is not numeric"
            ) from None
    return tuple(sorted(values))


def load_schema_hints(text: str) -> dict[str, ColumnSpec]:
    """Parse a schema-hints JSON document into per-column specs.

    Expected shape: {"columns": [{"name": ..., "kind": ...,
    "ordinal_order": [...], "ordinal": bool}, ...]}; every field but
    name/kind is optional.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"schema hints are not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("columns"), list):
        raise IngestError('schema hints must be an object with a "columns" list')
    hints: dict[str, ColumnSpec] = {}
    for entry in doc["columns"]:
        if not isinstance(entry, dict) or "name" not in entry or "kind" not in entry:
            raise IngestError(f"schema hint entry needs name and kind: {entry!r}")
        order = entry.get("ordinal_order")
        hints[entry["name"]] = ColumnSpec(
            name=entry["name"],
            kind=entry["kind"],
            ordinal_order=tuple(str(v) for v in order) if order is not None else None,
            ordinal=bool(entry.get("ordinal", False)),
        )
    return hints


def load_table(source: str, schema_hints: dict[str, ColumnSpec] | None = None) -> Table:
    """Parse CSV text (RFC 4180, header row required) into a Table.

    Column kinds come from schema_hints when given, otherwise a column is
    numerical when every non-empty cell parses as a finite number (and at
    least one cell is non-empty). Rows with an empty cell in a numerical
    column are dropped and counted; a non-empty unparseable cell in a
    numerical column is an ingest error.
    """
    hints = schema_hints or {}
    reader = csv.reader(io.StringIO(source))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty CSV: no header row") from None
    header = [h.strip() for h in header]
    if any(not h for h in header):
        raise IngestError("blank column name in header")

    raw_rows: list[list[str]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue  # skip blank lines, RFC 4180 trailing newline included
        if len(row) != len(header):
            raise IngestError(
                f"row {lineno}: expected {len(header)} cells, got {len(row)}"
            )
        raw_rows.append([c.strip() for c in row])
    if not raw_rows:
        raise IngestError("CSV has a header but no data rows")

    for name in hints:
        if name not in header:
            raise IngestError(f"schema hint names unknown column {name!r}")

    specs: list[ColumnSpec] = []
    for j, name in enumerate(header):
        if name in hints:
            spec = hints[name]
        else:
            cells = [r[j] for r in raw_rows if r[j] != ""]
            numeric = bool(cells) and all(_looks_numeric(c) for c in cells)
            spec = ColumnSpec(name=name, kind="numerical" if numeric else "categorical")
        specs.append(spec)
    schema = Schema(columns=tuple(specs))

    num_idx = [j for j, s in enumerate(specs) if s.kind == "numerical"]
    rows: list[tuple] = []
    dropped = 0
    for lineno, raw in zip(range(2, 2 + len(raw_rows)), raw_rows):
        if any(raw[j] == "" for j in num_idx):
            dropped += 1
            continue
        parsed = list(raw)
        for j in num_idx:
            cell = raw[j]
            try:
                value = float(cell)
            except ValueError:
                value = float("nan")
            if value != value or value in (float("inf"), float("-inf")):
                raise IngestError(
                    f"row {lineno}, column {header[j]!r}: cannot parse {cell!r} as a finite number"
                )
            parsed[j] = value
        rows.append(tuple(parsed))
    if not rows:
        raise IngestError("every data row was dropped for empty measure cells")

    label_orders: dict[str, tuple[str, ...]] = {}
    for j, spec in enumerate(specs):
        if spec.kind == "categorical":
            label_orders[spec.name] = _canonical_label_order(spec, {r[j] for r in rows})

    return Table(schema=schema, rows=tuple(rows), dropped_rows=dropped, label_orders=label_orders)


@dataclass(frozen=True)
class Locator:
    """Conjunction of dimension=value filters, canonically ordered by dimension."""

    filters: tuple[tuple[str, str], ...]

    def __init__(self, filters=()):
        pairs = tuple(sorted(dict(filters).items()))
        object.__setattr__(self, "filters", pairs)

    @property
    def dims(self) -> tuple[str, ...]:
        return tuple(d for d, _ in self.filters)

    def get(self, dim: str) -> str | None:
        for d, v in self.filters:
            if d == dim:
                return v
        return None

    def extend(self, dim: str, value: str) -> "Locator":
        return Locator(self.filters + ((dim, value),))

    def text(self) -> str:
        return "&".join(f"{d}={v}" for d, v in self.filters)

    def __len__(self) -> int:
        return len(self.filters)


def locator_length(loc: Locator) -> int:
    """Number of filter conditions in the locator."""
    return len(loc)


@dataclass(frozen=True)
class Subspace:
    """A locator together with the rows it matched. Never empty."""

    locator: Locator
    row_index: frozenset[int]

    def __post_init__(self) -> None:
        if not self.row_index:
            raise ValueError("empty subspaces are not materialized")


def apply_locator(table: Table, loc: Locator) -> Subspace | None:
    """Filter the table down to the locator's subspace.

    Returns None (the empty-subspace signal) when the filters match no
    rows; raises LocatorError when a filter names an unknown or
    non-categorical dimension.
    """
    for dim, _ in loc.filters:
        if dim not in table.schema:
            raise LocatorError(f"unknown dimension {dim!r}")
        if table.schema[dim].kind != "categorical":
            raise LocatorError(f"dimension {dim!r} is not categorical")
    idx = [(table.schema.index_of(d), v) for d, v in loc.filters]
    matched = frozenset(
        i for i, row in enumerate(table.rows) if all(row[j] == v for j, v in idx)
    )
    if not matched:
        return None
    return Subspace(locator=loc, row_index=matched)


def enumerate_subspaces(table: Table, max_length: int = 3) -> list[Subspace]:
    """Every non-empty subspace with locator length <= max_length, root included.

    Deterministic: sorted lexicographically by the (dimension, value) filter
    tuples, so the root comes first and prefixes precede their extensions.
    Built from the rows themselves, which guarantees non-emptiness without
    scanning the full value cross-product.
    """
    from itertools import combinations

    dims = table.schema.categorical
    dim_idx = {d: table.schema.index_of(d) for d in dims}
    found: dict[tuple[tuple[str, str], ...], set[int]] = {(): set(range(table.row_count))}
    for i, row in enumerate(table.rows):
        for k in range(1, max_length + 1):
            if k > len(dims):
                break
            for combo in combinations(dims, k):
                key = tuple(sorted((d, row[dim_idx[d]]) for d in combo))
                found.setdefault(key, set()).add(i)
    return [
        Subspace(locator=Locator(key), row_index=frozenset(rows))
        for key, rows in sorted(found.items())
    ]


@dataclass(frozen=True)
class AnalysisEntity:
    """Subspace x breakdown dimension x measure x aggregate."""

    subspace: Subspace
    breakdown: str
    measure: str
    aggregate: str

    def __post_init__(self) -> None:
        if self.aggregate not in AGGREGATES:
            raise ValueError(f"unknown aggregate {self.aggregate!r}")
        if self.breakdown in self.subspace.locator.dims:
            raise ValueError(f"breakdown {self.breakdown!r} is filtered by the locator")


def enumerate_analysis_entities(
    sub: Subspace,
    schema: Schema,
    measures=None,
    aggregates=("sum",),
) -> list[AnalysisEntity]:
    """One entity per unfiltered categorical dimension x measure x aggregate."""
    measures = tuple(measures) if measures is not None else schema.numerical
    for m in measures:
        if m not in schema or schema[m].kind != "numerical":
            raise ValueError(f"measure {m!r} is not a numerical column")
    filtered = set(sub.locator.dims)
    breakdowns = [d for d in schema.categorical if d not in filtered]
    return [
        AnalysisEntity(subspace=sub, breakdown=b, measure=m, aggregate=a)
        for b in sorted(breakdowns)
        for m in measures
        for a in aggregates
    ]


@dataclass(frozen=True)
class Series:
    """Aligned labels and values produced by aggregating one entity."""

    labels: tuple[str, ...]
    values: tuple[float, ...]
    ordinal: bool

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.values):
            raise ValueError("labels and values must align")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels in series")
        for v in self.values:
            if v != v or v in (float("inf"), float("-inf")):
                raise ValueError("series values must be finite")

    def __len__(self) -> int:
        return len(self.labels)


def aggregate(ae: AnalysisEntity, table: Table) -> Series:
    """Group the entity's subspace by its breakdown and aggregate the measure.

    Labels follow the breakdown column's canonical order (ordinal order when
    declared, lexicographic otherwise) restricted to values present in the
    subspace.
    """
    b_idx = table.schema.index_of(ae.breakdown)
    m_idx = table.schema.index_of(ae.measure)
    groups: dict[str, list[float]] = {}
    for i in sorted(ae.subspace.row_index):
        row = table.rows[i]
        groups.setdefault(row[b_idx], []).append(row[m_idx])
    labels = tuple(v for v in table.label_orders[ae.breakdown] if v in groups)
    agg = ae.aggregate
    values = []
    for lab in labels:
        xs = groups[lab]
        if agg == "sum":
            values.append(float(sum(xs)))
        elif agg == "mean":
            values.append(float(sum(xs) / len(xs)))
        elif agg == "min":
            values.append(float(min(xs)))
        elif agg == "max":
            values.append(float(max(xs)))
        else:
            values.append(float(len(xs)))
    return Series(labels=labels, values=tuple(values), ordinal=table.schema[ae.breakdown].is_ordinal)
