"""
Mine every insight out of a small sales table
=============================================

Loads the bundled console-sales CSV, runs the full extractor, and prints
what it found, grouped by type. Run it from the repo root:

    python demos/mine_console_sales.py
"""
from pathlib import Path

from insightweaver import ExtractionConfig, extract_all, load_schema_hints, load_table
from insightweaver.narrator import describe

here = Path(__file__).parent
csv_text = (here / "console_sales.csv").read_text("utf-8")
hints = load_schema_hints((here / "console_sales.hints.json").read_text("utf-8"))

table = load_table(csv_text, hints)
print(f"{table.row_count} rows, {len(table.schema.columns)} columns")

catalog = extract_all(table, ExtractionConfig())
print(f"{len(catalog.insights)} insights, catalog hash {catalog.catalog_hash[:12]}…\n")

by_type = {}
for ins in catalog.insights:
    by_type.setdefault(ins.itype, []).append(ins)

for itype in sorted(by_type):
    bucket = sorted(by_type[itype], key=lambda i: -i.score)
    print(f"-- {itype} ({len(bucket)}) --")
    for ins in bucket[:3]:  # three per type is plenty for a terminal
        print(f"   [{ins.score:.3f}] {describe(ins, table.schema).text}")
    print()
