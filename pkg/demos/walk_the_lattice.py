# Walk outward from the strongest insight through the subspace graph.
# Shows how the candidate pool grows as the hop budget widens.

from pathlib import Path

from insightweaver import ExtractionConfig, build_graph, enumerate_subspaces, extract_all
from insightweaver import load_schema_hints, load_table, structural_filter

here = Path(__file__).parent
table = load_table(
    (here / "console_sales.csv").read_text("utf-8"),
    load_schema_hints((here / "console_sales.hints.json").read_text("utf-8")),
)

subspaces = enumerate_subspaces(table, 3)
graph = build_graph(subspaces)
print(f"{len(subspaces)} subspaces, {len(graph.edges)} relation edges")

catalog = extract_all(table, ExtractionConfig())
focused = sorted(catalog.insights, key=lambda i: (-i.score, i.id))[0]
loc = focused.ae.subspace.locator.text() or "(whole table)"
print(f"focused: {focused.itype} at {loc}, score {focused.score:.3f}\n")

for step in range(4):
    candidates = structural_filter(catalog, graph, focused, step=step)
    locs = {ins.ae.subspace.locator.text() for ins in candidates.insights}
    print(f"step={step}: {len(candidates.insights):3d} candidate insights "
          f"across {len(locs):3d} subspaces")

# neighbors of the focused subspace, for a feel of what "one hop" means
print("\none hop from the focused subspace reaches:")
for text in graph.neighbors(focused.ae.subspace.locator.text())[:8]:
    print("  ", text or "(whole table)")
