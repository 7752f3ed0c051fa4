"""Three offline question turns against a seeded session, then the story tree.

Everything runs on the stub providers, so the output is the same on every
machine and every run.
"""
from pathlib import Path

from insightweaver import ServiceConfig, build_session, query_turn

here = Path(__file__).parent
session = build_session(
    (here / "console_sales.csv").read_text("utf-8"),
    (here / "console_sales.hints.json").read_text("utf-8"),
    ServiceConfig(),
)
print(f"session {session.session_id}: {len(session.catalog.insights)} insights, "
      f"{len(session.story.nodes)} seed nodes")

questions = [
    ("n0001", "What drives the autumn spike?"),
    ("n0002", "Is this company-specific or market-wide?"),
    ("n0003", "How do the other years compare?"),
]
for node, text in questions:
    turn = query_turn(session, node, text)
    print(f"\nQ ({node}): {text}")
    print(f"  path={turn['path']}, considered {turn['candidates_considered']} candidates")
    for child in turn["new_nodes"]:
        print(f"  + {child['node_id']} [{child['itype']}] {child['relation_text']}")
        print(f"      {child['description']}")

# crude tree dump, roots first
story = session.story
print("\nstory so far:")


def show(node_id, indent=0):
    node = story.nodes[node_id]
    desc = session.descriptions[node.insight_id]
    print("  " * indent + f"{node_id} [{desc.itype} {desc.score:.3f}] {desc.text}")
    for kid in story.children_of(node_id):
        show(kid, indent + 1)


roots = sorted(n for n in story.nodes if story.parent_of(n) is None)
for root in roots:
    show(root)
