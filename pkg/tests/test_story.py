import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from insightweaver.insights import ExtractionConfig, extract_all
from insightweaver.reasoner import Recommendation
from insightweaver.story import (
    Story,
    StoryError,
    StoryNode,
    add_recommendations,
    delete_node,
    export_story,
    history_path,
    import_story,
    move_node,
    new_story,
    seed_first_layer,
    set_state,
    user_add_node,
)
from insightweaver.tables import load_schema_hints, load_table

from fixtures import console_csv, console_hints_json


@pytest.fixture(scope="module")
def catalog():
    table = load_table(console_csv(), load_schema_hints(console_hints_json()))
    return extract_all(table, ExtractionConfig())


@pytest.fixture()
def story(catalog):
    return new_story("sess-test", catalog.catalog_hash)


def rec_of(*pairs):
    return Recommendation(
        chosen=tuple((iid, rel, 2) for iid, rel in pairs), samples_used=3, fallback=False
    )


def check_forest(story):
    children = [e.child for e in story.edges]
    assert len(children) == len(set(children)), "node with two parents"
    for e in story.edges:
        assert e.parent in story.nodes and e.child in story.nodes
        assert story.nodes[e.child].depth == story.nodes[e.parent].depth + 1
    for nid in story.nodes:
        seen = set()
        cur = nid
        while cur is not None:
            assert cur not in seen, "cycle"
            seen.add(cur)
            cur = story.parent_of(cur)


def related_triple(catalog):
    """(base, child-locator insight, sibling-locator insight) from the catalog."""
    from insightweaver.graph import relation_of

    for base in catalog.insights:
        loc = base.ae.subspace.locator
        if len(loc) != 1:
            continue
        child = sibling = None
        for other in catalog.insights:
            rel = relation_of(loc, other.ae.subspace.locator)
            if rel is None:
                continue
            if rel.tag == "parent_child" and rel.parent == "a":
                child = child or other
            elif rel.tag == "sibling":
                sibling = sibling or other
            if child and sibling:
                return base, child, sibling
    raise AssertionError("fixture lacks related insights")


class TestSeeding:
    def test_seed_count_and_order(self, story, catalog):
        ids = seed_first_layer(story, catalog, n=8)
        assert len(ids) == 8
        scores = [catalog.by_id[story.nodes[n].insight_id].score for n in ids]
        assert scores == sorted(scores, reverse=True)
        assert all(story.nodes[n].depth == 0 for n in ids)
        assert story.edges == []

    def test_seed_diversity_cap(self, story, catalog):
        ids = seed_first_layer(story, catalog, n=8, diversity=2)
        kinds = {}
        for n in ids:
            ins = catalog.by_id[story.nodes[n].insight_id]
            kinds[(ins.category, ins.itype)] = kinds.get((ins.category, ins.itype), 0) + 1
        assert all(v <= 2 for v in kinds.values())

    def test_seed_deterministic(self, catalog):
        s1, s2 = new_story("a", catalog.catalog_hash), new_story("b", catalog.catalog_hash)
        seed_first_layer(s1, catalog)
        seed_first_layer(s2, catalog)
        assert [s1.nodes[n].insight_id for n in sorted(s1.nodes)] == [
            s2.nodes[n].insight_id for n in sorted(s2.nodes)
        ]


class TestAddRecommendations:
    def test_children_created(self, story, catalog):
        seed = seed_first_layer(story, catalog, n=1)[0]
        pool = [i for i in catalog.insights if not story.has_insight(i.id)][:3]
        new = add_recommendations(
            story, seed, rec_of(*[(i.id, f"rel {n}") for n, i in enumerate(pool)]),
            catalog, query="why?",
        )
        assert len(new) == 3
        for nid in new:
            assert story.nodes[nid].depth == story.nodes[seed].depth + 1
            assert story.nodes[nid].state == "collapsed"
            assert story.nodes[nid].added_by == "system"
        assert story.query_log[-1].query == "why?"
        assert story.query_log[-1].recommended == tuple(new)
        check_forest(story)

    def test_edge_kinds_derived(self, story, catalog):
        base, child_ins, sibling_ins = related_triple(catalog)
        story.nodes["n0001"] = StoryNode(node_id="n0001", insight_id=base.id, depth=0)
        story.next_node = 2
        new = add_recommendations(
            story, "n0001", rec_of((child_ins.id, "drills in"), (sibling_ins.id, "compares")),
            catalog, query="q",
        )
        kinds = {story.nodes[e.child].insight_id: e.kind for e in story.edges}
        assert kinds[child_ins.id] == "structural_parent_child"
        assert kinds[sibling_ins.id] == "structural_sibling"
        texts = {e.kind: e.relation_text for e in story.edges}
        assert texts["structural_parent_child"] == "drills in"

    def test_duplicate_insight_skipped(self, story, catalog):
        seed = seed_first_layer(story, catalog, n=2)
        dup = story.nodes[seed[1]].insight_id
        fresh = next(i.id for i in catalog.insights if not story.has_insight(i.id))
        new = add_recommendations(
            story, seed[0], rec_of((dup, "dup"), (fresh, "ok")), catalog, query="q"
        )
        assert len(new) == 1
        assert story.nodes[new[0]].insight_id == fresh
        check_forest(story)

    def test_empty_recommendation_logs_anyway(self, story, catalog):
        seed = seed_first_layer(story, catalog, n=1)[0]
        before = len(story.nodes)
        new = add_recommendations(story, seed,
                                  Recommendation(chosen=(), samples_used=3), catalog, query="q")
        assert new == []
        assert len(story.nodes) == before
        assert len(story.query_log) == 1

    def test_unknown_focused_node(self, story, catalog):
        with pytest.raises(KeyError):
            add_recommendations(story, "n9999", rec_of(), catalog)


class TestUserAdd:
    def test_user_added_edge(self, story, catalog):
        seed = seed_first_layer(story, catalog, n=1)[0]
        fresh = next(i.id for i in catalog.insights if not story.has_insight(i.id))
        nid = user_add_node(story, seed, fresh, catalog)
        assert story.nodes[nid].added_by == "user"
        assert story.nodes[nid].depth == 1
        edge = next(e for e in story.edges if e.child == nid)
        assert edge.kind == "user_added"
        assert edge.relation_text is None

    def test_duplicate_rejected(self, story, catalog):
        seed = seed_first_layer(story, catalog, n=1)[0]
        with pytest.raises(StoryError):
            user_add_node(story, seed, story.nodes[seed].insight_id, catalog)

    def test_catalog_closure(self, story, catalog):
        seed = seed_first_layer(story, catalog, n=1)[0]
        with pytest.raises(StoryError):
            user_add_node(story, seed, "f" * 16, catalog)


def build_chain(story, catalog, depth):
    """seed -> chain of user-added nodes, returns node ids root-first."""
    ids = seed_first_layer(story, catalog, n=1)
    pool = (i.id for i in catalog.insights if not story.has_insight(i.id))
    for _ in range(depth):
        ids.append(user_add_node(story, ids[-1], next(pool), catalog))
    return ids


class TestMoveDelete:
    def test_move_recomputes_depths(self, story, catalog):
        chain = build_chain(story, catalog, 3)  # depths 0,1,2,3
        seed2 = seed_first_layer(story, catalog, n=2)  # adds one more root
        other_root = next(n for n in seed2 if n not in chain)
        move_node(story, chain[2], other_root)
        assert story.nodes[chain[2]].depth == 1
        assert story.nodes[chain[3]].depth == 2
        assert story.parent_of(chain[2]) == other_root
        check_forest(story)

    def test_move_under_descendant_rejected(self, story, catalog):
        chain = build_chain(story, catalog, 2)
        with pytest.raises(StoryError):
            move_node(story, chain[0], chain[2])
        with pytest.raises(StoryError):
            move_node(story, chain[1], chain[1])

    def test_move_to_same_parent_is_noop(self, story, catalog):
        chain = build_chain(story, catalog, 1)
        edges_before = list(story.edges)
        move_node(story, chain[1], chain[0])
        assert story.edges == edges_before

    def test_delete_subtree(self, story, catalog):
        chain = build_chain(story, catalog, 4)
        delete_node(story, chain[1])
        assert set(story.nodes) == {chain[0]}
        assert story.edges == []
        check_forest(story)

    def test_delete_marks_log_orphaned(self, story, catalog):
        seed = seed_first_layer(story, catalog, n=1)[0]
        fresh = [i.id for i in catalog.insights if not story.has_insight(i.id)][:2]
        new = add_recommendations(story, seed, rec_of((fresh[0], "r"), (fresh[1], "r")),
                                  catalog, query="q1")
        delete_node(story, new[0])
        assert story.query_log[0].orphaned is True
        assert len(story.query_log) == 1  # retained, not removed

    def test_delete_missing_raises(self, story):
        with pytest.raises(KeyError):
            delete_node(story, "n0042")


class TestState:
    def test_focus_exclusive(self, story, catalog):
        a, b = seed_first_layer(story, catalog, n=2)
        set_state(story, a, "focus")
        set_state(story, b, "focus")
        assert not story.nodes[a].focused
        assert story.nodes[b].focused

    def test_pin_persists_through_move(self, story, catalog):
        chain = build_chain(story, catalog, 2)
        roots = seed_first_layer(story, catalog, n=2)
        set_state(story, chain[2], "pin")
        move_node(story, chain[2], roots[-1])
        assert story.nodes[chain[2]].pinned

    def test_expand_collapse(self, story, catalog):
        seed = seed_first_layer(story, catalog, n=1)[0]
        set_state(story, seed, "collapse")
        assert story.nodes[seed].state == "collapsed"
        set_state(story, seed, "expand")
        assert story.nodes[seed].state == "expanded"

    def test_unknown_op(self, story, catalog):
        seed = seed_first_layer(story, catalog, n=1)[0]
        with pytest.raises(StoryError):
            set_state(story, seed, "sparkle")


class TestHistoryPath:
    def test_depth3_gives_four_elements(self, story, catalog):
        chain = build_chain(story, catalog, 3)
        path = history_path(story, chain[3])
        assert len(path) == 4
        assert [n.node_id for n, _ in path] == chain

    def test_root_single_element(self, story, catalog):
        seed = seed_first_layer(story, catalog, n=1)[0]
        path = history_path(story, seed)
        assert len(path) == 1
        assert path[0][1] is None

    def test_queries_match_log(self, story, catalog):
        seed = seed_first_layer(story, catalog, n=1)[0]
        f1 = next(i.id for i in catalog.insights if not story.has_insight(i.id))
        (n1,) = add_recommendations(story, seed, rec_of((f1, "r1")), catalog, query="first q")
        f2 = next(i.id for i in catalog.insights if not story.has_insight(i.id))
        (n2,) = add_recommendations(story, n1, rec_of((f2, "r2")), catalog, query="second q")
        path = history_path(story, n2)
        assert [q for _, q in path] == [None, "first q", "second q"]


class TestSerialization:
    def test_empty_story_document(self, catalog):
        s = new_story("sess-e", catalog.catalog_hash)
        doc = json.loads(export_story(s))
        assert doc["schema"] == "iw-story/1"
        assert doc["nodes"] == [] and doc["edges"] == []

    def test_round_trip_byte_identical(self, story, catalog):
        chain = build_chain(story, catalog, 3)
        roots = seed_first_layer(story, catalog, n=3)
        fresh = [i.id for i in catalog.insights if not story.has_insight(i.id)][:2]
        add_recommendations(story, chain[1], rec_of((fresh[0], "rel a"), (fresh[1], "rel b")),
                            catalog, query="unicode stays: 東京")
        set_state(story, chain[2], "pin")
        set_state(story, roots[1], "focus")
        move_node(story, chain[3], roots[0])
        delete_node(story, chain[2])
        text = export_story(story)
        back = import_story(text)
        assert export_story(back) == text

    def test_counter_survives_round_trip(self, story, catalog):
        build_chain(story, catalog, 2)
        back = import_story(export_story(story))
        fresh = next(i.id for i in catalog.insights if not back.has_insight(i.id))
        nid = user_add_node(back, sorted(back.nodes)[0], fresh, catalog)
        assert nid not in story.nodes or story.nodes[nid].insight_id != fresh
        assert back.next_node == story.next_node + 1

    def test_version_mismatch(self):
        with pytest.raises(StoryError):
            import_story(json.dumps({"schema": "iw-story/9", "session_id": "x",
                                     "catalog_hash": "y", "next_node": 1,
                                     "nodes": [], "edges": [], "query_log": []}))

    def test_dangling_edge_rejected(self, catalog):
        s = new_story("sess-d", catalog.catalog_hash)
        doc = json.loads(export_story(s))
        doc["edges"] = [{"from": "n0001", "to": "n0002", "kind": "user_added",
                         "relation_text": None}]
        with pytest.raises(StoryError):
            import_story(json.dumps(doc))

    def test_two_parents_rejected(self, story, catalog):
        a, b = seed_first_layer(story, catalog, n=2)
        fresh = next(i.id for i in catalog.insights if not story.has_insight(i.id))
        nid = user_add_node(story, a, fresh, catalog)
        doc = json.loads(export_story(story))
        doc["edges"].append({"from": b, "to": nid, "kind": "user_added", "relation_text": None})
        with pytest.raises(StoryError):
            import_story(json.dumps(doc))


@st.composite
def mutation_script(draw):
    return draw(st.lists(
        st.tuples(st.sampled_from(["seed", "add", "useradd", "move", "delete", "state"]),
                  st.integers(min_value=0, max_value=10 ** 6)),
        min_size=1, max_size=40,
    ))


class TestForestProperty:
    @given(script=mutation_script())
    @settings(max_examples=60, deadline=None)
    def test_invariants_after_random_mutations(self, script, catalog):
        import random

        story = new_story("sess-p", catalog.catalog_hash)
        all_ids = sorted(catalog.by_id)
        for op, seed_int in script:
            rng = random.Random(seed_int)
            nodes = sorted(story.nodes)
            try:
                if op == "seed":
                    seed_first_layer(story, catalog, n=rng.randint(1, 4))
                elif op == "add" and nodes:
                    pool = [i for i in all_ids if not story.has_insight(i)]
                    picks = rng.sample(pool, min(len(pool), rng.randint(1, 3)))
                    add_recommendations(story, rng.choice(nodes),
                                        rec_of(*[(p, "r") for p in picks]),
                                        catalog, query="q")
                elif op == "useradd" and nodes:
                    pool = [i for i in all_ids if not story.has_insight(i)]
                    if pool:
                        user_add_node(story, rng.choice(nodes), rng.choice(pool), catalog)
                elif op == "move" and len(nodes) >= 2:
                    move_node(story, rng.choice(nodes), rng.choice(nodes))
                elif op == "delete" and nodes:
                    delete_node(story, rng.choice(nodes))
                elif op == "state" and nodes:
                    set_state(story, rng.choice(nodes),
                              rng.choice(["pin", "unpin", "collapse", "expand", "focus"]))
            except (StoryError, KeyError):
                pass
            check_forest(story)
            assert sum(1 for n in story.nodes.values() if n.focused) <= 1
        back = import_story(export_story(story))
        assert export_story(back) == export_story(story)
