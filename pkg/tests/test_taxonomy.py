import json

import pytest

from stx.errors import CycleError, MalformedTaxonomy, UnknownNode
from stx.taxonomy import load_taxonomy, parse_taxonomy, resolve_all, resolve_root


def graph(*lines):
    return parse_taxonomy({"node_id": n, "parent_ids": p, "name": n.upper()} for n, p in lines)


def test_roots():
    g = graph(("A", ["B"]), ("B", []))
    assert g.roots == {"B"}


def test_placeholder_root_materialized():
    g = graph(("A", ["B"]))
    assert g.roots == {"B"} and g.placeholders == ("B",)


def test_cycle_loads_but_fails_to_resolve():
    g = graph(("A", ["B"]), ("B", ["A"]), ("R", []))
    with pytest.raises(CycleError) as err:
        resolve_root(g, "A")
    assert err.value.cycle == ["A", "B", "A"]


def test_no_roots():
    with pytest.raises(MalformedTaxonomy):
        graph(("A", ["B"]), ("B", ["A"]))


def test_duplicates_last_wins(tmp_path, caplog):
    path = tmp_path / "t.jsonl"
    path.write_text("\n".join(json.dumps(o) for o in [
        {"node_id": "A", "parent_ids": ["R1"], "name": "a"},
        {"node_id": "A", "parent_ids": ["R2"], "name": "a2"},
        {"node_id": "R1", "parent_ids": []}, {"node_id": "R2", "parent_ids": []}]))
    g = load_taxonomy(path)
    assert g.duplicates == 1
    assert resolve_root(g, "A") == "R2"
    assert g.name("A") == "a2"


def test_chain():
    g = graph(("A", ["B"]), ("B", ["R"]), ("R", []))
    assert all(resolve_root(g, "A", s) == "R" for s in range(20))


def test_per_node_determinism():
    g = graph(("A", ["R1", "R2"]), ("R1", []), ("R2", []))
    assert len({resolve_root(g, "A", 0) for _ in range(100)}) == 1


def test_both_parents_reachable_over_seeds():
    g = graph(("A", ["R1", "R2"]), ("R1", []), ("R2", []))
    seen = {resolve_root(g, "A", s) for s in range(1000)}
    assert seen == {"R1", "R2"}


def test_unknown_node():
    with pytest.raises(UnknownNode):
        resolve_root(graph(("R", [])), "nope")


def test_root_resolves_to_itself():
    assert resolve_root(graph(("R", [])), "R") == "R"


def _diamond():
    # X -> {M1, M2}; M1 -> R1; M2 -> R2; leaves under X
    return graph(("L1", ["X"]), ("L2", ["X", "M2"]), ("X", ["M1", "M2"]),
                 ("M1", ["R1"]), ("M2", ["R2"]), ("R1", []), ("R2", []))


@pytest.mark.parametrize("seed", range(10))
def test_resolve_all_matches_per_node(seed):
    g = _diamond()
    nodes = ["L2", "L1", "X", "L1", "M2", "R1"]
    rep = resolve_all(g, nodes, seed)
    assert rep.errors == []
    for n in nodes:
        assert rep.resolved[n] == resolve_root(g, n, seed)
        assert rep.resolved[n] in g.roots
    # order of the batch does not matter
    assert resolve_all(g, list(reversed(nodes)), seed).resolved == rep.resolved


def test_resolve_all_memo_consistency():
    g = graph(("A", ["R1", "R2"]), ("B", ["A"]), ("R1", []), ("R2", []))
    rep = resolve_all(g, ["A", "A", "B"], 3)
    assert rep.resolved == {"A": resolve_root(g, "A", 3), "B": resolve_root(g, "B", 3)}


def test_resolve_all_empty():
    rep = resolve_all(graph(("R", [])), [])
    assert rep.resolved == {} and rep.errors == []


def test_resolve_all_collects_errors():
    g = graph(("A", ["B"]), ("B", ["A"]), ("C", ["R"]), ("R", []))
    rep = resolve_all(g, ["A", "C", "zzz"])
    assert rep.resolved == {"C": "R"}
    assert [e["error"] for e in rep.errors] == ["CycleError", "UnknownNode"]
    assert rep.errors[0]["cycle"] == ["A", "B", "A"]
    assert json.loads(json.dumps(rep.to_json()))["resolved"] == {"C": "R"}


def test_walk_length_bounded_on_self_loop():
    g = graph(("A", ["A"]), ("R", []))
    with pytest.raises(CycleError):
        resolve_root(g, "A")
