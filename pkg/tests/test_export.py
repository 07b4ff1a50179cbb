import json

import pytest

from schemata.core import Atom, Param
from schemata.export import node_text, read_tree_json, render_tree, shape, to_dot, to_json
from schemata.tableau import prove
from schemata.tableau.prover import ProofNode, ProofTree

from conftest import corpus


def run(name):
    pr = corpus(name)
    return prove(pr.conjecture, pr.signature, pr.rules, pr.deltas)


def test_single_closed_node():
    a = Param("A", "nat")
    node = ProofNode(0, frozenset({Atom("p", (a,)), Atom("p", (a,), False)}), rule="Closure", closed=True, status="closed")
    dot = to_dot(ProofTree([node]))
    node_lines = [l for l in dot.splitlines() if l.strip().startswith("n0 [")]
    assert len(node_lines) == 1
    assert "fillcolor=gray" in node_lines[0]
    assert "->" not in dot


def test_loop_edges_are_dashed():
    dot = to_dot(run("trace_tree").tree)
    assert dot.startswith("digraph")
    assert any("style=dashed" in l for l in dot.splitlines() if "->" in l)


def test_sat_leaf_is_marked():
    r = run("depth_example")
    dot = to_dot(r.tree)
    assert f"n{r.verdict.leaf} [" in dot and "color=green" in dot


def test_long_labels_are_truncated():
    node = ProofNode(0, frozenset(Atom("p", (Param(f"A{i}", "nat"),)) for i in range(50)))
    body = node_text(node).split("\n")[1]
    assert len(body) == 120 and body.endswith("...")


@pytest.mark.parametrize("name", ["intro_chain", "trace_tree", "depth_example"])
def test_json_round_trip(name):
    tree = run(name).tree
    text = to_json(tree)
    back = read_tree_json(text)
    assert shape(back) == shape(tree)
    assert to_json(back) == text


def test_json_records_loops():
    doc = json.loads(to_json(run("trace_tree").tree))
    loops = [n for n in doc["nodes"] if n["rule"] == "Loop"]
    assert loops and all(n["loop_target"] is not None and n["renaming"] for n in loops)
    assert doc["depth_param"]


def test_unknown_format():
    with pytest.raises(ValueError):
        render_tree(run("intro_chain").tree, "svg")
