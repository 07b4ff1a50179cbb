"""Proof-tree export as Graphviz DOT or JSON, and the JSON reader."""

from __future__ import annotations

import json

from .core import Param
from .tableau.prover import ProofNode, ProofTree

LABEL_LIMIT = 120


def _tag(node: ProofNode) -> str:
    if node.rule:
        return node.rule
    return node.status


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def node_text(node: ProofNode, limit: int = LABEL_LIMIT) -> str:
    body = "{" + ", ".join(sorted(f.key if hasattr(f, "key") else str(f) for f in node.label)) + "}"
    if len(body) > limit:
        body = body[: limit - 3] + "..."
    return _tag(node) + "\n" + body


def _is_closed(node: ProofNode) -> bool:
    return node.closed or node.status == "base-unsat"


def to_dot(tree: ProofTree) -> str:
    lines = ["digraph proof {", "  node [shape=box, fontname=monospace];"]
    for n in tree.nodes:
        attrs = [f'label="{_dot_escape(node_text(n))}"']
        if _is_closed(n):
            attrs.append("style=filled")
            attrs.append("fillcolor=gray")
        elif n.status == "sat":
            attrs.append("color=green")
        lines.append(f"  n{n.id} [{', '.join(attrs)}];")
    for n in tree.nodes:
        for c in n.children:
            lines.append(f"  n{n.id} -> n{c};")
        if n.loop_target is not None:
            lines.append(f"  n{n.id} -> n{n.loop_target} [style=dashed, constraint=false];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(tree: ProofTree) -> str:
    nodes = []
    for n in tree.nodes:
        nodes.append(
            {
                "id": n.id,
                "parent": n.parent,
                "children": list(n.children),
                "via": n.via,
                "rule": n.rule,
                "status": n.status,
                "closed": n.closed,
                "layer": n.layer,
                "nexp": n.nexp,
                "loop_target": n.loop_target,
                "renaming": n.renaming,
                "label": sorted(f.key if hasattr(f, "key") else str(f) for f in n.label),
            }
        )
    doc = {"depth_param": tree.N.key if tree.N is not None else None, "nodes": nodes}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def render_tree(tree: ProofTree, format: str = "dot") -> str:
    if format == "dot":
        return to_dot(tree)
    if format == "json":
        return to_json(tree)
    raise ValueError(f"unknown tree format {format!r}")


def read_tree_json(text: str) -> ProofTree:
    """Rebuild a tree from :func:`to_json` output; labels hold printed formulae."""
    doc = json.loads(text)
    nodes = []
    for d in doc["nodes"]:
        nodes.append(
            ProofNode(
                id=d["id"],
                label=frozenset(d["label"]),
                parent=d["parent"],
                children=list(d["children"]),
                via=d["via"],
                rule=d["rule"],
                closed=d["closed"],
                layer=d["layer"],
                nexp=d["nexp"],
                loop_target=d["loop_target"],
                renaming=d["renaming"],
                status=d["status"],
            )
        )
    n = doc.get("depth_param")
    return ProofTree(nodes, Param(n, "nat") if n else None)


def shape(tree: ProofTree) -> list:
    """Comparable summary of a tree: structure, flags and printed labels."""
    out = []
    for n in tree.nodes:
        keys = sorted(f.key if hasattr(f, "key") else str(f) for f in n.label)
        out.append((n.id, n.parent, tuple(n.children), n.rule, n.status, n.closed, n.layer, n.loop_target, tuple(keys)))
    return out
