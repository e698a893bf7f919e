"""Graphviz DOT rendering of a workload, optionally annotated with a plan."""

from __future__ import annotations

from .graph import DepGraph, ExecOrder


def _q(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def to_dot(g: DepGraph, order: ExecOrder | None = None, flagged=frozenset()) -> str:
    flagged = set(flagged)
    lines = ["digraph workload {", "  rankdir=TB;", "  node [shape=box, fontname=Helvetica];"]
    for n in g.nodes:
        label = n.id
        if order is not None:
            label += f"\\n#{order.position(n.id)}"
        attrs = [f"label={_q(label)}"]
        if n.id in flagged:
            attrs += ["style=filled", 'fillcolor="#f4a261"', "penwidth=2"]
        lines.append(f"  {_q(n.id)} [{', '.join(attrs)}];")
    for p, c in g.edges:
        lines.append(f"  {_q(p)} -> {_q(c)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
