"""Graphviz rendering of diagrams, optionally annotated with an analysis report."""

from __future__ import annotations

import json

from .controllability import ControllabilityReport
from .model import InfluenceDiagram, NodeKind
from .observability import ObservabilityReport

SHAPES = {
    NodeKind.PROBABILISTIC: "circle",
    NodeKind.DETERMINISTIC: "doublecircle",
    NodeKind.DECISION: "box",
    NodeKind.VALUE: "diamond",
}
HIGHLIGHT = "blue"


def _quote(s: str) -> str:
    return json.dumps(s)


def _highlights(annotations) -> tuple[set[str], set[tuple[str, str]]]:
    """Nodes and arcs to emphasise, from a report object or its JSON form."""
    if annotations is None:
        return set(), set()
    if isinstance(annotations, ObservabilityReport):
        return set(annotations.observable), set()
    if isinstance(annotations, ControllabilityReport):
        annotations = annotations.to_json()
    if isinstance(annotations, dict):
        if "observable" in annotations:
            return set(annotations["observable"]), set()
        if "verdict" in annotations:
            nodes: set[str] = set()
            arcs: set[tuple[str, str]] = set()
            for path in annotations.get("paths", []):
                nodes.update(path)
                arcs.update(zip(path, path[1:]))
            return nodes, arcs
    raise TypeError(f"cannot annotate with {type(annotations).__name__}")


def export_dot(d: InfluenceDiagram, annotations=None) -> str:
    nodes, arcs = _highlights(annotations)
    lines = ["digraph influence_diagram {", "  rankdir=LR;"]
    for node in d.nodes.values():
        attrs = [f"shape={SHAPES[node.kind]}"]
        if node.observed:
            attrs += ["style=filled", 'fillcolor="gray80"']
        if node.id in nodes:
            attrs += [f"color={HIGHLIGHT}", "penwidth=2.5"]
        lines.append(f"  {_quote(node.id)} [{', '.join(attrs)}];")
    for u, v in sorted(d.arcs):
        extra = f" [color={HIGHLIGHT}, penwidth=2.5]" if (u, v) in arcs else ""
        lines.append(f"  {_quote(u)} -> {_quote(v)}{extra};")
    lines.append("}")
    return "\n".join(lines) + "\n"
