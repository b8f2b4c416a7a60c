"""Influence-diagram data model, structural validation, and I/O."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from types import MappingProxyType
from typing import Iterable, Mapping


class DiagramError(ValueError):
    """Raised when a diagram document cannot be turned into a diagram.

    ``kind`` is ``"syntax"`` or ``"semantic"``; ``location`` points at the
    offending part of the document (e.g. ``"arcs[3][1]"``).
    """

    def __init__(self, kind: str, message: str, location: str | None = None):
        self.kind = kind
        self.location = location
        where = f" at {location}" if location else ""
        super().__init__(f"{kind} error{where}: {message}")


class NodeKind(str, enum.Enum):
    PROBABILISTIC = "probabilistic"
    DETERMINISTIC = "deterministic"
    DECISION = "decision"
    VALUE = "value"

    @property
    def is_functional(self) -> bool:
        """Deterministic and value nodes are pure functions of their parents."""
        return self in (NodeKind.DETERMINISTIC, NodeKind.VALUE)


@dataclass(frozen=True, order=True)
class Node:
    id: str
    kind: NodeKind
    observed: bool = False


Arc = tuple[str, str]


class InfluenceDiagram:
    """Immutable DAG of typed nodes.

    Construction only checks referential integrity (ids unique, endpoints
    exist, no self loops or duplicate arcs). Acyclicity and the kind rules
    are reported by :func:`validate` so that broken models can still be
    loaded and inspected.
    """

    __slots__ = ("_nodes", "_arcs", "_parents", "_children", "meta")

    def __init__(
        self,
        nodes: Iterable[Node],
        arcs: Iterable[Arc] = (),
        meta: Mapping[str, str] | None = None,
    ):
        table: dict[str, Node] = {}
        for node in nodes:
            if not node.id:
                raise DiagramError("semantic", "empty node id")
            if node.id in table:
                raise DiagramError("semantic", f"duplicate node id {node.id!r}")
            table[node.id] = node
        parents: dict[str, set[str]] = {nid: set() for nid in table}
        children: dict[str, set[str]] = {nid: set() for nid in table}
        arc_set: set[Arc] = set()
        for u, v in arcs:
            for end in (u, v):
                if end not in table:
                    raise DiagramError("semantic", f"arc references unknown node {end!r}")
            if u == v:
                raise DiagramError("semantic", f"self-loop on {u!r}")
            if (u, v) in arc_set:
                raise DiagramError("semantic", f"duplicate arc {u!r} -> {v!r}")
            arc_set.add((u, v))
            parents[v].add(u)
            children[u].add(v)
        self._nodes = MappingProxyType(dict(sorted(table.items())))
        self._arcs = frozenset(arc_set)
        self._parents = MappingProxyType({k: frozenset(s) for k, s in parents.items()})
        self._children = MappingProxyType({k: frozenset(s) for k, s in children.items()})
        self.meta = MappingProxyType(dict(meta or {}))

    @property
    def nodes(self) -> Mapping[str, Node]:
        return self._nodes

    @property
    def arcs(self) -> frozenset[Arc]:
        return self._arcs

    def ids(self) -> list[str]:
        return list(self._nodes)

    def kind(self, nid: str) -> NodeKind:
        return self._nodes[nid].kind

    def parents(self, nid: str) -> frozenset[str]:
        return self._parents[nid]

    def children(self, nid: str) -> frozenset[str]:
        return self._children[nid]

    def observed(self) -> frozenset[str]:
        return frozenset(n.id for n in self._nodes.values() if n.observed)

    def of_kind(self, *kinds: NodeKind) -> list[str]:
        return [n.id for n in self._nodes.values() if n.kind in kinds]

    def decisions(self) -> list[str]:
        return self.of_kind(NodeKind.DECISION)

    def structural_parents(self, nid: str) -> frozenset[str]:
        """Parents as seen by the analysis engines; arcs into decisions are informational only."""
        if self._nodes[nid].kind is NodeKind.DECISION:
            return frozenset()
        return self._parents[nid]

    def structural_children(self, nid: str) -> frozenset[str]:
        return frozenset(c for c in self._children[nid] if self._nodes[c].kind is not NodeKind.DECISION)

    def ancestors(self, targets: Iterable[str], *, structural: bool = True) -> set[str]:
        """Strict ancestors of ``targets`` (the targets themselves only if reachable from another target)."""
        parents = self.structural_parents if structural else self.parents
        seen: set[str] = set()
        stack = [p for t in targets for p in parents(t)]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            stack.extend(parents(u))
        return seen

    def topological_order(self) -> list[str]:
        """Deterministic topological order (ties broken by id). Raises ``CycleError``."""
        ts = TopologicalSorter({nid: sorted(self._parents[nid]) for nid in self._nodes})
        ts.prepare()
        order: list[str] = []
        while ts.is_active():
            ready = sorted(ts.get_ready())
            order.extend(ready)
            ts.done(*ready)
        return order

    def with_observed(self, extra: Iterable[str]) -> InfluenceDiagram:
        """Copy of this diagram with additional nodes flagged observed."""
        extra = set(extra)
        unknown = extra - set(self._nodes)
        if unknown:
            raise DiagramError("semantic", f"unknown node id(s) {sorted(unknown)}")
        nodes = [Node(n.id, n.kind, n.observed or n.id in extra) for n in self._nodes.values()]
        return InfluenceDiagram(nodes, self._arcs, self.meta)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InfluenceDiagram):
            return NotImplemented
        return dict(self._nodes) == dict(other._nodes) and self._arcs == other._arcs

    def __hash__(self) -> int:
        return hash((frozenset(self._nodes.values()), self._arcs))

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, nid: object) -> bool:
        return nid in self._nodes

    def __repr__(self) -> str:
        return f"InfluenceDiagram({len(self._nodes)} nodes, {len(self._arcs)} arcs)"


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [{"code": v.code, "message": v.message, "ids": list(v.ids)} for v in self.violations],
        }


def find_cycle(d: InfluenceDiagram) -> list[str] | None:
    try:
        d.topological_order()
    except CycleError as exc:
        # graphlib reports the cycle closed: first node repeated at the end
        cycle = list(exc.args[1])[:-1]
        if (cycle[0], cycle[1 % len(cycle)]) not in d.arcs:
            cycle.reverse()
        k = cycle.index(min(cycle))
        return cycle[k:] + cycle[:k]
    return None


def validate(d: InfluenceDiagram) -> ValidationReport:
    violations: list[Violation] = []
    cycle = find_cycle(d)
    if cycle is not None:
        violations.append(Violation("cycle", "diagram contains a directed cycle " + " -> ".join(cycle + cycle[:1]), tuple(cycle)))
    for node in d.nodes.values():
        if node.kind is NodeKind.VALUE and d.children(node.id):
            kids = tuple(sorted(d.children(node.id)))
            violations.append(Violation("value-has-children", f"value node {node.id!r} has outgoing arcs", (node.id, *kids)))
        if node.kind is NodeKind.DECISION and node.observed:
            violations.append(Violation("observed-decision", f"decision node {node.id!r} is marked observed", (node.id,)))
    return ValidationReport(tuple(violations))


def _expect(cond: bool, message: str, location: str) -> None:
    if not cond:
        raise DiagramError("semantic", message, location)


def diagram_from_document(doc: object) -> InfluenceDiagram:
    """Build a diagram from an already-decoded JSON document."""
    _expect(isinstance(doc, dict), "document must be a JSON object", "$")
    assert isinstance(doc, dict)
    raw_nodes = doc.get("nodes", [])
    raw_arcs = doc.get("arcs", [])
    _expect(isinstance(raw_nodes, list), "'nodes' must be a list", "nodes")
    _expect(isinstance(raw_arcs, list), "'arcs' must be a list", "arcs")

    nodes: list[Node] = []
    seen: set[str] = set()
    for i, item in enumerate(raw_nodes):
        loc = f"nodes[{i}]"
        _expect(isinstance(item, dict), "node entry must be an object", loc)
        nid = item.get("id")
        _expect(isinstance(nid, str) and nid != "", "node id must be a non-empty string", f"{loc}.id")
        _expect(nid not in seen, f"duplicate node id {nid!r}", f"{loc}.id")
        seen.add(nid)
        kind = item.get("kind")
        try:
            node_kind = NodeKind(kind)
        except ValueError:
            raise DiagramError("semantic", f"unknown kind {kind!r} for node {nid!r}", f"{loc}.kind") from None
        observed = item.get("observed", False)
        _expect(isinstance(observed, bool), "'observed' must be a boolean", f"{loc}.observed")
        nodes.append(Node(nid, node_kind, observed))

    arcs: list[Arc] = []
    seen_arcs: set[Arc] = set()
    for i, item in enumerate(raw_arcs):
        loc = f"arcs[{i}]"
        _expect(
            isinstance(item, list) and len(item) == 2 and all(isinstance(x, str) for x in item),
            "arc must be a [from, to] pair of ids",
            loc,
        )
        u, v = item
        for j, end in enumerate((u, v)):
            _expect(end in seen, f"arc references undeclared node {end!r}", f"{loc}[{j}]")
        _expect(u != v, f"self-loop on {u!r}", loc)
        _expect((u, v) not in seen_arcs, f"duplicate arc {u!r} -> {v!r}", loc)
        seen_arcs.add((u, v))
        arcs.append((u, v))

    meta = doc.get("meta", {})
    _expect(isinstance(meta, dict) and all(isinstance(x, str) for x in meta.values()), "'meta' must map to strings", "meta")
    return InfluenceDiagram(nodes, arcs, meta)


def parse_diagram(text: str) -> InfluenceDiagram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramError("syntax", exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return diagram_from_document(doc)


def diagram_to_document(d: InfluenceDiagram) -> dict:
    doc: dict = {
        "nodes": [{"id": n.id, "kind": n.kind.value, "observed": n.observed} for n in d.nodes.values()],
        "arcs": [list(a) for a in sorted(d.arcs)],
    }
    if d.meta:
        doc["meta"] = dict(sorted(d.meta.items()))
    return doc


def serialize_diagram(d: InfluenceDiagram) -> str:
    return json.dumps(diagram_to_document(d), indent=2) + "\n"


def load_diagram(path) -> InfluenceDiagram:
    with open(path, encoding="utf-8") as fh:
        return parse_diagram(fh.read())
