"""Split-node unit-capacity flow networks for node-disjoint decision-to-target paths."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, MutableSet

from .model import InfluenceDiagram, NodeKind

SOURCE = ("", "source")
SINK = ("", "sink")

Vertex = tuple[str, str]
Path = tuple[str, ...]


def _in(nid: str) -> Vertex:
    return (nid, "in")


def _out(nid: str) -> Vertex:
    return (nid, "out")


@dataclass
class FlowNetwork:
    """Capacitated digraph built from a diagram.

    Each eligible node ``v`` becomes ``(v, "in") -> (v, "out")`` with
    capacity one. Eligible nodes are the source decisions plus unobserved
    deterministic and value nodes not listed in ``excluded``; probabilistic
    nodes have capacity zero and are simply left out.
    """

    diagram: InfluenceDiagram
    sources: tuple[str, ...]
    sinks: tuple[str, ...]
    excluded: frozenset[str] = frozenset()
    eligible: tuple[str, ...] = field(init=False)
    capacity: dict[Vertex, dict[Vertex, int]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        d = self.diagram
        srcs = set(self.sources)
        eligible = [
            v
            for v in d.ids()
            if v not in self.excluded
            and (v in srcs or (d.kind(v).is_functional and not d.nodes[v].observed))
        ]
        self.eligible = tuple(eligible)
        cap: dict[Vertex, dict[Vertex, int]] = {SOURCE: {}, SINK: {}}
        for v in eligible:
            cap[_in(v)] = {_out(v): 1}
            cap[_out(v)] = {}
        elig = set(eligible)
        for u, v in sorted(d.arcs):
            if u in elig and v in elig and v not in srcs and d.kind(v) is not NodeKind.DECISION:
                cap[_out(u)][_in(v)] = 1
        for s in sorted(srcs & elig):
            cap[SOURCE][_in(s)] = 1
        for t in sorted(set(self.sinks) & elig):
            cap[_out(t)][SINK] = 1
        self.capacity = cap

    @property
    def vertices(self) -> list[Vertex]:
        return list(self.capacity)

    def edges(self) -> list[tuple[Vertex, Vertex, int]]:
        return [(u, v, c) for u, nbrs in self.capacity.items() for v, c in nbrs.items()]

    def without(self, nodes: Iterable[str]) -> FlowNetwork:
        return FlowNetwork(self.diagram, self.sources, self.sinks, self.excluded | frozenset(nodes))


def max_flow(net: FlowNetwork) -> dict[Vertex, dict[Vertex, int]]:
    """Edmonds-Karp on the unit network; returns the positive flow on each edge.

    Neighbours are scanned in sorted order, which fixes the tie-break and
    makes the result reproducible.
    """
    residual: dict[Vertex, dict[Vertex, int]] = {u: {} for u in net.capacity}
    for u, v, c in net.edges():
        residual[u][v] = residual[u].get(v, 0) + c
        residual[v].setdefault(u, 0)
    order = {u: sorted(nbrs) for u, nbrs in residual.items()}

    while True:
        pred: dict[Vertex, Vertex] = {SOURCE: SOURCE}
        queue = deque([SOURCE])
        while queue and SINK not in pred:
            u = queue.popleft()
            for v in order[u]:
                if v not in pred and residual[u][v] > 0:
                    pred[v] = u
                    queue.append(v)
        if SINK not in pred:
            break
        v = SINK
        while v != SOURCE:
            u = pred[v]
            residual[u][v] -= 1
            residual[v][u] += 1
            v = u

    flow: dict[Vertex, dict[Vertex, int]] = {}
    for u, v, c in net.edges():
        f = c - residual[u][v]
        if f > 0:
            flow.setdefault(u, {})[v] = f
    return flow


def max_node_disjoint_paths(net: FlowNetwork) -> list[Path]:
    """Decompose a maximum flow into node-disjoint source-to-target paths.

    Paths are listed in the order of their source decision.
    """
    flow = max_flow(net)
    paths: list[Path] = []
    for start in sorted(flow.get(SOURCE, {})):
        path = [start[0]]
        v = _out(start[0])
        while True:
            (nxt,) = flow[v]
            if nxt == SINK:
                break
            path.append(nxt[0])
            v = _out(nxt[0])
        paths.append(tuple(path))
    return paths


def interior_nodes(paths: Iterable[Path]) -> list[str]:
    return [v for p in paths for v in p[1:-1]]


def enumerate_alternative_path_sets(
    net: FlowNetwork,
    previous_failures: MutableSet[str],
    limit: int,
    *,
    max_solves: int | None = None,
) -> Iterator[list[Path]]:
    """Yield distinct maximum path sets, at most ``limit`` of them.

    The first set is the plain maximum flow. Later sets come from re-solving
    with some interior nodes removed: nodes in ``previous_failures`` (which
    the caller may grow between iterations) are tried before the remaining
    interior nodes of each set found. Only sets reaching one path per sink
    are yielded.
    """
    if limit < 1:
        raise ValueError("limit must be at least 1")
    required = len(net.sinks)
    max_solves = max_solves if max_solves is not None else 50 * limit
    seen_sets: set[frozenset[Path]] = set()
    seen_excl: set[frozenset[str]] = set()
    urgent: deque[frozenset[str]] = deque([frozenset()])
    rest: deque[frozenset[str]] = deque()
    yielded = solves = 0
    while (urgent or rest) and yielded < limit and solves < max_solves:
        excl = urgent.popleft() if urgent else rest.popleft()
        if excl in seen_excl:
            continue
        seen_excl.add(excl)
        solves += 1
        paths = max_node_disjoint_paths(net.without(excl))
        if len(paths) < required:
            continue
        key = frozenset(paths)
        if key not in seen_sets:
            seen_sets.add(key)
            yielded += 1
            yield paths
        inner = sorted(set(interior_nodes(paths)))
        for v in inner:
            if v in previous_failures:
                urgent.append(excl | {v})
        for v in inner:
            if v not in previous_failures:
                rest.append(excl | {v})
