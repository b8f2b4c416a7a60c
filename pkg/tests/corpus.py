"""Random diagram generation and brute-force oracles shared by the test modules."""

from __future__ import annotations

import random
from itertools import combinations, permutations
from pathlib import Path

from hypothesis import strategies as st

from idgraph.model import InfluenceDiagram, Node, NodeKind, load_diagram

FIXTURES = Path(__file__).parent / "fixtures"
KINDS = [NodeKind.PROBABILISTIC, NodeKind.DETERMINISTIC, NodeKind.DETERMINISTIC, NodeKind.DECISION, NodeKind.VALUE]
# many unknown roots under observed functional nodes: exercises the matching rule
MATCHING_KINDS = [NodeKind.PROBABILISTIC, NodeKind.PROBABILISTIC, NodeKind.DETERMINISTIC, NodeKind.DETERMINISTIC]


def fixture(name: str) -> InfluenceDiagram:
    return load_diagram(FIXTURES / f"{name}.json")


def random_diagram(
    rng: random.Random,
    n_min: int = 2,
    n_max: int = 8,
    p_arc: float = 0.35,
    p_obs: float = 0.3,
    kinds: list[NodeKind] = KINDS,
) -> InfluenceDiagram:
    """Random valid diagram. Node order is a topological order; value nodes are sinks."""
    n = rng.randint(n_min, n_max)
    palette = kinds
    kinds = [rng.choice(palette) for _ in range(n)]
    nodes = []
    for i, k in enumerate(kinds):
        observed = k is not NodeKind.DECISION and rng.random() < p_obs
        nodes.append(Node(f"n{i}", k, observed))
    arcs = []
    for j in range(n):
        # informational arcs into decisions are rare but legal
        p = p_arc / 4 if kinds[j] is NodeKind.DECISION else p_arc
        for i in range(j):
            if kinds[i] is not NodeKind.VALUE and rng.random() < p:
                arcs.append((f"n{i}", f"n{j}"))
    return InfluenceDiagram(nodes, arcs)


def corpus(seed: int, count: int, **kw) -> list[InfluenceDiagram]:
    rng = random.Random(seed)
    return [random_diagram(rng, **kw) for _ in range(count)]


@st.composite
def diagrams(draw, max_nodes: int = 8):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_diagram(random.Random(seed), n_max=max_nodes)


def brute_force_square_sets(d: InfluenceDiagram, known: set[str], family) -> list[tuple[frozenset, frozenset]]:
    """Every (children, parents) pair satisfying the k-by-k conditions, by enumeration."""
    def unknown_par(c):
        return {p for p in d.parents(c) if p not in known}

    rows = sorted(c for c in family if unknown_par(c))
    found = []
    for k in range(1, len(rows) + 1):
        for S in combinations(rows, k):
            U = set().union(*(unknown_par(c) for c in S))
            if len(U) != k:
                continue
            if any(all((u, s) in d.arcs for u, s in zip(perm, S)) for perm in permutations(sorted(U))):
                found.append((frozenset(S), frozenset(U)))
    return found


def brute_force_disjoint_paths(d: InfluenceDiagram, sources, sinks, blocked=frozenset()) -> int:
    """Largest number of node-disjoint source-to-sink paths through functional nodes, by search."""
    eligible = {v for v in d.ids() if v in sources or (d.kind(v).is_functional and not d.nodes[v].observed)}
    eligible -= set(blocked)
    sinks = set(sinks) & eligible

    def simple_paths(s):
        out = []
        stack = [(s, (s,))]
        while stack:
            v, path = stack.pop()
            if v in sinks:
                out.append(path)
            for w in sorted(d.children(v)):
                if w in eligible and w not in path and w not in sources and d.kind(w) is not NodeKind.DECISION:
                    stack.append((w, path + (w,)))
        return out

    all_paths = [p for s in sorted(set(sources) & eligible) for p in simple_paths(s)]
    best = 0

    def extend(i, used_nodes, used_sinks, count):
        nonlocal best
        best = max(best, count)
        for j in range(i, len(all_paths)):
            p = all_paths[j]
            if p[-1] in used_sinks or used_nodes & set(p):
                continue
            extend(j + 1, used_nodes | set(p), used_sinks | {p[-1]}, count + 1)

    extend(0, frozenset(), frozenset(), 0)
    return best
