"""Bipartite matching and the coarse/fine block structure used by observability.

Rows are equations (known deterministic children), columns are unknowns
(their unknown parents). Everything here is generic over hashable ids and
iterates in the order given by the caller, so results are reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

INF = float("inf")


def hopcroft_karp(rows: Sequence[Hashable], adj: Mapping[Hashable, Sequence[Hashable]]) -> dict:
    """Maximum matching of ``rows`` into columns; returns ``{row: col}``."""
    match_row: dict = {}
    match_col: dict = {}
    dist: dict = {}

    def bfs() -> bool:
        queue = deque()
        for r in rows:
            if r in match_row:
                dist[r] = INF
            else:
                dist[r] = 0
                queue.append(r)
        found = False
        while queue:
            r = queue.popleft()
            for c in adj[r]:
                r2 = match_col.get(c)
                if r2 is None:
                    found = True
                elif dist[r2] == INF:
                    dist[r2] = dist[r] + 1
                    queue.append(r2)
        return found

    def dfs(r) -> bool:
        for c in adj[r]:
            r2 = match_col.get(c)
            if r2 is None or (dist[r2] == dist[r] + 1 and dfs(r2)):
                match_row[r] = c
                match_col[c] = r
                return True
        dist[r] = INF
        return False

    while bfs():
        for r in rows:
            if r not in match_row:
                dfs(r)
    return match_row


def has_perfect_matching(rows: Sequence, cols: Sequence, adj: Mapping) -> bool:
    if len(rows) != len(cols):
        return False
    colset = set(cols)
    restricted = {r: [c for c in adj[r] if c in colset] for r in rows}
    return len(hopcroft_karp(rows, restricted)) == len(rows)


def strongly_connected_components(vertices: Sequence, succ: Mapping) -> list[list]:
    """Tarjan's algorithm, iterative. Components come out in reverse topological order."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list[list] = []
    counter = 0
    for root in vertices:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


@dataclass(frozen=True)
class Block:
    """A square, perfectly matched block: ``cols`` are solvable from ``rows``."""

    rows: tuple
    cols: tuple
    pairs: tuple  # (col, row) pairs


@dataclass(frozen=True)
class Decomposition:
    matching: dict
    blocks: tuple[Block, ...]  # in solve order
    underdetermined_cols: frozenset
    overdetermined_rows: frozenset
    overdetermined_cols: frozenset


def decompose(rows: Sequence, adj: Mapping[Hashable, Sequence]) -> Decomposition:
    """Split a bipartite row/column system into solvable blocks.

    Columns reachable by an alternating path from an unmatched column can take
    arbitrary values and are left out. Every remaining column is matched to a
    row whose neighbours are all remaining columns; those rows and columns are
    split into strongly connected blocks and returned in dependency order, so
    that when a block is solved every other column its rows touch has already
    been solved.
    """
    cols: list = []
    seen_cols: set = set()
    for r in rows:
        for c in adj[r]:
            if c not in seen_cols:
                seen_cols.add(c)
                cols.append(c)
    matching = hopcroft_karp(rows, adj)
    match_col = {c: r for r, c in matching.items()}

    col_adj: dict = {c: [] for c in cols}
    for r in rows:
        for c in adj[r]:
            col_adj[c].append(r)

    under: set = set()
    queue = deque(c for c in cols if c not in match_col)
    under.update(queue)
    while queue:
        c = queue.popleft()
        for r in col_adj[c]:
            c2 = matching.get(r)
            if c2 is not None and c2 not in under:
                under.add(c2)
                queue.append(c2)

    over_rows: set = set()
    over_cols: set = set()
    queue = deque(r for r in rows if r not in matching)
    over_rows.update(queue)
    while queue:
        r = queue.popleft()
        for c in adj[r]:
            if c in over_cols:
                continue
            over_cols.add(c)
            r2 = match_col.get(c)
            if r2 is not None and r2 not in over_rows:
                over_rows.add(r2)
                queue.append(r2)

    solvable = [c for c in cols if c not in under]
    # column c depends on every other column of the row it is matched to
    depends = {c: [c2 for c2 in adj[match_col[c]] if c2 != c] for c in solvable}
    blocks = []
    for comp in strongly_connected_components(solvable, depends):
        order = {c: i for i, c in enumerate(solvable)}
        comp.sort(key=order.__getitem__)
        pairs = tuple((c, match_col[c]) for c in comp)
        blocks.append(Block(rows=tuple(r for _, r in pairs), cols=tuple(comp), pairs=pairs))
    return Decomposition(
        matching=matching,
        blocks=tuple(blocks),
        underdetermined_cols=frozenset(under),
        overdetermined_rows=frozenset(over_rows),
        overdetermined_cols=frozenset(over_cols),
    )
