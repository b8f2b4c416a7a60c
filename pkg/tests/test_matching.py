from itertools import permutations

from hypothesis import given, settings
from hypothesis import strategies as st

from idgraph.matching import decompose, has_perfect_matching, hopcroft_karp, strongly_connected_components


@st.composite
def bipartite(draw):
    n_rows = draw(st.integers(1, 6))
    n_cols = draw(st.integers(1, 6))
    rows = [f"r{i}" for i in range(n_rows)]
    adj = {r: [f"c{j}" for j in range(n_cols) if draw(st.booleans())] for r in rows}
    return rows, adj


def brute_max_matching(rows, adj):
    cols = sorted({c for r in rows for c in adj[r]})
    best = 0
    # assign each row a distinct column or nothing
    def go(i, used, size):
        nonlocal best
        best = max(best, size)
        if i == len(rows):
            return
        go(i + 1, used, size)
        for c in adj[rows[i]]:
            if c not in used:
                go(i + 1, used | {c}, size + 1)
    go(0, frozenset(), 0)
    return best, cols


@settings(max_examples=300)
@given(bipartite())
def test_hopcroft_karp_is_maximum(g):
    rows, adj = g
    m = hopcroft_karp(rows, adj)
    assert len(set(m.values())) == len(m)
    assert all(c in adj[r] for r, c in m.items())
    assert len(m) == brute_max_matching(rows, adj)[0]


@settings(max_examples=300)
@given(bipartite())
def test_decomposition_blocks_are_square_and_closed(g):
    rows, adj = g
    dec = decompose(rows, adj)
    solved: set = set()
    for block in dec.blocks:
        assert len(block.rows) == len(block.cols)
        assert has_perfect_matching(list(block.rows), list(block.cols), adj)
        needed = {c for r in block.rows for c in adj[r]}
        # every other column a block row touches was solved by an earlier block
        assert needed - set(block.cols) <= solved
        solved |= set(block.cols)
    all_cols = {c for r in rows for c in adj[r]}
    assert solved == all_cols - dec.underdetermined_cols


def test_perfect_matching_helper():
    adj = {"y1": ["x1", "x3"], "y2": ["x1", "x2", "x3"], "y3": ["x1", "x2"]}
    assert has_perfect_matching(["y1", "y2", "y3"], ["x1", "x2", "x3"], adj)
    assert not has_perfect_matching(["a", "b"], ["p", "q"], {"a": ["p"], "b": ["p"]})
    assert not has_perfect_matching(["a"], ["p", "q"], {"a": ["p", "q"]})


def test_scc_reverse_topological():
    succ = {"a": ["b"], "b": ["c"], "c": ["b", "d"], "d": []}
    comps = strongly_connected_components(["a", "b", "c", "d"], succ)
    assert [sorted(c) for c in comps] == [["d"], ["b", "c"], ["a"]]


def test_overdetermined_part():
    dec = decompose(["y1", "y2"], {"y1": ["x1"], "y2": ["x1"]})
    assert dec.overdetermined_rows == {"y1", "y2"}
    assert dec.overdetermined_cols == {"x1"}
    assert [b.cols for b in dec.blocks] == [("x1",)]


def test_underdetermined_part():
    dec = decompose(["y"], {"y": ["a", "b"]})
    assert dec.underdetermined_cols == {"a", "b"}
    assert dec.blocks == ()


def test_brute_matching_helper_sanity():
    rows = ["a", "b", "c"]
    adj = {"a": ["1", "2"], "b": ["1"], "c": ["1"]}
    assert brute_max_matching(rows, adj)[0] == 2
    assert max(sum(1 for r, c in zip(rows, p) if c in adj[r]) for p in permutations(["1", "2", "3"])) == 2
