"""Structural observability closure.

Known nodes (observed or already deduced) propagate in two ways:

* a functional node whose parents are all known becomes known;
* a family of known functional nodes whose unknown parents can be matched
  one-to-one onto a subset of them makes those parents known.

Both rules consume the equations they use by blocking the arcs into the
children involved. The loop runs to a fixed point.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .matching import decompose, has_perfect_matching
from .model import Arc, InfluenceDiagram, NodeKind


class Rule(str, enum.Enum):
    ALL_PARENTS_KNOWN = "AllParentsKnown"
    K_BY_K_MATCHING = "KByKMatching"


@dataclass(frozen=True)
class RuleFiring:
    rule: Rule
    children: tuple[str, ...]
    newly_known: tuple[str, ...]
    matching: tuple[tuple[str, str], ...] | None = None  # (parent, child)

    def to_json(self) -> dict:
        out: dict = {"rule": self.rule.value, "children": list(self.children), "newly_known": list(self.newly_known)}
        if self.matching is not None:
            out["matching"] = [list(p) for p in self.matching]
        return out


@dataclass
class KnowledgeState:
    known: set[str]
    blocked_arcs: set[Arc] = field(default_factory=set)
    trace: list[RuleFiring] = field(default_factory=list)
    rng: random.Random | None = None

    def order(self, items: Iterable[str]) -> list[str]:
        """Scheduling order for a batch of candidates: sorted, or shuffled when exploring schedules."""
        seq = sorted(items)
        if self.rng is not None:
            self.rng.shuffle(seq)
        return seq


@dataclass(frozen=True)
class ObservabilityReport:
    known_initial: frozenset[str]
    observable: frozenset[str]
    unknown: frozenset[str]
    trace: tuple[RuleFiring, ...]
    redundancy_warnings: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...] = ()

    @property
    def known(self) -> frozenset[str]:
        return self.known_initial | self.observable

    def firing_for(self, nid: str) -> int | None:
        """Index of the trace entry that deduced ``nid``."""
        for i, firing in enumerate(self.trace):
            if nid in firing.newly_known:
                return i
        return None

    def to_json(self) -> dict:
        return {
            "known_initial": sorted(self.known_initial),
            "observable": sorted(self.observable),
            "unknown": sorted(self.unknown),
            "trace": [f.to_json() for f in self.trace],
            "redundancy_warnings": [{"children": list(c), "parents": list(p)} for c, p in self.redundancy_warnings],
        }


def _functional(d: InfluenceDiagram, nid: str) -> bool:
    return d.kind(nid).is_functional


def unknown_parents(d: InfluenceDiagram, state: KnowledgeState, child: str) -> list[str]:
    return [p for p in d.parents(child) if p not in state.known and (p, child) not in state.blocked_arcs]


def _consume(d: InfluenceDiagram, state: KnowledgeState, child: str) -> None:
    for p in d.parents(child):
        state.blocked_arcs.add((p, child))


def rule_all_parents_known(d: InfluenceDiagram, state: KnowledgeState) -> set[str]:
    """Make known every unknown functional node whose parents are all known."""
    ready = [
        v
        for v in d.ids()
        if v not in state.known and _functional(d, v) and all(p in state.known for p in d.parents(v))
    ]
    for v in state.order(ready):
        state.trace.append(RuleFiring(Rule.ALL_PARENTS_KNOWN, (v,), (v,)))
        _consume(d, state, v)
    state.known.update(ready)
    return set(ready)


def known_functional_frontier(d: InfluenceDiagram, state: KnowledgeState) -> list[str]:
    """Known functional nodes that still have an unknown parent over an unblocked arc."""
    return [v for v in d.ids() if v in state.known and _functional(d, v) and unknown_parents(d, state, v)]


def partition_family_classes(
    d: InfluenceDiagram, known_det: Iterable[str], state: KnowledgeState | None = None
) -> list[frozenset[str]]:
    """Group known functional nodes that are linked through shared unknown parents.

    Union-find over the unknown parents; ``state`` defaults to "everything
    in ``known_det`` is known, nothing else is".
    """
    members = sorted(set(known_det))
    if state is None:
        state = KnowledgeState(known=set(members))
    parent = {m: m for m in members}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: dict[str, str] = {}
    for child in members:
        for p in sorted(unknown_parents(d, state, child)):
            if p in owner:
                a, b = find(owner[p]), find(child)
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                owner[p] = child
    groups: dict[str, set[str]] = {}
    for m in members:
        groups.setdefault(find(m), set()).add(m)
    return [frozenset(g) for _, g in sorted(groups.items())]


def rule_matching(
    d: InfluenceDiagram, state: KnowledgeState, family: Iterable[str]
) -> tuple[set[str], list[tuple[tuple[str, ...], tuple[str, ...]]]]:
    """Deduce every unknown-parent set that a square subset of ``family`` pins down.

    Returns the newly known parents and redundancy warnings as
    ``(children, parents)`` pairs where more known children than unknown
    parents are available.
    """
    rows = [c for c in state.order(family) if unknown_parents(d, state, c)]
    if not rows:
        return set(), []
    adj = {r: state.order(unknown_parents(d, state, r)) for r in rows}
    dec = decompose(rows, adj)

    warnings = []
    if dec.overdetermined_rows:
        warnings.append((tuple(sorted(dec.overdetermined_rows)), tuple(sorted(dec.overdetermined_cols))))

    newly: set[str] = set()
    for block in dec.blocks:
        pairs = tuple(sorted(block.pairs))
        children = tuple(sorted(block.rows))
        state.trace.append(RuleFiring(Rule.K_BY_K_MATCHING, children, tuple(sorted(block.cols)), pairs))
        state.known.update(block.cols)
        newly.update(block.cols)
        for child in children:
            _consume(d, state, child)
    return newly, warnings


def observability_closure(
    d: InfluenceDiagram,
    observed: Iterable[str] | None = None,
    *,
    decisions_known: bool = False,
    schedule_seed: int | None = None,
    block_scope: str = "run",
) -> ObservabilityReport:
    """Least fixed point of the two deduction rules.

    ``observed`` replaces the diagram's own observed flags when given.
    ``decisions_known`` treats every decision as known from the start
    (post-decision analysis). ``schedule_seed`` shuffles the order in which
    candidates, families and rules are visited; the resulting sets do not
    depend on it. ``block_scope="pass"`` forgets blocked arcs at the start of
    each outer iteration instead of keeping them for the whole run.
    """
    if block_scope not in ("run", "pass"):
        raise ValueError(f"block_scope must be 'run' or 'pass', not {block_scope!r}")
    initial = set(d.observed() if observed is None else observed)
    missing = initial - set(d.ids())
    if missing:
        raise KeyError(f"unknown node id(s): {sorted(missing)}")
    if decisions_known:
        initial.update(d.decisions())
    rng = random.Random(schedule_seed) if schedule_seed is not None else None
    state = KnowledgeState(known=set(initial), rng=rng)
    warnings: list = []

    while True:
        if block_scope == "pass":
            state.blocked_arcs.clear()
        before = len(state.known)
        steps = [_apply_all_parents, _apply_matching]
        if rng is not None and rng.random() < 0.5:
            steps.reverse()
        for step in steps:
            step(d, state, warnings)
        if len(state.known) == before:
            break

    observable = frozenset(state.known - initial)
    return ObservabilityReport(
        known_initial=frozenset(initial),
        observable=observable,
        unknown=frozenset(set(d.ids()) - state.known),
        trace=tuple(state.trace),
        redundancy_warnings=tuple(dict.fromkeys(warnings)),
    )


def _apply_all_parents(d: InfluenceDiagram, state: KnowledgeState, warnings: list) -> None:
    while rule_all_parents_known(d, state):
        pass


def _apply_matching(d: InfluenceDiagram, state: KnowledgeState, warnings: list) -> None:
    families = partition_family_classes(d, known_functional_frontier(d, state), state)
    if state.rng is not None:
        state.rng.shuffle(families)
    for family in families:
        _, w = rule_matching(d, state, family)
        warnings.extend(w)


def replay_trace(d: InfluenceDiagram, report: ObservabilityReport) -> list[str]:
    """Independently re-check every firing; returns a list of problems (empty if valid)."""
    problems: list[str] = []
    known = set(report.known_initial)
    consumed: set[str] = set()
    for i, f in enumerate(report.trace):
        tag = f"trace[{i}]"
        if f.rule is Rule.ALL_PARENTS_KNOWN:
            if len(f.children) != 1 or f.newly_known != f.children:
                problems.append(f"{tag}: malformed AllParentsKnown firing")
                continue
            (v,) = f.children
            if not _functional(d, v):
                problems.append(f"{tag}: {v} is not deterministic")
            if v in known:
                problems.append(f"{tag}: {v} already known")
            if not d.parents(v) <= known:
                problems.append(f"{tag}: parents of {v} not all known")
            consumed.add(v)
        else:
            kids, new = set(f.children), set(f.newly_known)
            pairs = f.matching or ()
            if len(kids) != len(new) or len(pairs) != len(new):
                problems.append(f"{tag}: matching is not square")
            if {p for p, _ in pairs} != new or {c for _, c in pairs} != kids:
                problems.append(f"{tag}: matching is not a bijection newly_known -> children")
            for p, c in pairs:
                if (p, c) not in d.arcs:
                    problems.append(f"{tag}: {p}->{c} is not an arc")
            for c in kids:
                if not _functional(d, c) or c not in known or c in consumed:
                    problems.append(f"{tag}: {c} is not an unused known deterministic child")
            unknown_par = {p for c in kids for p in d.parents(c) if p not in known}
            if unknown_par != new:
                problems.append(f"{tag}: unknown parents {sorted(unknown_par)} != {sorted(new)}")
            adj = {c: [p for p in d.parents(c) if p in new] for c in sorted(kids)}
            if not has_perfect_matching(sorted(kids), sorted(new), adj):
                problems.append(f"{tag}: Hall's condition fails")
            consumed.update(kids)
        known.update(f.newly_known)
    if known != set(report.known):
        problems.append("replay does not reproduce the known set")
    return problems


def is_chain_observable(d: InfluenceDiagram, chain: Sequence[str], known: Iterable[str] | None = None) -> bool:
    """True iff some node of a deterministic chain is known.

    A chain is a directed path of functional nodes in which every node after
    the first has its predecessor as its only unknown parent; knowing any one
    link then determines all of them.
    """
    known = set(d.observed() if known is None else known)
    if not chain:
        raise ValueError("empty chain")
    for nid in chain:
        if nid not in d:
            raise ValueError(f"unknown node {nid!r}")
        if not _functional(d, nid):
            raise ValueError(f"chain node {nid!r} is not deterministic")
    for prev, nxt in zip(chain, chain[1:]):
        if (prev, nxt) not in d.arcs:
            raise ValueError(f"{prev!r} -> {nxt!r} is not an arc")
        others = {p for p in d.parents(nxt) if p != prev and p not in known}
        if others:
            raise ValueError(f"{nxt!r} has unknown parents besides {prev!r}: {sorted(others)}")
    return any(nid in known for nid in chain)
