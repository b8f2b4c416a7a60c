"""Unroll a structured linear state-space system into a dynamic-graph diagram.

State ``i`` at stage ``t`` becomes node ``X{i}_{t}``, input ``j`` becomes
decision ``U{j}_{t}``, output ``k`` becomes ``Y{k}_{t}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .model import InfluenceDiagram, Node, NodeKind


class UnrollError(ValueError):
    pass


@dataclass(frozen=True)
class PatternMatrix:
    rows: int
    cols: int
    nonzeros: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise UnrollError("matrix dimensions must be non-negative")
        for r, c in self.nonzeros:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise UnrollError(f"entry ({r}, {c}) outside a {self.rows}x{self.cols} pattern")

    @classmethod
    def of(cls, rows: int, cols: int, entries: Iterable[Iterable[int]]) -> PatternMatrix:
        return cls(rows, cols, frozenset((int(r), int(c)) for r, c in entries))

    @property
    def nnz(self) -> int:
        return len(self.nonzeros)


@dataclass(frozen=True)
class UnrollSpec:
    a: PatternMatrix
    b: PatternMatrix
    horizon: int
    c: PatternMatrix | None = None
    initial_observed: bool = False
    outputs_observed: bool = True

    def __post_init__(self) -> None:
        n = self.a.rows
        if self.a.cols != n:
            raise UnrollError(f"A must be square, got {self.a.rows}x{self.a.cols}")
        if self.b.rows != n:
            raise UnrollError(f"B must have {n} rows, got {self.b.rows}")
        if self.c is not None and self.c.cols != n:
            raise UnrollError(f"C must have {n} columns, got {self.c.cols}")
        if self.horizon < 1:
            raise UnrollError("horizon must be at least 1")

    @property
    def n(self) -> int:
        return self.a.rows

    @property
    def m(self) -> int:
        return self.b.cols

    @property
    def p(self) -> int:
        return 0 if self.c is None else self.c.rows


def unroll(spec: UnrollSpec) -> InfluenceDiagram:
    n, m, T = spec.n, spec.m, spec.horizon
    nodes: list[Node] = []
    arcs: list[tuple[str, str]] = []
    for i in range(n):
        nodes.append(Node(f"X{i}_0", NodeKind.PROBABILISTIC, spec.initial_observed))
        for t in range(1, T + 1):
            nodes.append(Node(f"X{i}_{t}", NodeKind.DETERMINISTIC))
    for j in range(m):
        for t in range(T):
            nodes.append(Node(f"U{j}_{t}", NodeKind.DECISION))
    for t in range(T):
        for r, c in spec.a.nonzeros:
            arcs.append((f"X{c}_{t}", f"X{r}_{t + 1}"))
        for r, c in spec.b.nonzeros:
            arcs.append((f"U{c}_{t}", f"X{r}_{t + 1}"))
    if spec.c is not None:
        for k in range(spec.p):
            for t in range(1, T + 1):
                nodes.append(Node(f"Y{k}_{t}", NodeKind.DETERMINISTIC, spec.outputs_observed))
        for t in range(1, T + 1):
            for r, c in spec.c.nonzeros:
                arcs.append((f"X{c}_{t}", f"Y{r}_{t}"))
    return InfluenceDiagram(nodes, arcs, meta={"origin": "unroll"})


def spec_from_document(doc: dict) -> UnrollSpec:
    """Read the JSON spec format: 0-based ``[row, col]`` nonzero lists for A, B and optional C."""
    try:
        n, m, T = int(doc["n"]), int(doc.get("m", 0)), int(doc["T"])
        a = PatternMatrix.of(n, n, doc.get("A", []))
        b = PatternMatrix.of(n, m, doc.get("B", []))
        c = None
        if "C" in doc:
            entries = [tuple(e) for e in doc["C"]]
            p = int(doc["p"]) if "p" in doc else max((r for r, _ in entries), default=-1) + 1
            c = PatternMatrix.of(p, n, entries)
        return UnrollSpec(
            a=a,
            b=b,
            horizon=T,
            c=c,
            initial_observed=bool(doc.get("initial_observed", False)),
            outputs_observed=bool(doc.get("outputs_observed", True)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UnrollError):
            raise
        raise UnrollError(f"malformed unroll spec: {exc}") from None


def parse_unroll_spec(text: str) -> UnrollSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UnrollError(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UnrollError("unroll spec must be a JSON object")
    return spec_from_document(doc)


# The three-product factory: X is bought, Y is made from X, Y or Z, Z is made from X.
FACTORY = {"n": 3, "m": 1, "A": [[1, 0], [1, 1], [1, 2], [2, 0]], "B": [[0, 0]], "T": 3, "initial_observed": True}
