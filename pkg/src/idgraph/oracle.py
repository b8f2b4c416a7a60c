"""Numeric cross-check: random linear members of a diagram's structure class.

Each functional node is a linear combination of its parents, each
probabilistic node additionally gets its own noise variable, decisions are
free. Observability and controllability then become rank questions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import Arc, InfluenceDiagram, NodeKind

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
COEFF_MIN, COEFF_MAX = 0.1, 2.0
# ranks must agree across this factor either side of the tolerance
_MARGIN = 1e2


class IndeterminateRank(ArithmeticError):
    """A rank decision sat too close to the tolerance, at the original and the resampled seed."""


@dataclass(frozen=True)
class LinearInstantiation:
    diagram: InfluenceDiagram
    seed: int
    coefficients: dict[Arc, float]
    noise_terms: dict[str, str]


def derive_seed(seed: int) -> int:
    return (seed * 6364136223846793005 + 1442695040888963407) % 2**63


def instantiate_linear(d: InfluenceDiagram, seed: int) -> LinearInstantiation:
    rng = np.random.default_rng(seed)
    arcs = sorted(d.arcs)
    mags = rng.uniform(COEFF_MIN, COEFF_MAX, size=len(arcs))
    signs = rng.choice([-1.0, 1.0], size=len(arcs))
    coefficients = {arc: float(s * m) for arc, s, m in zip(arcs, signs, mags)}
    noise = {v: f"noise:{v}" for v in d.of_kind(NodeKind.PROBABILISTIC)}
    return LinearInstantiation(d, seed, coefficients, noise)


def rank(matrix, tol: float = DEFAULT_TOL) -> int:
    """Numeric rank by Gaussian elimination with partial pivoting.

    A pivot counts as zero when it is at most ``tol`` times the largest
    absolute entry of the input.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.size == 0:
        return 0
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = float(np.abs(a).max())
    if scale == 0.0:
        return 0
    threshold = tol * scale
    n_rows, n_cols = a.shape
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        piv = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[piv, c]) <= threshold:
            continue
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        factors = a[r + 1 :, c] / a[r, c]
        a[r + 1 :, c:] -= np.outer(factors, a[r, c:])
        r += 1
    return r


def _stable_rank(matrix, tol: float) -> int | None:
    lo, hi = rank(matrix, tol / _MARGIN), rank(matrix, tol * _MARGIN)
    return lo if lo == hi else None


def _equation_system(inst: LinearInstantiation) -> tuple[list[str], np.ndarray]:
    """Rows: one equation per non-decision node. Columns: node variables then noise variables."""
    d = inst.diagram
    variables = d.ids() + [inst.noise_terms[v] for v in sorted(inst.noise_terms)]
    col = {name: i for i, name in enumerate(variables)}
    rows = []
    for v in d.ids():
        kind = d.kind(v)
        if kind is NodeKind.DECISION:
            continue
        row = np.zeros(len(variables))
        row[col[v]] = 1.0
        for p in d.parents(v):
            row[col[p]] -= inst.coefficients[(p, v)]
        if kind is NodeKind.PROBABILISTIC:
            row[col[inst.noise_terms[v]]] = -1.0
        rows.append(row)
    return variables, np.array(rows).reshape(len(rows), len(variables))


def _observable_once(inst: LinearInstantiation, known: set[str], query: str, tol: float) -> bool | None:
    variables, system = _equation_system(inst)
    unknown_cols = [i for i, name in enumerate(variables) if name not in known]
    reduced = system[:, unknown_cols]
    target = np.zeros((1, len(unknown_cols)))
    target[0, unknown_cols.index(variables.index(query))] = 1.0
    base = _stable_rank(reduced, tol)
    extended = _stable_rank(np.vstack([reduced, target]), tol)
    if base is None or extended is None:
        return None
    return base == extended


def numeric_observable(
    inst: LinearInstantiation,
    observed: Iterable[str],
    query: str,
    *,
    decisions_known: bool = False,
    tol: float = DEFAULT_TOL,
) -> bool:
    """Is ``query`` uniquely determined by the observed values in this instantiation?"""
    d = inst.diagram
    known = set(observed)
    if query in known:
        raise ValueError(f"{query!r} is itself observed")
    if decisions_known:
        known.update(d.decisions())
    answer = _observable_once(inst, known, query, tol)
    if answer is None:
        retry = instantiate_linear(d, derive_seed(inst.seed))
        answer = _observable_once(retry, known, query, tol)
        if answer is None:
            log.error("indeterminate observability rank for %s at seeds %d and %d", query, inst.seed, retry.seed)
            raise IndeterminateRank(f"{query}: seeds {inst.seed}, {retry.seed}")
    return answer


def sensitivity_matrix(
    inst: LinearInstantiation, decisions: Iterable[str], targets: Iterable[str], known: Iterable[str] = ()
) -> np.ndarray:
    """d(targets)/d(decisions) by forward substitution, with ``known`` nodes held fixed."""
    d = inst.diagram
    decisions = sorted(decisions)
    held = set(known)
    col = {x: i for i, x in enumerate(decisions)}
    grad: dict[str, np.ndarray] = {}
    for v in d.topological_order():
        g = np.zeros(len(decisions))
        if v in col:
            g[col[v]] = 1.0
        elif v not in held and d.kind(v) is not NodeKind.DECISION:
            for p in d.parents(v):
                g += inst.coefficients[(p, v)] * grad[p]
        grad[v] = g
    return np.array([grad[t] for t in targets]).reshape(len(list(targets)), len(decisions))


def _controllable_once(inst, decisions, targets, known, tol) -> bool | None:
    s = sensitivity_matrix(inst, decisions, targets, known)
    norms = np.abs(s).max(axis=1, keepdims=True) if s.size else np.zeros((len(targets), 1))
    s = np.divide(s, norms, out=np.zeros_like(s), where=norms > 0)
    r = _stable_rank(s, tol)
    return None if r is None else r == len(targets)


def numeric_controllable(
    inst: LinearInstantiation,
    decisions: Iterable[str],
    targets: Iterable[str],
    known: Iterable[str] = (),
    *,
    tol: float = DEFAULT_TOL,
) -> bool:
    """Does the sensitivity of ``targets`` to ``decisions`` have full row rank?"""
    decisions, targets, known = sorted(set(decisions)), list(targets), set(known)
    if set(decisions) & set(targets):
        raise ValueError("targets must be disjoint from decisions")
    if not targets:
        return True
    if not decisions:
        return False
    answer = _controllable_once(inst, decisions, targets, known, tol)
    if answer is None:
        retry = instantiate_linear(inst.diagram, derive_seed(inst.seed))
        answer = _controllable_once(retry, decisions, targets, known, tol)
        if answer is None:
            log.error("indeterminate controllability rank at seeds %d and %d", inst.seed, retry.seed)
            raise IndeterminateRank(f"seeds {inst.seed}, {retry.seed}")
    return answer
