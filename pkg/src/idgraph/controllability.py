"""Structural controllability of target sets.

A target set is certified controllable by exhibiting node-disjoint paths of
deterministic nodes from distinct decisions to the targets, together with a
justification for every off-path parent of a path node: either it is
observable, or it can itself be controlled by decisions the paths do not
use. Failing to find such a certificate within the retry budget is reported
as inconclusive, since the criterion is only sufficient.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .flow import FlowNetwork, Path, enumerate_alternative_path_sets, max_flow, SOURCE
from .model import InfluenceDiagram, NodeKind
from .observability import observability_closure

DEFAULT_RETRY_LIMIT = 100
DEFAULT_MAX_DEPTH = 3

UNROLL_NOTE = (
    "diagram was unrolled from a stationary dynamic system; replicated relations can be mutually "
    "dependent and the additional global nimbleness check for that case is not performed"
)


class Verdict(str, enum.Enum):
    CONTROLLABLE = "controllable"
    NOT_CONTROLLABLE = "not_controllable"
    INCONCLUSIVE = "inconclusive"


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class ControlQuery:
    targets: tuple[str, ...]
    allowed_decisions: frozenset[str] | None = None  # None means every decision

    @classmethod
    def of(cls, targets: Iterable[str], allowed_decisions: Iterable[str] | None = None) -> ControlQuery:
        return cls(tuple(targets), None if allowed_decisions is None else frozenset(allowed_decisions))

    def resolve(self, d: InfluenceDiagram) -> frozenset[str]:
        """Check the query against ``d``; returns the allowed decision set."""
        if not self.targets:
            raise QueryError("at least one target is required")
        for t in self.targets:
            if t not in d:
                raise QueryError(f"unknown target {t!r}")
        dupes = sorted({t for t in self.targets if self.targets.count(t) > 1})
        if dupes:
            raise QueryError(f"target(s) listed more than once: {dupes}")
        decisions = frozenset(d.decisions())
        if self.allowed_decisions is None:
            return decisions
        for x in sorted(self.allowed_decisions):
            if x not in d:
                raise QueryError(f"unknown decision {x!r}")
            if x not in decisions:
                raise QueryError(f"{x!r} is not a decision node")
        return self.allowed_decisions


@dataclass(frozen=True)
class SideCondition:
    node: str
    by: str  # "observable" | "controllable"
    certificate: PathCertificate | None = None

    def to_json(self) -> dict:
        out: dict = {"node": self.node, "by": self.by}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        return out


@dataclass(frozen=True)
class PathCertificate:
    paths: tuple[Path, ...]
    side_conditions: tuple[SideCondition, ...] = ()

    @property
    def sources(self) -> frozenset[str]:
        return frozenset(p[0] for p in self.paths)

    def all_sources(self) -> frozenset[str]:
        """Decisions used by the paths and, recursively, by every sub-certificate."""
        out = set(self.sources)
        for sc in self.side_conditions:
            if sc.certificate is not None:
                out |= sc.certificate.all_sources()
        return frozenset(out)

    def to_json(self) -> dict:
        return {"paths": [list(p) for p in self.paths], "side_conditions": [s.to_json() for s in self.side_conditions]}

    @classmethod
    def from_json(cls, doc: dict) -> PathCertificate:
        paths = tuple(tuple(p) for p in doc.get("paths", []))
        scs = []
        for item in doc.get("side_conditions", []):
            sub = item.get("certificate")
            scs.append(SideCondition(item["node"], item["by"], cls.from_json(sub) if sub is not None else None))
        return cls(paths, tuple(scs))


@dataclass(frozen=True)
class ControllabilityReport:
    verdict: Verdict
    certificate: PathCertificate | None = None
    reason: str | None = None
    attempts: int = 0
    max_flow: int | None = None
    required: int | None = None
    failing_node: str | None = None
    excluded_decisions: tuple[str, ...] = ()
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def controllable(self) -> bool:
        return self.verdict is Verdict.CONTROLLABLE

    def to_json(self) -> dict:
        out: dict = {"verdict": self.verdict.value}
        if self.certificate is not None:
            out.update(self.certificate.to_json())
        if self.reason is not None:
            out["reason"] = self.reason
        if self.max_flow is not None:
            out["max_flow"] = self.max_flow
            out["required"] = self.required
        if self.failing_node is not None:
            out["failing_node"] = self.failing_node
        if self.excluded_decisions:
            out["excluded_decisions"] = list(self.excluded_decisions)
        out["attempts"] = self.attempts
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def predetermined_decisions(d: InfluenceDiagram, decisions: Iterable[str]) -> set[str]:
    """Decisions with an observed descendant; their values are already fixed."""
    ancestors = d.ancestors(d.observed())
    return {x for x in decisions if x in ancestors}


def side_condition_known(d: InfluenceDiagram) -> frozenset[str]:
    """Nodes whose values are available while the controller acts: the
    observability closure with every decision's value in hand."""
    return observability_closure(d, decisions_known=True).known


def build_flow_network(
    d: InfluenceDiagram, sources: Iterable[str], sinks: Iterable[str], excluded: Iterable[str] = ()
) -> FlowNetwork:
    return FlowNetwork(d, tuple(sorted(sources)), tuple(sorted(sinks)), frozenset(excluded))


def off_path_parents(d: InfluenceDiagram, paths: Sequence[Path]) -> list[str]:
    """P - Y: parents of path nodes (decisions contribute none) that are not on a path."""
    on_path = {v for p in paths for v in p}
    parents = {u for v in on_path for u in d.structural_parents(v)}
    return sorted(parents - on_path)


@dataclass(frozen=True)
class SideConditionResult:
    ok: bool
    justifications: tuple[SideCondition, ...] = ()
    failing_node: str | None = None
    reason: str | None = None


def check_side_conditions(
    d: InfluenceDiagram,
    paths: Sequence[Path],
    used_decisions: Iterable[str],
    budget: int = DEFAULT_MAX_DEPTH,
    *,
    allowed_decisions: Iterable[str] | None = None,
    retry_limit: int = DEFAULT_RETRY_LIMIT,
    known: frozenset[str] | None = None,
) -> SideConditionResult:
    """Justify every off-path parent, first by observability, then by
    recursively controlling it with decisions not yet used."""
    known = side_condition_known(d) if known is None else known
    used = set(used_decisions)
    pool = set(d.decisions() if allowed_decisions is None else allowed_decisions)
    out: list[SideCondition] = []
    for p in off_path_parents(d, paths):
        if p in known:
            out.append(SideCondition(p, "observable"))
            continue
        if not d.kind(p).is_functional:
            return SideConditionResult(False, tuple(out), p, "side_condition_unobservable")
        if budget <= 0:
            return SideConditionResult(False, tuple(out), p, "recursion_limit")
        sub = _check(d, (p,), frozenset(pool - used), retry_limit, budget - 1, known)
        if not sub.controllable:
            reason = "recursion_limit" if sub.reason == "recursion_limit" else "side_condition_unobservable"
            return SideConditionResult(False, tuple(out), p, reason)
        assert sub.certificate is not None
        used |= sub.certificate.all_sources()
        out.append(SideCondition(p, "controllable", sub.certificate))
    return SideConditionResult(True, tuple(out))


def check_controllability(
    d: InfluenceDiagram,
    q: ControlQuery,
    *,
    retry_limit: int = DEFAULT_RETRY_LIMIT,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> ControllabilityReport:
    allowed = q.resolve(d)
    if retry_limit < 1:
        raise QueryError("retry limit must be at least 1")
    report = _check(d, q.targets, allowed, retry_limit, max_depth, None)
    if d.meta.get("origin") == "unroll":
        report = replace(report, notes=report.notes + (UNROLL_NOTE,))
    return report


def _check(
    d: InfluenceDiagram,
    targets: Sequence[str],
    allowed: frozenset[str],
    retry_limit: int,
    depth: int,
    known: frozenset[str] | None,
) -> ControllabilityReport:
    probabilistic = [t for t in targets if d.kind(t) is NodeKind.PROBABILISTIC]
    if probabilistic:
        return ControllabilityReport(Verdict.NOT_CONTROLLABLE, reason="probabilistic_target", failing_node=probabilistic[0])

    # a decision is controllable by itself; it then serves as its own source
    direct = sorted(t for t in targets if d.kind(t) is NodeKind.DECISION)
    trivial = [(t,) for t in direct]
    remaining = sorted(t for t in targets if d.kind(t) is not NodeKind.DECISION)
    pool = allowed - set(direct)
    if not remaining:
        return ControllabilityReport(Verdict.CONTROLLABLE, PathCertificate(tuple(trivial)), attempts=1)

    if len(pool) < len(remaining):
        return ControllabilityReport(
            Verdict.NOT_CONTROLLABLE, reason="insufficient_decisions", max_flow=len(pool), required=len(remaining)
        )

    excluded = predetermined_decisions(d, pool)
    sources = pool - excluded
    net = build_flow_network(d, sources, remaining)
    value = sum(max_flow(net).get(SOURCE, {}).values())
    if value < len(remaining):
        return ControllabilityReport(
            Verdict.NOT_CONTROLLABLE,
            reason="insufficient_disjoint_paths",
            max_flow=value,
            required=len(remaining),
            excluded_decisions=tuple(sorted(excluded)),
        )

    known = side_condition_known(d) if known is None else known
    failures: set[str] = set()
    attempts = 0
    last = SideConditionResult(False)
    for paths in enumerate_alternative_path_sets(net, failures, retry_limit):
        attempts += 1
        used = {p[0] for p in paths} | set(direct)
        last = check_side_conditions(
            d, paths, used, depth, allowed_decisions=allowed, retry_limit=retry_limit, known=known
        )
        if last.ok:
            cert = PathCertificate(tuple(trivial) + tuple(sorted(paths)), last.justifications)
            return ControllabilityReport(
                Verdict.CONTROLLABLE, cert, attempts=attempts, excluded_decisions=tuple(sorted(excluded))
            )
        failures.update(v for p in paths for v in p[1:] if last.failing_node in d.parents(v))
    return ControllabilityReport(
        Verdict.INCONCLUSIVE,
        reason=last.reason or "retry_budget_exhausted",
        attempts=attempts,
        failing_node=last.failing_node,
        excluded_decisions=tuple(sorted(excluded)),
    )


def verify_certificate(
    d: InfluenceDiagram, q: ControlQuery, cert: PathCertificate, *, known: frozenset[str] | None = None
) -> bool:
    return not certificate_problems(d, q, cert, known=known)


def certificate_problems(
    d: InfluenceDiagram, q: ControlQuery, cert: PathCertificate, *, known: frozenset[str] | None = None
) -> list[str]:
    """Re-check a certificate from scratch; returns the list of violated conditions."""
    try:
        allowed = q.resolve(d)
    except QueryError as exc:
        return [str(exc)]
    known = side_condition_known(d) if known is None else known
    return _problems(d, tuple(q.targets), allowed, cert, known)


def _problems(
    d: InfluenceDiagram, targets: tuple[str, ...], allowed: frozenset[str], cert: PathCertificate, known: frozenset[str]
) -> list[str]:
    problems: list[str] = []
    paths = cert.paths
    if len(paths) != len(targets):
        problems.append(f"{len(paths)} paths for {len(targets)} targets")
    if any(len(p) == 0 for p in paths):
        return problems + ["empty path"]
    if sorted(p[-1] for p in paths) != sorted(targets):
        problems.append("path endpoints do not match the targets")
    sources = [p[0] for p in paths]
    if len(set(sources)) != len(sources):
        problems.append("paths share a source decision")
    predetermined = predetermined_decisions(d, sources)
    for p in paths:
        s = p[0]
        if s not in d or d.kind(s) is not NodeKind.DECISION:
            problems.append(f"source {s!r} is not a decision")
        elif len(p) == 1:
            continue  # a decision target controls itself
        elif s not in allowed:
            problems.append(f"source {s!r} is not an allowed decision")
        elif s in predetermined:
            problems.append(f"source {s!r} is an ancestor of an observed node")
    seen: set[str] = set()
    for p in paths:
        for v in p:
            if v in seen:
                problems.append(f"paths are not node-disjoint at {v!r}")
            seen.add(v)
            if v not in d:
                problems.append(f"unknown node {v!r}")
        if any(v not in d for v in p):
            continue
        for u, v in zip(p, p[1:]):
            if (u, v) not in d.arcs:
                problems.append(f"{u!r} -> {v!r} is not an arc")
        for v in p[1:]:
            if not d.kind(v).is_functional:
                problems.append(f"path node {v!r} is not deterministic")
            elif d.nodes[v].observed:
                problems.append(f"path node {v!r} is observed")
    if problems:
        return problems

    expected = off_path_parents(d, paths)
    covered = [sc.node for sc in cert.side_conditions]
    if sorted(covered) != expected:
        problems.append(f"side conditions cover {sorted(covered)}, expected {expected}")
    used = set(sources)
    for sc in cert.side_conditions:
        if sc.by == "observable":
            if sc.node not in known:
                problems.append(f"{sc.node!r} is claimed observable but is not")
        elif sc.by == "controllable":
            if sc.certificate is None:
                problems.append(f"{sc.node!r} is claimed controllable without a certificate")
                continue
            pool = allowed - used
            sub = _problems(d, (sc.node,), frozenset(pool), sc.certificate, known)
            problems.extend(f"{sc.node}: {msg}" for msg in sub)
            used |= sc.certificate.all_sources()
        else:
            problems.append(f"unknown justification {sc.by!r} for {sc.node!r}")
    return problems
