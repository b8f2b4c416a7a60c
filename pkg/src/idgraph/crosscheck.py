"""Structural verdicts versus the numeric rank oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .controllability import ControlQuery, check_controllability, off_path_parents, predetermined_decisions
from .model import InfluenceDiagram, NodeKind
from .observability import observability_closure
from .oracle import instantiate_linear, numeric_controllable, numeric_observable


@dataclass
class CrossCheckSummary:
    seeds: list[int]
    structural_observable: list[str] = field(default_factory=list)
    numeric_observable: list[str] = field(default_factory=list)
    unstable: list[str] = field(default_factory=list)
    soundness_violations: list[dict] = field(default_factory=list)
    control: dict | None = None

    @property
    def completeness(self) -> float | None:
        """Share of numerically determined nodes that the structural rules also find."""
        if not self.numeric_observable:
            return None
        hit = set(self.numeric_observable) & set(self.structural_observable)
        return len(hit) / len(self.numeric_observable)

    @property
    def sound(self) -> bool:
        return not self.soundness_violations

    def to_json(self) -> dict:
        return {
            "seeds": self.seeds,
            "structural_observable": self.structural_observable,
            "numeric_observable": self.numeric_observable,
            "unstable": self.unstable,
            "completeness": self.completeness,
            "soundness_violations": self.soundness_violations,
            "control": self.control,
        }


def cross_check(
    d: InfluenceDiagram,
    seeds: Sequence[int],
    *,
    targets: Sequence[str] | None = None,
    decisions_known: bool = False,
) -> CrossCheckSummary:
    report = observability_closure(d, decisions_known=decisions_known)
    summary = CrossCheckSummary(seeds=list(seeds), structural_observable=sorted(report.observable))
    insts = [instantiate_linear(d, s) for s in seeds]
    for v in d.ids():
        if v in report.known_initial:
            continue
        answers = [numeric_observable(inst, report.known_initial, v) for inst in insts]
        if len(set(answers)) > 1:
            summary.unstable.append(v)
        if all(answers):
            summary.numeric_observable.append(v)
        if v in report.observable:
            for inst, ok in zip(insts, answers):
                if not ok:
                    summary.soundness_violations.append({"property": "observable", "node": v, "seed": inst.seed})

    if targets:
        ctrl = check_controllability(d, ControlQuery.of(targets))
        plain = [t for t in targets if d.kind(t) is not NodeKind.DECISION]
        if ctrl.controllable:
            assert ctrl.certificate is not None
            paths = [p for p in ctrl.certificate.paths if len(p) > 1]
            sources = [p[0] for p in paths]
            held = off_path_parents(d, paths)
        else:
            decisions = [x for x in d.decisions() if x not in targets]
            sources = sorted(set(decisions) - predetermined_decisions(d, decisions))
            held = []
        numeric = [numeric_controllable(inst, sources, plain, held) for inst in insts]
        if ctrl.controllable:
            for inst, ok in zip(insts, numeric):
                if not ok:
                    summary.soundness_violations.append({"property": "controllable", "targets": list(targets), "seed": inst.seed})
        summary.control = {"verdict": ctrl.verdict.value, "numeric_full_rank": numeric}
    return summary
