"""Command-line front end.

Exit status: 0 the queried property holds (or the command succeeded),
1 it does not, 2 inconclusive, 3 invalid input, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import controllability as ctl
from .crosscheck import cross_check
from .dot import export_dot
from .model import DiagramError, InfluenceDiagram, parse_diagram, serialize_diagram, validate
from .observability import observability_closure
from .unroll import UnrollError, parse_unroll_spec, unroll

OK, FAILS, INCONCLUSIVE, INVALID, INTERNAL = 0, 1, 2, 3, 4
VERDICT_STATUS = {ctl.Verdict.CONTROLLABLE: OK, ctl.Verdict.NOT_CONTROLLABLE: FAILS, ctl.Verdict.INCONCLUSIVE: INCONCLUSIVE}


class UsageError(Exception):
    pass


class InvalidInput(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _ids(text: str | None) -> list[str]:
    if not text:
        return []
    return [s.strip() for s in text.split(",") if s.strip()]


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str, *, check: bool = True) -> InfluenceDiagram:
    try:
        d = parse_diagram(_read(path))
    except DiagramError as exc:
        raise InvalidInput(str(exc)) from None
    if check:
        report = validate(d)
        if not report.ok:
            raise InvalidInput("; ".join(v.message for v in report.violations))
    return d


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    d = _load(args.model, check=False)
    report = validate(d)
    if args.json:
        sys.stdout.write(_dump(report.to_json()))
    elif report.ok:
        print(f"ok: {len(d)} nodes, {len(d.arcs)} arcs")
    else:
        for v in report.violations:
            print(f"{v.code}: {v.message}")
    return OK if report.ok else INVALID


def cmd_observe(args) -> int:
    d = _load(args.model)
    extra = _ids(args.observed)
    if args.query and args.query not in d:
        raise InvalidInput(f"unknown query node {args.query!r}")
    try:
        observed = set(d.observed()) | set(extra)
        report = observability_closure(d, observed, decisions_known=args.decisions_known)
    except KeyError as exc:
        raise InvalidInput(str(exc.args[0])) from None
    if args.json:
        sys.stdout.write(_dump(report.to_json()))
    else:
        print("known:      " + ", ".join(sorted(report.known_initial)))
        print("observable: " + ", ".join(sorted(report.observable)))
        print("unknown:    " + ", ".join(sorted(report.unknown)))
        for f in report.trace:
            via = f" via {', '.join(f'{p}->{c}' for p, c in f.matching)}" if f.matching else ""
            print(f"  {f.rule.value}: {', '.join(f.children)} => {', '.join(f.newly_known)}{via}")
        for kids, parents in report.redundancy_warnings:
            print(f"  redundant: {', '.join(kids)} over-determine {', '.join(parents)}")
    if args.query:
        return OK if args.query in report.known else FAILS
    return OK


def _query(args, d: InfluenceDiagram) -> ctl.ControlQuery:
    targets = _ids(args.targets)
    decisions = _ids(args.decisions) if getattr(args, "decisions", None) else None
    q = ctl.ControlQuery.of(targets, decisions)
    try:
        q.resolve(d)
    except ctl.QueryError as exc:
        raise InvalidInput(str(exc)) from None
    return q


def cmd_control(args) -> int:
    d = _load(args.model)
    q = _query(args, d)
    try:
        report = ctl.check_controllability(d, q, retry_limit=args.retry_limit, max_depth=args.max_depth)
    except ctl.QueryError as exc:
        raise InvalidInput(str(exc)) from None
    if args.json:
        sys.stdout.write(_dump(report.to_json()))
    else:
        print(f"verdict: {report.verdict.value} (attempts: {report.attempts})")
        if report.certificate:
            for p in report.certificate.paths:
                print("  path: " + " -> ".join(p))
            for sc in report.certificate.side_conditions:
                print(f"  side condition: {sc.node} {sc.by}")
        if report.reason:
            print(f"  reason: {report.reason}")
        if report.max_flow is not None:
            print(f"  disjoint paths: {report.max_flow} of {report.required}")
        if report.failing_node:
            print(f"  failing node: {report.failing_node}")
        for note in report.notes:
            print(f"  note: {note}")
    return VERDICT_STATUS[report.verdict]


def cmd_unroll(args) -> int:
    try:
        spec = parse_unroll_spec(_read(args.spec))
    except UnrollError as exc:
        raise InvalidInput(str(exc)) from None
    _write(serialize_diagram(unroll(spec)), args.output)
    return OK


def cmd_verify(args) -> int:
    d = _load(args.model)
    q = _query(args, d)
    try:
        cert = ctl.PathCertificate.from_json(json.loads(_read(args.certificate)))
    except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
        raise InvalidInput(f"malformed certificate: {exc}") from None
    problems = ctl.certificate_problems(d, q, cert)
    if args.json:
        sys.stdout.write(_dump({"valid": not problems, "problems": problems}))
    elif problems:
        for p in problems:
            print(f"invalid: {p}")
    else:
        print("certificate valid")
    return FAILS if problems else OK


def _default_seed() -> int:
    raw = os.environ.get("IDGRAPH_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise InvalidInput(f"IDGRAPH_SEED must be an integer, got {raw!r}") from None


def cmd_cross_check(args) -> int:
    d = _load(args.model)
    base = args.seed if args.seed is not None else _default_seed()
    targets = _ids(args.targets) or None
    if targets:
        _query(args, d)
    summary = cross_check(d, [base + i for i in range(args.seeds)], targets=targets)
    if args.json:
        sys.stdout.write(_dump(summary.to_json()))
    else:
        print(f"seeds: {summary.seeds[0]}..{summary.seeds[-1]}" if summary.seeds else "seeds: none")
        print("structurally observable: " + ", ".join(summary.structural_observable))
        print("numerically determined:  " + ", ".join(summary.numeric_observable))
        rate = summary.completeness
        print("completeness: " + ("n/a" if rate is None else f"{rate:.3f}"))
        if summary.control:
            print(f"control: {summary.control['verdict']}, numeric full rank {summary.control['numeric_full_rank']}")
        for v in summary.soundness_violations:
            print(f"SOUNDNESS VIOLATION: {v}")
        if summary.unstable:
            print("unstable across seeds: " + ", ".join(summary.unstable))
    return OK if summary.sound else FAILS


def cmd_dot(args) -> int:
    d = _load(args.model)
    annotations = None
    if args.report:
        try:
            annotations = json.loads(_read(args.report))
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"malformed report: {exc}") from None
    try:
        text = export_dot(d, annotations)
    except TypeError as exc:
        raise InvalidInput(str(exc)) from None
    _write(text, args.output)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="idgraph", description="Structural observability and controllability of influence diagrams.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="check a diagram for structural problems")
    s.add_argument("model")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("observe", help="structural observability closure")
    s.add_argument("model")
    s.add_argument("--observed", help="comma-separated ids to mark observed, on top of the file's flags")
    s.add_argument("--query", help="exit 0 if this node is known or observable, 1 otherwise")
    s.add_argument("--decisions-known", action="store_true", help="treat decisions as already made")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_observe)

    s = sub.add_parser("control", help="structural controllability of a target set")
    s.add_argument("model")
    s.add_argument("--targets", required=True)
    s.add_argument("--decisions", help="comma-separated decisions that may be used (default: all)")
    s.add_argument("--retry-limit", type=int, default=ctl.DEFAULT_RETRY_LIMIT)
    s.add_argument("--max-depth", type=int, default=ctl.DEFAULT_MAX_DEPTH)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_control)

    s = sub.add_parser("unroll", help="unroll a state-space pattern into a diagram")
    s.add_argument("spec")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_unroll)

    s = sub.add_parser("verify", help="re-check a controllability certificate")
    s.add_argument("model")
    s.add_argument("--certificate", required=True)
    s.add_argument("--targets", required=True)
    s.add_argument("--decisions")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("cross-check", help="compare structural verdicts with random linear instances")
    s.add_argument("model")
    s.add_argument("--seeds", type=int, default=5)
    s.add_argument("--seed", type=int, help="first seed (default: $IDGRAPH_SEED or 0)")
    s.add_argument("--targets", help="also cross-check controllability of these targets")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_cross_check)

    s = sub.add_parser("dot", help="Graphviz export")
    s.add_argument("model")
    s.add_argument("--report", help="observability or controllability report JSON to highlight")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_dot)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return INVALID
    except InvalidInput as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
