"""Command-line front end.

Exit codes: 0 success / bounds hold, 1 property violation or bound not
applicable, 2 input or parse error, 3 infeasible, 4 size cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import generators
from .errors import Infeasible, InputError, MinimalDependencyRequired, TooLarge
from .fileformat import RATIONAL_PATTERN, load_instance, serialize_instance
from .model import Instance, as_rational
from .policies import (
    combined_max_policy,
    cover_greedy,
    prepare_cover_instance,
    render_tree,
    traces,
    worst_case_cost,
    worst_case_value,
)
from .verification import (
    check_pointwise_submodular,
    check_properties,
    cover_ratio_report,
    max_ratio_report,
    optimal_budgeted_value,
    optimal_cover_cost,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_TOO_LARGE = range(5)

_PROPERTY_PHRASE = {
    "worst-case-monotone": "worst-case monotonicity fails",
    "worst-case-submodular": "worst-case submodularity fails",
    "minimal-dependency": "minimal dependency fails",
}


def fmt(value: Fraction) -> str:
    """Exact report form, always p/q."""
    return f"{value.numerator}/{value.denominator}"


def fmt_bound(value: float) -> str:
    return format(value, ".12g")


@dataclass
class RunReport:
    command: List[str]
    digest: Optional[Instance] = None
    rows: List[Tuple[str, str, str]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    trees: List[Tuple[str, str]] = field(default_factory=list)
    exit_status: int = EXIT_OK

    def add(self, section: str, key: str, value) -> None:
        if isinstance(value, Fraction):
            value = fmt(value)
        elif isinstance(value, bool):
            value = "PASS" if value else "FAIL"
        elif isinstance(value, float):
            value = fmt_bound(value)
        self.rows.append((section, key, str(value)))

    def _digest_rows(self) -> List[Tuple[str, str, str]]:
        if self.digest is None:
            return []
        d = self.digest
        return [
            ("instance", "items", str(len(d.items))),
            ("instance", "states", str(len(d.states))),
            ("instance", "realizations", str(len(d.realizations))),
        ]

    def to_text(self) -> str:
        out = ["wcasc " + " ".join(self.command)]
        if self.digest is not None:
            out.append("instance: " + self.digest.describe())
        section = None
        for sec, key, value in self.rows:
            if sec != section:
                out.append(f"[{sec}]")
                section = sec
            out.append(f"  {key}: {value}")
        for name, text in self.trees:
            out.append(f"[{name}]")
            out.append(text)
        out.extend(self.notes)
        out.append(f"exit: {self.exit_status}")
        return "\n".join(out) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["section", "key", "value"])
        w.writerow(["run", "command", " ".join(self.command)])
        w.writerows(self._digest_rows())
        w.writerows(self.rows)
        for name, text in self.trees:
            for i, line in enumerate(text.splitlines()):
                w.writerow([name, str(i), line])
        for i, note in enumerate(self.notes):
            w.writerow(["note", str(i), note])
        w.writerow(["run", "exit", str(self.exit_status)])
        return buf.getvalue()

    def render(self, fmt_name: str) -> str:
        return self.to_csv() if fmt_name == "csv" else self.to_text()


def read_csv_report(text: str) -> List[Tuple[str, str, str]]:
    """Rows of a CSV report, header dropped."""
    rows = list(csv.reader(io.StringIO(text)))
    return [tuple(r) for r in rows[1:]]


# --- subcommands ------------------------------------------------------------------


def _properties(report: RunReport, instance: Instance) -> bool:
    hold = True
    for p in check_properties(instance):
        report.add("properties", p.property, p.passed)
        if not p.passed:
            hold = False
            report.add("properties", p.property + " witness", p.witness.describe())
    return hold


def cmd_check(args, report: RunReport) -> None:
    instance = report.digest
    hold = _properties(report, instance)
    pointwise = check_pointwise_submodular(instance)
    report.add("properties", pointwise.property, pointwise.passed)
    if not pointwise.passed:
        report.add("properties", pointwise.property + " witness", pointwise.witness.describe())
    report.exit_status = EXIT_OK if hold else EXIT_VIOLATION


def cmd_cover(args, report: RunReport) -> None:
    instance = report.digest
    tree = cover_greedy(instance, args.goal)
    prepared, _ = prepare_cover_instance(instance, args.goal)
    runs = traces(prepared, tree)
    report.add("cover", "goal", args.goal)
    report.add("cover", "worst-case cost", worst_case_cost(prepared, tree))
    report.add("cover", "worst-case value", worst_case_value(prepared, tree)[0])
    report.add("cover", "fallback used", "yes" if any(t.zero_density_fallback_used for t in runs.values()) else "no")
    for rid, t in runs.items():
        path = " ".join(f"{s.item}/{s.state}" for s in t.steps) or "-"
        report.add("traces", rid, f"{path} cost={fmt(t.total_cost)} value={fmt(t.final_value)}")
    report.trees.append(("greedy tree", render_tree(tree)))


def cmd_maximize(args, report: RunReport) -> None:
    result = combined_max_policy(report.digest, args.budget)
    report.add("maximize", "budget", args.budget)
    report.add("maximize", "pruned items", " ".join(sorted(result.pruned_items)) or "-")
    report.add("maximize", "greedy value", result.greedy_value)
    report.add("maximize", "relaxed value", result.relaxed_value)
    report.add("maximize", "singleton item", result.singleton[0])
    report.add("maximize", "singleton value", result.singleton[1])
    report.add("maximize", "combined value", result.combined_value)
    report.trees.append(("greedy tree", render_tree(result.greedy_tree)))
    report.trees.append(("relaxed tree", render_tree(result.relaxed_tree)))


def cmd_oracle_cover(args, report: RunReport) -> None:
    cost, tree = optimal_cover_cost(report.digest, args.goal)
    report.add("oracle-cover", "goal", args.goal)
    report.add("oracle-cover", "optimal worst-case cost", cost)
    report.trees.append(("optimal tree", render_tree(tree)))


def cmd_oracle_max(args, report: RunReport) -> None:
    value, tree = optimal_budgeted_value(report.digest, args.budget)
    report.add("oracle-max", "budget", args.budget)
    report.add("oracle-max", "optimal worst-case value", value)
    report.trees.append(("optimal tree", render_tree(tree)))


def _not_applicable(failed: List[str]) -> str:
    return "bound not applicable (" + ", ".join(_PROPERTY_PHRASE[p] for p in failed) + ")"


def cmd_report(args, report: RunReport) -> None:
    instance = report.digest
    ok = True
    cover = cover_ratio_report(instance, args.goal)
    report.add("cover", "greedy worst-case cost", cover.greedy_metric)
    report.add("cover", "optimal worst-case cost", cover.oracle_metric)
    report.add("cover", "ratio", cover.ratio)
    report.add("cover", "eta", cover.eta)
    report.add("cover", "bound", cover.bound)
    report.add("cover", "bound satisfied", cover.bound_satisfied)
    report.add("cover", "properties hold", cover.properties_hold)
    summary = f"cover ratio {fmt(cover.ratio)}, bound {cover.bound:.3f}"
    if not cover.properties_hold:
        report.notes.append(f"{summary}, {_not_applicable(cover.failed_properties)}")
        ok = False
    else:
        report.notes.append(f"{summary}, {'bound holds' if cover.bound_satisfied else 'BOUND VIOLATED'}")
        ok = ok and cover.bound_satisfied
    if args.budget is not None:
        m = max_ratio_report(instance, args.budget)
        report.add("maximize", "combined worst-case value", m.greedy_metric)
        report.add("maximize", "optimal worst-case value", m.oracle_metric)
        report.add("maximize", "ratio", m.ratio)
        report.add("maximize", "bound", m.bound)
        report.add("maximize", "bound satisfied", m.bound_satisfied)
        report.add("maximize", "relaxed worst-case value", m.relaxed_value)
        report.add("maximize", "relaxed bound", m.relaxed_bound)
        report.add("maximize", "relaxed bound satisfied", m.relaxed_bound_satisfied)
        report.add("maximize", "singleton inequality", m.singleton_inequality_holds)
        report.add("maximize", "properties hold", m.properties_hold)
        summary = f"maximize ratio {fmt(m.ratio)}, bound {m.bound:.3f}"
        if not m.properties_hold:
            report.notes.append(f"{summary}, {_not_applicable(m.failed_properties)}")
            ok = False
        else:
            holds = m.bound_satisfied and m.relaxed_bound_satisfied and m.singleton_inequality_holds
            report.notes.append(f"{summary}, {'bound holds' if holds else 'BOUND VIOLATED'}")
            ok = ok and holds
    report.exit_status = EXIT_OK if ok else EXIT_VIOLATION


def cmd_gen(args) -> Tuple[str, Instance]:
    if args.kind == "counterexample":
        instance = generators.counterexample_instance(args.eps_a, args.eps_b, args.goal)
    else:
        config = generators.GeneratorConfig(
            seed=args.seed,
            n_items=args.items,
            n_realizations=args.realizations,
            n_elements=args.elements,
            n_states=args.states,
            cost_range=(args.cost_min, args.cost_max),
            weight_range=(args.weight_min, args.weight_max),
        )
        build = {
            "coverage": generators.random_coverage_instance,
            "identification": generators.identification_instance,
            "modular": generators.random_modular_instance,
        }[args.kind]
        instance = build(config)
    return serialize_instance(instance), instance


# --- parser -------------------------------------------------------------------------


def _rational(text: str) -> Fraction:
    """Integer or p/q, as in instance files."""
    if not RATIONAL_PATTERN.match(text):
        raise argparse.ArgumentTypeError(f"expected an integer or p/q, got {text!r}")
    try:
        return as_rational(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wcasc", description="Worst-case adaptive submodular cover and maximization.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv"), default="text")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="run the property checkers")
    p.add_argument("file")
    for name, flag, helptext in (
        ("cover", "--goal", "density-greedy cover policy"),
        ("oracle-cover", "--goal", "brute-force optimal cover cost"),
        ("maximize", "--budget", "budgeted greedy / best singleton"),
        ("oracle-max", "--budget", "brute-force optimal budgeted value"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("file")
        p.add_argument(flag, type=_rational, required=True)

    p = sub.add_parser("report", parents=[common], help="greedy vs oracle ratio reports")
    p.add_argument("file")
    p.add_argument("--goal", type=_rational, required=True)
    p.add_argument("--budget", type=_rational)

    p = sub.add_parser("gen", help="write a generated instance")
    p.add_argument("kind", choices=("counterexample", "coverage", "identification", "modular"))
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--items", type=int, default=4)
    p.add_argument("--realizations", type=int, default=4)
    p.add_argument("--elements", type=int, default=4)
    p.add_argument("--states", type=int, default=2)
    p.add_argument("--cost-min", type=int, default=1)
    p.add_argument("--cost-max", type=int, default=4)
    p.add_argument("--weight-min", type=int, default=1)
    p.add_argument("--weight-max", type=int, default=3)
    p.add_argument("--eps-a", type=_rational, default=Fraction(4))
    p.add_argument("--eps-b", type=_rational, default=Fraction(1))
    p.add_argument("--goal", type=_rational, default=Fraction(6))
    p.add_argument("-o", "--output")
    return parser


_COMMANDS = {
    "check": cmd_check,
    "cover": cmd_cover,
    "maximize": cmd_maximize,
    "oracle-cover": cmd_oracle_cover,
    "oracle-max": cmd_oracle_max,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "gen":
            text, instance = cmd_gen(args)
            if args.output:
                with open(args.output, "w", encoding="utf-8") as fh:
                    fh.write(text)
                stdout.write(f"wrote {args.output}: {instance.describe()}\n")
            else:
                stdout.write(text)
            return EXIT_OK
        report = RunReport(argv, digest=load_instance(args.file))
        _COMMANDS[args.command](args, report)
    except OSError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except InputError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except Infeasible as exc:
        stderr.write(f"infeasible: {exc}\n")
        return EXIT_INFEASIBLE
    except TooLarge as exc:
        stderr.write(f"too large: {exc}\n")
        return EXIT_TOO_LARGE
    except MinimalDependencyRequired as exc:
        stderr.write(f"property violation: {exc}\n")
        return EXIT_VIOLATION
    stdout.write(report.render(args.format))
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
