"""Command-line front end.

Exit status: 0 success, 1 domain or parse error, 2 internal invariant
breach, 3 when ``axiom check`` finds witnesses, 64 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .axioms import AXIOMS, check_axiom, classify_invariance, invariance_pool, standard_pool
from .canonical import audit_trace, canonicalize_linear, linearize_ties
from .core import Domain, classify_domain
from .data import load_election, scan_irv_violations, scan_minimax_divergence, to_lobi
from .errors import InvariantBreach, VotingError
from .fixtures import FIXTURE_FILES, fixture_path
from .margins import margin_graph, margins, smith_set, winning_votes_graph
from .rules import all_rules, get_rule

DATA_ENV = "MARGINRULES_DATA_DIR"
ELECTION_SUFFIXES = {".soi", ".toi", ".csv"}

EXIT_OK, EXIT_DOMAIN, EXIT_BREACH, EXIT_WITNESS, EXIT_USAGE = 0, 1, 2, 3, 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def resolve_input(name: str) -> Path:
    """A path as given, else under the data directory, else a bundled fixture file."""
    path = Path(name)
    if path.exists():
        return path
    data_dir = os.environ.get(DATA_ENV)
    if data_dir and (Path(data_dir) / name).exists():
        return Path(data_dir) / name
    bundled = {f: n for n, f in FIXTURE_FILES.items()}
    if name in bundled:
        return Path(str(fixture_path(bundled[name])))
    raise FileNotFoundError(f"no such election file: {name}")


def load_profile(name: str):
    return to_lobi(load_election(resolve_input(name)))


def _expand(paths) -> list[Path]:
    if not paths:
        data_dir = os.environ.get(DATA_ENV)
        if not data_dir:
            raise FileNotFoundError(f"give election files or set {DATA_ENV}")
        paths = [data_dir]
    out = []
    for name in paths:
        path = Path(name) if Path(name).exists() else resolve_input(name)
        if path.is_dir():
            out.extend(sorted(p for p in path.iterdir() if p.suffix.lower() in ELECTION_SUFFIXES))
        else:
            out.append(path)
    return out


def _fmt_set(s) -> str:
    return ", ".join(sorted(s))


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, indent=1) + "\n")


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_rules_run(args) -> int:
    rule = get_rule(args.rule)
    p = load_profile(args.profile)
    winners = rule(p)
    if args.format == "json":
        _emit_json({"rule": rule.name, "winners": sorted(winners)})
    else:
        print(f"winners: {_fmt_set(winners)}")
    return EXIT_OK


def cmd_rules_list(args) -> int:
    for name, rule in sorted(all_rules().items()):
        tag = " margin-based" if rule.margin_based else ""
        print(f"{name}\t{rule.domain.name.lower()}{tag}")
    return EXIT_OK


def cmd_margins(args) -> int:
    p = load_profile(args.profile)
    m = margins(p)
    if args.format == "json":
        _emit_json(m.to_json())
    else:
        for x, y, v in m.positive_entries():
            print(f"{x} -> {y}: {v}")
    return EXIT_OK


def cmd_graph(args) -> int:
    p = load_profile(args.profile)
    g = margin_graph(p) if args.kind == "margin" else winning_votes_graph(p)
    if args.dot:
        sys.stdout.write(g.to_dot("margins" if args.kind == "margin" else "winning_votes"))
    else:
        for x, y, w in g.edges:
            print(f"{x} -> {y}: {w}")
    return EXIT_OK


def cmd_smith(args) -> int:
    p = load_profile(args.profile)
    print(f"smith: {_fmt_set(smith_set(p))}")
    return EXIT_OK


def cmd_axiom_check(args) -> int:
    rule = get_rule(args.rule)
    source = [load_profile(f) for f in args.profile] if args.profile else None
    if args.pool == "standard" and source is None:
        source = standard_pool(args.seed)
    report = check_axiom(rule, args.axiom, source=source, budget=args.budget, seed=args.seed,
                         max_coalition=args.max_coalition)
    out = report.to_json()
    out["seed"] = args.seed
    out["budget"] = args.budget
    out["witness_count"] = len(report.witnesses)
    out["witnesses"] = out["witnesses"][:args.max_witnesses]
    _emit_json(out)
    return EXIT_WITNESS if report.witnesses else EXIT_OK


def cmd_classify(args) -> int:
    rule = get_rule(args.rule)
    pool = invariance_pool(args.seed, bases=args.bases)
    if args.profile:
        pool = [load_profile(f) for f in args.profile] + pool
    out = classify_invariance(rule, pool).to_json()
    out["seed"] = args.seed
    _emit_json(out)
    return EXIT_OK


def cmd_canonicalize(args) -> int:
    p = load_profile(args.profile)
    if classify_domain(p) != Domain.LINEAR:
        if not args.linearize:
            raise _DomainInput("profile has ties; pass --linearize to double and break them first")
        p, _ = linearize_ties(p)
    form, trace = canonicalize_linear(p)
    final = audit_trace(p, trace)
    if final != form.to_profile():
        raise InvariantBreach("replayed trace does not end at the canonical form")
    text = form.dumps()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.emit_trace:
        trace_text = trace.to_jsonl()
        target = args.trace_output or (args.output + ".trace.jsonl" if args.output else None)
        if target:
            Path(target).write_text(trace_text, encoding="utf-8")
        else:
            sys.stdout.write(trace_text)
    return EXIT_OK


class _DomainInput(VotingError):
    pass


def _elections(paths):
    items = []
    for path in _expand(paths):
        items.append((path.stem, path.read_text(encoding="utf-8")))
    return items


def cmd_scan_minimax(args) -> int:
    report = scan_minimax_divergence(_elections(args.paths), dataset=args.dataset, workers=args.workers)
    if args.format == "json":
        sys.stdout.write(report.dumps())
    else:
        sys.stdout.write(report.to_table())
    return EXIT_OK


def cmd_scan_irv(args) -> int:
    report = scan_irv_violations(_elections(args.paths), budget=args.budget, dataset=args.dataset,
                                 workers=args.workers)
    if args.format == "json":
        sys.stdout.write(report.dumps())
    else:
        print(f"# budget: {args.budget}")
        sys.stdout.write(report.to_table())
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    rule_names = sorted(all_rules())
    parser = _Parser(prog="marginrules", description="Margin-based voting rules toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    rules = sub.add_parser("rules", help="evaluate voting rules")
    rules_sub = rules.add_subparsers(dest="action", required=True, parser_class=_Parser)
    run = rules_sub.add_parser("run", help="winners of one rule on one election")
    run.add_argument("--rule", required=True, choices=rule_names)
    run.add_argument("--format", choices=["table", "json"], default="table")
    run.add_argument("profile")
    run.set_defaults(func=cmd_rules_run)
    lst = rules_sub.add_parser("list", help="registered rules")
    lst.set_defaults(func=cmd_rules_list)

    m = sub.add_parser("margins", help="positive margins")
    m.add_argument("profile")
    m.add_argument("--format", choices=["table", "json"], default="table")
    m.set_defaults(func=cmd_margins)

    g = sub.add_parser("graph", help="margin or winning-votes graph")
    g.add_argument("profile")
    g.add_argument("--kind", choices=["margin", "wv"], default="margin")
    g.add_argument("--dot", action="store_true", help="emit Graphviz DOT")
    g.set_defaults(func=cmd_graph)

    s = sub.add_parser("smith", help="Smith set")
    s.add_argument("profile")
    s.set_defaults(func=cmd_smith)

    ax = sub.add_parser("axiom", help="axiom witness search")
    ax_sub = ax.add_subparsers(dest="action", required=True, parser_class=_Parser)
    chk = ax_sub.add_parser("check", help="search for violation witnesses")
    chk.add_argument("--rule", required=True, choices=rule_names)
    chk.add_argument("--axiom", required=True, choices=sorted(AXIOMS))
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--budget", type=int, default=1000)
    chk.add_argument("--max-coalition", type=int, default=3)
    chk.add_argument("--max-witnesses", type=int, default=5)
    chk.add_argument("--pool", choices=["generated", "standard"], default="generated",
                     help="seeded random profiles, or fixtures plus random profiles")
    chk.add_argument("--profile", action="append", default=[], help="election file (repeatable)")
    chk.set_defaults(func=cmd_axiom_check)

    cl = sub.add_parser("classify", help="empirical margin / head-to-head / C2 invariance")
    cl.add_argument("--rule", required=True, choices=rule_names)
    cl.add_argument("--seed", type=int, default=0)
    cl.add_argument("--bases", type=int, default=40)
    cl.add_argument("--profile", action="append", default=[])
    cl.set_defaults(func=cmd_classify)

    can = sub.add_parser("canonicalize", help="margin-determined canonical form")
    can.add_argument("profile")
    can.add_argument("-o", "--output")
    can.add_argument("--emit-trace", action="store_true")
    can.add_argument("--trace-output")
    can.add_argument("--linearize", action="store_true", help="double and break ties first")
    can.set_defaults(func=cmd_canonicalize)

    sc = sub.add_parser("scan", help="dataset scans")
    sc_sub = sc.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, func in (("minimax", cmd_scan_minimax), ("irv", cmd_scan_irv)):
        p = sc_sub.add_parser(name)
        p.add_argument("paths", nargs="*", help=f"files or directories (default ${DATA_ENV})")
        p.add_argument("--format", choices=["table", "json"], default="table")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--dataset", default="dataset")
        if name == "irv":
            p.add_argument("--budget", type=int, default=3)
        p.set_defaults(func=func)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantBreach as exc:
        print(f"error: invariant breach: {exc}", file=sys.stderr)
        return EXIT_BREACH
    except (VotingError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
