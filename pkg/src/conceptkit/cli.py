"""Command-line front end.

Subcommands: validate files, simulate an app against a script, check a
candidate against a catalog entry, run the pattern corpus, and inspect the
builtin catalog. All output is buffered and emitted in a deterministic
order; exit codes are part of the contract (0 ok, 1 error, 2 dark findings
or failed step).
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import Config, parse_config
from .model import validate_concept
from .lang import (
    SourceFile, ParseError, parse_source, parse_app, parse_ui,
    print_catalog,
)
from .lang.parser import parse_domain_spec, parse_script
from .engine import Engine, ActionCall, StepError, EngineError, build_domain
from .catalog_types import Benefit, DomainSpec
from .conformance import check, ConformanceError
from .corpus import (
    catalog_by_name, load_scenario_file, run_case, run_corpus, CorpusError,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DARK = 2

_GREEN, _RED, _RESET = "\x1b[32m", "\x1b[31m", "\x1b[0m"


class _Output:
    def __init__(self, color: bool):
        self.color = color
        self.lines = []

    def emit(self, text: str = "") -> None:
        self.lines.append(text)

    def good(self, text: str) -> None:
        self.emit(_GREEN + text + _RESET if self.color else text)

    def bad(self, text: str) -> None:
        self.emit(_RED + text + _RESET if self.color else text)

    def flush(self) -> None:
        sys.stdout.write("\n".join(self.lines) + ("\n" if self.lines else ""))


def _want_color(args) -> bool:
    if os.environ.get("CONCEPTKIT_NO_COLOR"):
        return False
    if getattr(args, "format", "text") == "lines":
        return False
    return sys.stdout.isatty()


def _build_config(args) -> Config:
    cfg = Config()
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as handle:
            cfg = parse_config(handle.read(), cfg)
    overrides = {}
    for flag, attr in (("depth", "depth"), ("max_steps", "max_steps"),
                       ("epsilon", "epsilon"), ("max_ratio", "max_ratio"),
                       ("evoke_k", "evoke_k")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[attr] = value
    if overrides:
        from dataclasses import replace
        cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------

def cmd_validate(args, out: _Output) -> int:
    status = EXIT_OK
    for path in args.paths:
        try:
            obj = parse_source(SourceFile.load(path))
        except ParseError as exc:
            out.bad("%s:%d:%d: error: %s" % (path, exc.line, exc.column,
                                             exc.message))
            status = EXIT_ERROR
            continue
        except OSError as exc:
            out.bad("%s: error: %s" % (path, exc))
            status = EXIT_ERROR
            continue
        errors = []
        if hasattr(obj, "actions"):  # a bare concept definition
            errors = validate_concept(obj)
        elif hasattr(obj, "concepts"):  # an app model
            for concept in obj.concepts:
                errors.extend(validate_concept(concept))
        elif hasattr(obj, "concept"):  # a catalog entry
            errors = validate_concept(obj.concept)
        if errors:
            for err in errors:
                out.bad("%s: error: %s" % (path, err))
            status = EXIT_ERROR
        else:
            out.good("%s: OK" % path)
    return status


def cmd_simulate(args, out: _Output) -> int:
    try:
        app = parse_app(SourceFile.load(args.app))
        domain_spec = parse_domain_spec(args.domain) if args.domain \
            else DomainSpec(())
        engine = Engine(app, build_domain(app, domain_spec))
        if args.script == "-":
            script_text = sys.stdin.read()
        else:
            with open(args.script, "r", encoding="utf-8") as handle:
                script_text = handle.read()
        calls = parse_script(script_text)
    except (ParseError, OSError, EngineError) as exc:
        out.bad("error: %s" % exc)
        return EXIT_ERROR
    state = engine.init_state()
    for role, inst, action, values in calls:
        call = ActionCall(inst, action, values, role)
        try:
            state, step = engine.step(state, call)
        except StepError as exc:
            out.bad("step failed: %s" % exc)
            return EXIT_DARK
        out.emit(step.render())
    return EXIT_OK


def cmd_check(args, out: _Output) -> int:
    cfg = _build_config(args)
    try:
        catalog = catalog_by_name()
        if args.scenario:
            case = load_scenario_file(args.scenario, catalog)
            report = run_case(case, catalog, cfg)
        else:
            if not (args.standard and args.app):
                out.bad("error: provide --scenario or --standard with --app")
                return EXIT_ERROR
            entry = catalog.get(args.standard)
            if entry is None:
                out.bad("error: unknown catalog entry '%s'" % args.standard)
                return EXIT_ERROR
            app = parse_app(SourceFile.load(args.app))
            ui = None
            if args.ui:
                ui = parse_ui(SourceFile.load(args.ui))
            domain = parse_domain_spec(args.domain) if args.domain \
                else DomainSpec(())
            overrides = []
            for item in args.override or ():
                subject, _, who = item.partition("=")
                who = who.strip()
                if who not in ("provider", "user", "neutral"):
                    out.bad("error: override %r must name provider, user, "
                            "or neutral" % item)
                    return EXIT_ERROR
                overrides.append((subject.strip(), who))
            benefit = Benefit(args.benefit, tuple(overrides))
            report = check(entry, app, ui, benefit, domain, catalog, cfg)
    except (ParseError, OSError, CorpusError, ConformanceError,
            EngineError, ValueError) as exc:
        out.bad("error: %s" % exc)
        return EXIT_ERROR
    if args.format == "lines":
        for line in report.lines():
            out.emit(line)
    else:
        for chunk in report.text().rstrip("\n").split("\n"):
            if "[DARK]" in chunk:
                out.bad(chunk)
            else:
                out.emit(chunk)
    return EXIT_DARK if report.any_dark() else EXIT_OK


def cmd_corpus(args, out: _Output) -> int:
    cfg = _build_config(args)
    try:
        report = run_corpus(cfg)
    except (ParseError, OSError, CorpusError, ConformanceError,
            EngineError) as exc:
        out.bad("error: %s" % exc)
        return EXIT_ERROR
    for result in report.results:
        if result.passed:
            out.good(result.line())
        else:
            out.bad(result.line())
    out.emit(report.summary())
    return EXIT_OK if report.all_passed() else EXIT_ERROR


def cmd_catalog(args, out: _Output) -> int:
    try:
        catalog = catalog_by_name()
    except (ParseError, OSError, CorpusError) as exc:
        out.bad("error: %s" % exc)
        return EXIT_ERROR
    if args.action == "list":
        for name in sorted(catalog):
            out.emit("%-16s %s" % (name, catalog[name].concept.purpose))
        return EXIT_OK
    entry = catalog.get(args.name)
    if entry is None:
        out.bad("error: no catalog entry named '%s'" % args.name)
        return EXIT_ERROR
    out.emit(print_catalog(entry).rstrip("\n"))
    return EXIT_OK


# ---------------------------------------------------------------------------

def _add_threshold_flags(parser) -> None:
    parser.add_argument("--depth", type=int, help="trace bound (max 8)")
    parser.add_argument("--max-steps", dest="max_steps", type=int,
                        help="reachability threshold for observed actions")
    parser.add_argument("--epsilon", type=float,
                        help="prominence tolerance for symmetry")
    parser.add_argument("--max-ratio", dest="max_ratio", type=float,
                        help="default reach-parity ratio")
    parser.add_argument("--evoke-k", dest="evoke_k", type=int,
                        help="tokens needed to evoke a concept")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--format", choices=("text", "lines"),
                        default="text", help="report format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conceptkit",
        description="Define standard concepts, simulate composed designs, "
                    "and check candidates for dark deviations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate files")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a call script against an app")
    p.add_argument("app")
    p.add_argument("--domain", default="", help="e.g. 'Item = {a, b}'")
    p.add_argument("--script", required=True,
                   help="script file, or - for stdin")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="check a candidate against a standard")
    p.add_argument("--scenario", help="run a scenario file")
    p.add_argument("--standard", help="catalog entry name")
    p.add_argument("--app", help="candidate app file")
    p.add_argument("--ui", help="candidate ui file")
    p.add_argument("--domain", default="", help="domain block")
    p.add_argument("--benefit", default="neutral",
                   choices=("provider", "user", "neutral"))
    p.add_argument("--override", action="append",
                   metavar="SUBJECT=WHO",
                   help="per-subject beneficiary override")
    _add_threshold_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("corpus", help="run the shipped pattern corpus")
    _add_threshold_flags(p)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("catalog", help="inspect the builtin catalog")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_catalog)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "command", None) == "catalog" \
            and args.action == "show" and not args.name:
        sys.stderr.write("catalog show requires a name\n")
        return EXIT_ERROR
    out = _Output(_want_color(args))
    try:
        status = args.func(args, out)
    except ValueError as exc:
        out.bad("error: %s" % exc)
        status = EXIT_ERROR
    finally:
        out.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
