"""The shipped corpus: catalog entries, cart extensions, and scenarios.

Scenarios come in two sets. `data/scenarios` holds the pattern corpus: one
dark scenario per documented pattern and one compliant counterpart each.
`data/extras` holds the case-study scenarios (suggestion-cart comparisons
and the worked cart examples). A scenario passes when the check produces
every expected deviation and the darkness verdict matches.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from .model import Ref, MapKind, validate_concept, OBSERVED_VS_EXPECTED, \
    IMPLEMENTED_VS_EXPECTED
from .lang import SourceFile, parse_catalog, parse_app, parse_ui, \
    parse_scenario
from .catalog_types import CatalogEntry, Scenario
from .ui import (
    UIModel, UIElement, Screen, TriggersAction, DisplaysState, CallTemplate,
    RequireControl, RequireDisplay, GuardedControl, EqualProminence,
    ReachParity, ConsistencyGroup,
    BUTTON, LABEL,
)
from .config import Config
from .conformance import check, DeviationReport

DATA_ROOT = os.path.join(os.path.dirname(__file__), "data")


class CorpusError(Exception):
    pass


def data_path(*parts) -> str:
    return os.path.join(DATA_ROOT, *parts)


def load_builtin_catalog() -> list:
    """Parse, validate, and variant-resolve every shipped catalog entry."""
    entries = []
    root = data_path("entries")
    for name in sorted(os.listdir(root)):
        if not name.endswith(".catalog"):
            continue
        path = os.path.join(root, name)
        entry = parse_catalog(SourceFile.load(path))
        errors = validate_concept(entry.concept)
        if errors:
            raise CorpusError("entry '%s' does not validate: %s"
                              % (entry.name, "; ".join(map(str, errors))))
        resolved = tuple(
            variant.resolved(parse_app(SourceFile.load(
                os.path.normpath(os.path.join(root, variant.path)))))
            for variant in entry.variants)
        entries.append(CatalogEntry(entry.concept, entry.independent,
                                    entry.required_syncs, entry.standards,
                                    resolved))
    by_name = {entry.name: entry for entry in entries}
    for entry in entries:
        validate_entry(entry, by_name)
    return entries


def validate_entry(entry: CatalogEntry, catalog: dict) -> None:
    """Cross-checks beyond the concept's own validation: independence
    declarations, mapping standards, and sync templates must reference
    names that exist."""
    concept = entry.concept

    def need_action(name, where):
        if concept.action(name) is None:
            raise CorpusError("entry '%s': %s references unknown action "
                              "'%s'" % (entry.name, where, name))

    for action in entry.independent:
        need_action(action, "independence declaration")
    for standard in entry.standards:
        if isinstance(standard, (RequireControl, GuardedControl)):
            need_action(standard.action, type(standard).__name__)
        elif isinstance(standard, RequireDisplay):
            if concept.component(standard.component) is None:
                raise CorpusError(
                    "entry '%s': display standard references unknown "
                    "component '%s'" % (entry.name, standard.component))
        elif isinstance(standard, (EqualProminence, ReachParity)):
            need_action(standard.action_a, type(standard).__name__)
            need_action(standard.action_b, type(standard).__name__)
        elif isinstance(standard, ConsistencyGroup):
            if concept.action(standard.subject) is None and \
                    concept.component(standard.subject) is None:
                raise CorpusError(
                    "entry '%s': consistency group references unknown "
                    "subject '%s'" % (entry.name, standard.subject))
    for rule in entry.required_syncs:
        calls = [(rule.trigger.instance, rule.trigger.action,
                  len(rule.trigger.params))]
        calls.extend((r.instance, r.action, len(r.args))
                     for r in rule.reactions)
        for concept_name, action_name, arity in calls:
            owner = entry if concept_name == entry.name \
                else catalog.get(concept_name)
            if owner is None:
                raise CorpusError(
                    "entry '%s': sync '%s' references unknown concept '%s'"
                    % (entry.name, rule.name, concept_name))
            action = owner.concept.action(action_name)
            if action is None:
                raise CorpusError(
                    "entry '%s': sync '%s' references unknown action "
                    "'%s.%s'" % (entry.name, rule.name, concept_name,
                                 action_name))
            if len(action.params) != arity:
                raise CorpusError(
                    "entry '%s': sync '%s' arity mismatch on '%s.%s'"
                    % (entry.name, rule.name, concept_name, action_name))


def catalog_by_name() -> dict:
    return {entry.name: entry for entry in load_builtin_catalog()}


def load_extensions() -> list:
    """The registered cart extensions, as (name, AppModel) pairs."""
    catalog = catalog_by_name()
    cart = catalog.get("ShoppingCart")
    if cart is None:
        raise CorpusError("no ShoppingCart entry in the builtin catalog")
    return [(variant.name, variant.app) for variant in cart.variants]


# ---------------------------------------------------------------------------
# Standard UI generation

def standard_ui(entry: CatalogEntry) -> UIModel:
    """A complete, honest interface for a standard entry: one visible,
    one-step control per required control (carrying the entry's guard) and
    one display per required display. Used for self-consistency checks."""
    guards = {s.action: s.guard for s in entry.standards
              if isinstance(s, GuardedControl)}
    pairs = {}
    for s in entry.standards:
        if isinstance(s, EqualProminence):
            pairs[s.action_a] = s.action_b
            pairs[s.action_b] = s.action_a
    elements = []
    for s in entry.standards:
        if isinstance(s, RequireControl):
            action = entry.concept.action(s.action)
            args = tuple(Ref(name) for name, _ in action.params)
            paired = "ctl_%s" % pairs[s.action] if s.action in pairs else None
            elements.append(UIElement(
                "ctl_%s" % s.action, "main", BUTTON, s.action, "control",
                TriggersAction(CallTemplate(entry.name, s.action, args),
                               guards.get(s.action), False),
                0.5, 1, True, None, paired))
        elif isinstance(s, RequireDisplay):
            comp = entry.concept.component(s.component)
            key = Ref("k") if isinstance(comp.kind, MapKind) else None
            elements.append(UIElement(
                "view_%s" % s.component, "main", LABEL, s.component, "view",
                DisplaysState(Ref(s.component, key, entry.name)),
                0.5, 1, True, None, None))
    return UIModel((Screen("main", tuple(elements)),))


# ---------------------------------------------------------------------------
# Scenario running

@dataclass(frozen=True)
class ScenarioCase:
    scenario: Scenario
    entry: CatalogEntry
    app: object
    ui: Optional[UIModel]
    path: str


def load_scenario_file(path: str, catalog: dict) -> ScenarioCase:
    scenario = parse_scenario(SourceFile.load(path))
    entry = catalog.get(scenario.standard)
    if entry is None:
        raise CorpusError("%s: unknown standard entry '%s'"
                          % (path, scenario.standard))
    base = os.path.dirname(path)
    app = parse_app(SourceFile.load(
        os.path.normpath(os.path.join(base, scenario.app_path))))
    ui = None
    if scenario.ui_path is not None:
        ui = parse_ui(SourceFile.load(
            os.path.normpath(os.path.join(base, scenario.ui_path))))
    return ScenarioCase(scenario, entry, app, ui, path)


def run_case(case: ScenarioCase, catalog: dict,
             cfg: Config = Config()) -> DeviationReport:
    scenario = case.scenario
    return check(case.entry, case.app, case.ui, scenario.benefit,
                 scenario.domain, catalog, cfg.with_depth(scenario.depth))


_DYADS = {"observed": OBSERVED_VS_EXPECTED,
          "implemented": IMPLEMENTED_VS_EXPECTED}


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    passed: bool
    detail: str
    report: DeviationReport

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return "%s %s%s" % (mark, self.name,
                            "" if self.passed else " (%s)" % self.detail)


def judge(case: ScenarioCase, report: DeviationReport) -> ScenarioResult:
    """A scenario passes when every expected deviation is produced (with
    matching category, subject, and dyad), a clean scenario stays clean,
    and the darkness verdict is as declared."""
    scenario = case.scenario
    produced = {(f.deviation.category_label(), f.deviation.subject,
                 f.deviation.dyad) for f in report.findings}
    problems = []
    for exp in scenario.expected:
        triple = (exp.category_label(), exp.subject, _DYADS[exp.dyad])
        if triple not in produced:
            problems.append("missing %s on %s [%s]" % triple)
    if not scenario.expected and report.findings:
        problems.append("expected a clean report, got %d finding(s): %s"
                        % (len(report.findings),
                           "; ".join(report.lines()[:4])))
    if report.any_dark() != scenario.dark:
        problems.append("dark verdict %s, scenario declares %s"
                        % (report.any_dark(), scenario.dark))
    return ScenarioResult(scenario.name, not problems, "; ".join(problems),
                          report)


@dataclass(frozen=True)
class CorpusReport:
    results: tuple  # of ScenarioResult, by scenario name

    @property
    def passed(self) -> int:
        return sum(1 for r in self.results if r.passed)

    @property
    def total(self) -> int:
        return len(self.results)

    def all_passed(self) -> bool:
        return self.passed == self.total

    def summary(self) -> str:
        return "%d/%d PASS" % (self.passed, self.total)

    def lines(self) -> list:
        return [r.line() for r in self.results] + [self.summary()]


def load_corpus_cases(directory: str = "scenarios",
                      catalog: Optional[dict] = None) -> list:
    catalog = catalog or catalog_by_name()
    root = data_path(directory)
    cases = []
    for name in sorted(os.listdir(root)):
        if name.endswith(".scenario"):
            cases.append(load_scenario_file(os.path.join(root, name),
                                            catalog))
    return cases


def run_corpus(cfg: Config = Config(), directory: str = "scenarios",
               catalog: Optional[dict] = None) -> CorpusReport:
    """Run every scenario in the pattern corpus and judge the outcomes."""
    catalog = catalog or catalog_by_name()
    results = []
    for case in load_corpus_cases(directory, catalog):
        report = run_case(case, catalog, cfg)
        results.append(judge(case, report))
    results.sort(key=lambda r: r.name)
    return CorpusReport(tuple(results))
