"""Conformance checking: compare a candidate design against a catalog entry.

The comparison runs in two planes. The implemented plane diffs structure
(actions, state, initiators, preconditions, synchronizations) and replays
bounded standard traces inside the candidate. The observed plane derives
what a user would see from the UI model and checks the mapping principles.
Every deviation then receives the two-criterion verdict: it is dark only if
the declared benefit annotation says the provider gains by it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import (
    AppModel, ConceptDef, Instance, InitClause, SyncRule,
    Deviation, DarkFinding, Ref, Bin, Not, InSet, Card, Sum,
    SetKind, MapKind, EntitySort,
    VLit, VEntity, VSet, VMap,
    MISSING_ACTION, MISSING_STATE, MISSING_SYNC, UNEXPECTED_SYNC,
    INITIATOR_MISMATCH, PRECONDITION_MISMATCH, BEHAVIOR_MISMATCH, EXTENSION,
    IMPLEMENTED_VS_EXPECTED, OBSERVED_VS_EXPECTED,
    BENEFITS_PROVIDER, NAT, MONEY, BOOL, TEXT,
    roles_of, EvalError, MissingKey,
)
from .engine import Engine, ActionCall, StepError, build_domain, state_digest
from .config import Config
from .catalog_types import CatalogEntry, DomainSpec, Benefit
from .ui import UIModel, ConventionRegistry, default_registry, RequireControl
from .ui_checks import (
    UIContext, ObservedConcept, derive_observed, identify_evoked,
    check_correspondence, check_faithfulness, check_consistency,
    check_symmetry, check_conventions, check_reach_parity, check_standards,
)


class ConformanceError(Exception):
    pass


class UnboundConcept(ConformanceError):
    """No candidate instance corresponds to the standard concept."""


@dataclass(frozen=True)
class CompatibilityReport:
    compatible: bool
    violations: tuple  # of Deviation
    preserved_trace_count: int


@dataclass(frozen=True)
class DeviationReport:
    standard: str
    findings: tuple  # of DarkFinding, stable order

    def any_dark(self) -> bool:
        return any(f.dark for f in self.findings)

    def deviations(self) -> tuple:
        return tuple(f.deviation for f in self.findings)

    def lines(self) -> list:
        out = []
        for finding in self.findings:
            dev = finding.deviation
            out.append("%s %s %s %s %s" % (
                "DARK" if finding.dark else "OK",
                dev.dyad, dev.category_label(), dev.subject, dev.evidence))
        return out

    def text(self) -> str:
        if not self.findings:
            return "no deviations from %s\n" % self.standard
        parts = ["%d deviation(s) from %s:" % (len(self.findings),
                                               self.standard)]
        for finding in self.findings:
            dev = finding.deviation
            verdict = "DARK" if finding.dark else (
                "neutral" if finding.beneficiary == "neutral"
                else "benefits %s" % finding.beneficiary)
            parts.append("  [%s] %s on %s (%s)" % (
                verdict, dev.category_label(), dev.subject, dev.dyad))
            parts.append("      %s" % dev.evidence)
        return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# Standard app construction

_PEER_NAT_SEED = 2
_PEER_MONEY_STEP = 100


def standard_app(entry: CatalogEntry, catalog: dict, domain: DomainSpec,
                 extra_inits: tuple = ()) -> AppModel:
    """Materialize a catalog entry as an executable app: the standard
    concept plus every peer its required syncs name, wired with those syncs.

    Peer state is seeded deterministically so the standard concept's actions
    are exercisable: entity sets fill with the whole domain, Nat maps get
    2 per key, Money maps price the k-th id at 100 * (k + 1). The standard
    instance itself starts from sort defaults, adjusted by `extra_inits`
    (used to align its initial state with a candidate's declared one).
    """
    concepts = [entry.concept]
    for peer_name in entry.peer_concepts():
        peer = catalog.get(peer_name)
        if peer is None:
            raise ConformanceError(
                "entry '%s' requires unknown peer concept '%s'"
                % (entry.name, peer_name))
        concepts.append(peer.concept)
    instances = tuple(Instance(c.name, c.name) for c in concepts)
    inits = []
    for concept in concepts[1:]:
        inits.extend(_seed_instance(concept, domain))
    inits.extend(extra_inits)
    return AppModel("standard_%s" % entry.name.lower(), tuple(concepts),
                    instances, tuple(inits), frozenset(),
                    entry.required_syncs)


def _mirrored_inits(entry: CatalogEntry, candidate: AppModel,
                    bound: str) -> tuple:
    """Candidate init clauses for standard components, retargeted at the
    standard instance so both sides replay from corresponding states."""
    concept = candidate.concept_of(bound)
    out = []
    for init in candidate.inits:
        if init.instance != bound:
            continue
        std_comp = entry.concept.component(init.component)
        cand_comp = concept.component(init.component)
        if std_comp is None or cand_comp is None \
                or std_comp.kind != cand_comp.kind:
            continue
        out.append(InitClause(entry.name, init.component, init.value))
    return tuple(out)


def _seed_instance(concept: ConceptDef, domain: DomainSpec) -> list:
    inits = []
    for comp in concept.stored_components():
        kind = comp.kind
        if isinstance(kind, SetKind):
            ids = _domain_ids(domain, kind.elem, concept)
            inits.append(InitClause(concept.name, comp.name,
                                    VSet(tuple(VEntity(i) for i in ids))))
        elif isinstance(kind, MapKind):
            ids = _domain_ids(domain, kind.key, concept)
            if kind.value == NAT:
                pairs = tuple((i, VLit(_PEER_NAT_SEED)) for i in ids)
            elif kind.value == MONEY:
                pairs = tuple((i, VLit(_PEER_MONEY_STEP * (k + 1)))
                              for k, i in enumerate(ids))
            elif kind.value == BOOL:
                pairs = tuple((i, VLit(False)) for i in ids)
            elif kind.value == TEXT:
                pairs = tuple((i, VLit("")) for i in ids)
            else:
                first = _domain_ids(domain, kind.value, concept)
                pairs = tuple((i, VEntity(first[0])) for i in ids) \
                    if first else ()
            inits.append(InitClause(concept.name, comp.name, VMap(pairs)))
    return inits


def _domain_ids(domain: DomainSpec, sort: EntitySort,
                concept: ConceptDef) -> tuple:
    ids = domain.entity_ids(sort.name)
    if ids is None:
        raise ConformanceError(
            "domain gives no ids for entity sort '%s' used by '%s'"
            % (sort.name, concept.name))
    return tuple(sorted(ids))


# ---------------------------------------------------------------------------
# Binding resolution

def resolve_binding(entry: CatalogEntry, candidate: AppModel,
                    ui: Optional[UIModel], registry: ConventionRegistry,
                    cfg: Config) -> Optional[str]:
    """Which candidate instance plays the standard concept: an explicit
    `implements` clause wins, then a concept-name match, then the instance
    the UI's evoking convention tokens point at."""
    for inst in candidate.instances:
        if inst.implements == entry.name:
            return inst.name
    for inst in candidate.instances:
        if inst.concept == entry.name:
            return inst.name
    if ui is None:
        return None
    evoked = identify_evoked(ui, registry, cfg.evoke_k)
    if entry.name not in evoked:
        return None
    counts: dict = {}
    for elem in ui.visible_elements():
        if elem.convention is None:
            continue
        meaning = registry.lookup(elem.convention)
        if meaning is None or meaning.concept != entry.name:
            continue
        target = _element_instance(candidate, elem)
        if target is not None:
            counts[target] = counts.get(target, 0) + 1
    if not counts:
        return None
    best = max(sorted(counts), key=lambda name: counts[name])
    return best


def _element_instance(app: AppModel, elem) -> Optional[str]:
    binding = elem.binding
    call_instance = getattr(getattr(binding, "call", None), "instance", None)
    ref = getattr(binding, "ref", None)
    name = call_instance or (ref.instance if ref is not None else None)
    if name is not None and app.instance(name) is not None:
        return name
    return None


# ---------------------------------------------------------------------------
# Sync signatures

def _normalize_expr(expr, inst2concept: dict, params: dict):
    def fix_ref(ref: Ref) -> Ref:
        inst = ref.instance
        if inst is not None:
            inst = inst2concept.get(inst, inst)
        name = params.get(ref.name, ref.name) if ref.instance is None \
            and ref.key is None else ref.name
        key = _normalize_expr(ref.key, inst2concept, params) \
            if ref.key is not None else None
        return Ref(name, key, inst)

    if isinstance(expr, Ref):
        return fix_ref(expr)
    if isinstance(expr, Bin):
        return Bin(expr.op, _normalize_expr(expr.left, inst2concept, params),
                   _normalize_expr(expr.right, inst2concept, params))
    if isinstance(expr, Not):
        return Not(_normalize_expr(expr.expr, inst2concept, params))
    if isinstance(expr, InSet):
        return InSet(_normalize_expr(expr.elem, inst2concept, params),
                     fix_ref(expr.target))
    if isinstance(expr, Card):
        return Card(fix_ref(expr.target))
    if isinstance(expr, Sum):
        return Sum(expr.var, fix_ref(expr.target),
                   _normalize_expr(expr.body, inst2concept, params))
    return expr


def sync_signature(rule: SyncRule, inst2concept: dict):
    """Canonical form of a sync rule: concept-level names with trigger
    parameters renamed positionally, so structurally identical wirings
    compare equal across apps."""
    params = {p: "$%d" % i for i, p in enumerate(rule.trigger.params)}
    require = _normalize_expr(rule.require, inst2concept, params) \
        if rule.require is not None else None
    reactions = tuple(
        (inst2concept.get(r.instance, r.instance), r.action,
         tuple(_normalize_expr(a, inst2concept, params) for a in r.args))
        for r in rule.reactions)
    return (inst2concept.get(rule.trigger.instance, rule.trigger.instance),
            rule.trigger.action, require, reactions)


def _sync_subject(rule: SyncRule, inst2concept: dict) -> str:
    trigger = "%s.%s" % (inst2concept.get(rule.trigger.instance,
                                          rule.trigger.instance),
                         rule.trigger.action)
    if not rule.reactions:
        return trigger
    first = rule.reactions[0]
    return "%s->%s.%s" % (trigger,
                          inst2concept.get(first.instance, first.instance),
                          first.action)


# ---------------------------------------------------------------------------
# Behavioral comparison

@dataclass
class _Comparison:
    """One bounded replay of the standard against the candidate."""

    entry: CatalogEntry
    std_engine: Engine
    cand_engine: Engine
    bound: str
    preserved: int = 0
    trace_total: int = 0
    divergence: Optional[Deviation] = None
    pairs: list = field(default_factory=list)  # (std_state, cand_state)


def compare_behavior(entry: CatalogEntry, candidate: AppModel, bound: str,
                     catalog: dict, domain: DomainSpec,
                     cfg: Config) -> _Comparison:
    """Enumerate standard traces (initiated through the standard concept
    only; peers move by reaction) and replay each inside the candidate,
    collecting matched state pairs and the first divergence."""
    std_app = standard_app(entry, catalog, domain,
                           _mirrored_inits(entry, candidate, bound))
    std_engine = Engine(std_app, build_domain(std_app, domain),
                        cfg.state_cap)
    cand_engine = Engine(candidate, build_domain(candidate, domain),
                         cfg.state_cap)
    comparison = _Comparison(entry, std_engine, cand_engine, bound)
    traces = std_engine.enumerate_traces(cfg.depth,
                                         instances=(entry.name,))
    comparison.trace_total = len(traces)
    seen_pairs = set()
    cand_init = cand_engine.init_state()
    std_init = std_engine.init_state()
    key = (state_digest(std_init), state_digest(cand_init))
    seen_pairs.add(key)
    comparison.pairs.append((std_init, cand_init))
    for trace in traces:
        std_state = std_init
        cand_state = cand_init
        ok = True
        prefix = []
        for step in trace.steps:
            call = step.call
            prefix.append("%s %s" % (call.initiator, call.render()))
            mapped = ActionCall(comparison.bound, call.action, call.args,
                                call.initiator)
            std_state, _ = std_engine.step(std_state, call)
            try:
                cand_state, _ = cand_engine.step(cand_state, mapped)
            except StepError as exc:
                ok = False
                comparison.divergence = comparison.divergence or Deviation(
                    BEHAVIOR_MISMATCH,
                    "%s.%s" % (entry.name, call.action),
                    IMPLEMENTED_VS_EXPECTED,
                    "standard trace [%s] is not executable: %s"
                    % ("; ".join(prefix), exc))
                break
            diff = _state_diff(entry, std_engine, std_state,
                               cand_engine, cand_state, bound)
            if diff is not None:
                ok = False
                comparison.divergence = comparison.divergence or Deviation(
                    BEHAVIOR_MISMATCH,
                    "%s.%s" % (entry.name, call.action),
                    IMPLEMENTED_VS_EXPECTED,
                    "after [%s], %s" % ("; ".join(prefix), diff))
                break
            key = (state_digest(std_state), state_digest(cand_state))
            if key not in seen_pairs:
                seen_pairs.add(key)
                comparison.pairs.append((std_state, cand_state))
        if ok:
            comparison.preserved += 1
    return comparison


def _state_diff(entry: CatalogEntry, std_engine: Engine, std_state: dict,
                cand_engine: Engine, cand_state: dict,
                bound: str) -> Optional[str]:
    cand_concept = cand_engine.schemas[bound]
    for comp in entry.concept.state:
        if cand_concept.component(comp.name) is None:
            continue  # reported structurally as MissingState
        try:
            std_value = std_engine.eval_in(std_state, entry.name, {},
                                           Ref(comp.name))
            cand_value = cand_engine.eval_in(cand_state, bound, {},
                                             Ref(comp.name))
        except (EvalError, MissingKey):
            std_value = std_state[entry.name].get(comp.name) \
                if comp.derived is None else None
            cand_value = cand_state[bound].get(comp.name) \
                if comp.derived is None else None
        if std_value != cand_value:
            return "component '%s' is %s where the standard has %s" % (
                comp.name, _show(cand_value), _show(std_value))
    return None


def _show(value) -> str:
    if isinstance(value, frozenset):
        return "{%s}" % ", ".join(str(v) for v in sorted(value))
    if isinstance(value, dict):
        return "{%s}" % ", ".join("%s: %s" % (k, v)
                                  for k, v in sorted(value.items()))
    return repr(value)


# ---------------------------------------------------------------------------
# Structural diff

def structural_diff(entry: CatalogEntry, candidate: AppModel,
                    domain: DomainSpec, catalog: dict,
                    cfg: Config = Config(),
                    bound: Optional[str] = None,
                    comparison: Optional[_Comparison] = None) -> list:
    """Diff the candidate's bound concept against the standard definition.

    Missing functionality, widened initiators, narrowed preconditions, and
    missing or foreign synchronizations are violations; pure additions are
    reported as extensions, never as violations.
    """
    if bound is None:
        bound = resolve_binding(entry, candidate, None, default_registry(),
                                cfg)
    if bound is None:
        raise UnboundConcept("no instance of '%s' in app '%s'"
                             % (entry.name, candidate.name))
    if comparison is None:
        comparison = compare_behavior(entry, candidate, bound, catalog,
                                      domain, cfg)
    concept = candidate.concept_of(bound)
    out = []
    out.extend(_diff_state(entry, concept))
    out.extend(_diff_actions(entry, concept, comparison))
    out.extend(_diff_syncs(entry, candidate, bound))
    return out


def _subject(entry: CatalogEntry, member: str) -> str:
    return "%s.%s" % (entry.name, member)


def _diff_state(entry: CatalogEntry, concept: ConceptDef) -> list:
    out = []
    std_names = set()
    for comp in entry.concept.state:
        std_names.add(comp.name)
        mine = concept.component(comp.name)
        if mine is None:
            out.append(Deviation(
                MISSING_STATE, _subject(entry, comp.name),
                IMPLEMENTED_VS_EXPECTED,
                "standard state component '%s' is absent" % comp.name))
        elif mine.kind != comp.kind:
            out.append(Deviation(
                MISSING_STATE, _subject(entry, comp.name),
                IMPLEMENTED_VS_EXPECTED,
                "state component '%s' is declared with a different shape"
                % comp.name))
    for comp in concept.state:
        if comp.name not in std_names:
            out.append(Deviation(
                EXTENSION, _subject(entry, comp.name),
                IMPLEMENTED_VS_EXPECTED,
                "adds state component '%s'" % comp.name))
    return out


def _diff_actions(entry: CatalogEntry, concept: ConceptDef,
                  comparison: _Comparison) -> list:
    out = []
    std_names = set()
    for action in entry.concept.actions:
        std_names.add(action.name)
        mine = concept.action(action.name)
        if mine is None:
            out.append(Deviation(
                MISSING_ACTION, _subject(entry, action.name),
                IMPLEMENTED_VS_EXPECTED,
                "standard action '%s' is not implemented" % action.name))
            continue
        if mine.param_sorts() != action.param_sorts():
            out.append(Deviation(
                MISSING_ACTION, _subject(entry, action.name),
                IMPLEMENTED_VS_EXPECTED,
                "action '%s' exists but its signature differs"
                % action.name))
            continue
        extra_roles = roles_of(mine.initiator) - roles_of(action.initiator)
        if extra_roles:
            out.append(Deviation(
                INITIATOR_MISMATCH, _subject(entry, action.name),
                IMPLEMENTED_VS_EXPECTED,
                "'%s' grants initiator '%s' where the standard allows only "
                "'%s'" % (action.name, "/".join(sorted(extra_roles)),
                          action.initiator)))
        mismatch = _precondition_mismatch(entry, action, mine, comparison)
        if mismatch is not None:
            out.append(mismatch)
    for action in concept.actions:
        if action.name not in std_names:
            out.append(Deviation(
                EXTENSION, _subject(entry, action.name),
                IMPLEMENTED_VS_EXPECTED,
                "adds action '%s'" % action.name))
    return out


def _precondition_mismatch(entry: CatalogEntry, std_action, cand_action,
                           comparison: _Comparison) -> Optional[Deviation]:
    """Exhaustively decide whether the candidate precondition is implied by
    the standard one over the reachable, replayed state pairs."""
    if cand_action.precondition is None:
        return None
    std_engine = comparison.std_engine
    cand_engine = comparison.cand_engine
    for std_state, cand_state in comparison.pairs:
        for args in std_engine.arg_tuples(std_action):
            env = {name: value for (name, _), value
                   in zip(std_action.params, args)}
            try:
                std_ok = std_action.precondition is None or \
                    std_engine.eval_in(std_state, entry.name, env,
                                       std_action.precondition)
            except (EvalError, MissingKey):
                continue
            if not std_ok:
                continue
            try:
                cand_ok = cand_engine.eval_in(cand_state, comparison.bound,
                                              env, cand_action.precondition)
            except (EvalError, MissingKey):
                cand_ok = False
            if not cand_ok:
                return Deviation(
                    PRECONDITION_MISMATCH, _subject(entry, std_action.name),
                    IMPLEMENTED_VS_EXPECTED,
                    "candidate precondition rejects %s in a state the "
                    "standard accepts" % _show_args(args))
    return None


def _show_args(args: tuple) -> str:
    return "(%s)" % ", ".join(str(a) for a in args)


def _diff_syncs(entry: CatalogEntry, candidate: AppModel,
                bound: str) -> list:
    out = []
    inst2concept = {i.name: candidate.instance(i.name).concept
                    for i in candidate.instances}
    inst2concept[bound] = entry.name
    concepts_present = set(inst2concept.values())
    identity = {}
    template_sigs = {}
    for rule in entry.required_syncs:
        template_sigs[sync_signature(rule, identity)] = rule
    required_pairs = _template_pairs(entry)
    cand_sigs = set()
    for rule in candidate.syncs:
        cand_sigs.add(sync_signature(rule, inst2concept))
    for sig, rule in sorted(template_sigs.items(),
                            key=lambda kv: kv[1].name):
        mentioned = {sig[0]} | {concept for concept, _, _ in sig[3]}
        if not mentioned <= concepts_present:
            continue  # the candidate composes without this peer
        if sig not in cand_sigs:
            out.append(Deviation(
                MISSING_SYNC, _sync_subject(rule, identity),
                IMPLEMENTED_VS_EXPECTED,
                "required synchronization '%s' is not implemented"
                % rule.name))
    for rule in candidate.syncs:
        sig = sync_signature(rule, inst2concept)
        if sig in template_sigs:
            continue
        deviation = _classify_foreign_sync(entry, rule, inst2concept, bound,
                                           required_pairs)
        if deviation is not None:
            out.append(deviation)
    return out


def _template_pairs(entry: CatalogEntry) -> set:
    pairs = set()
    for rule in entry.required_syncs:
        trigger = (rule.trigger.instance, rule.trigger.action)
        for reaction in rule.reactions:
            pairs.add((trigger, (reaction.instance, reaction.action)))
    return pairs


def _classify_foreign_sync(entry: CatalogEntry, rule: SyncRule,
                           inst2concept: dict, bound: str,
                           required_pairs: set) -> Optional[Deviation]:
    trigger_inst = rule.trigger.instance
    trigger_key = (inst2concept[trigger_inst], rule.trigger.action)
    touches_bound = trigger_inst == bound or \
        any(r.instance == bound for r in rule.reactions)
    if not touches_bound:
        return None
    for reaction in rule.reactions:
        react_key = (inst2concept[reaction.instance], reaction.action)
        if (trigger_key, react_key) in required_pairs:
            continue
        if reaction.instance == trigger_inst:
            continue  # intra-concept coupling is the concept's own business
        if trigger_inst == bound and \
                rule.trigger.action in entry.independent:
            return Deviation(
                UNEXPECTED_SYNC, _subject(entry, rule.trigger.action),
                IMPLEMENTED_VS_EXPECTED,
                "sync '%s' couples independent action '%s' to %s.%s"
                % (rule.name, rule.trigger.action, react_key[0],
                   react_key[1]))
        if reaction.instance == bound and \
                reaction.action in entry.independent:
            return Deviation(
                UNEXPECTED_SYNC, _subject(entry, reaction.action),
                IMPLEMENTED_VS_EXPECTED,
                "sync '%s' fires independent action '%s' from %s.%s"
                % (rule.name, reaction.action, trigger_key[0],
                   trigger_key[1]))
    return Deviation(
        EXTENSION, _subject(entry, rule.name), IMPLEMENTED_VS_EXPECTED,
        "adds synchronization '%s' on %s.%s"
        % (rule.name, trigger_key[0], trigger_key[1]))


# ---------------------------------------------------------------------------
# Trace inclusion

def trace_inclusion(entry: CatalogEntry, candidate: AppModel,
                    domain: DomainSpec, depth: int, catalog: dict,
                    cfg: Config = Config(),
                    bound: Optional[str] = None) -> CompatibilityReport:
    """Bounded behavioral inclusion: every standard trace must replay in the
    candidate with matching standard state after each step."""
    if bound is None:
        bound = resolve_binding(entry, candidate, None, default_registry(),
                                cfg)
    if bound is None:
        raise UnboundConcept("no instance of '%s' in app '%s'"
                             % (entry.name, candidate.name))
    comparison = compare_behavior(entry, candidate, bound, catalog, domain,
                                  cfg.with_depth(depth))
    violations = (comparison.divergence,) if comparison.divergence else ()
    return CompatibilityReport(not violations, violations,
                               comparison.preserved)


# ---------------------------------------------------------------------------
# Observed-plane checks

def _deceptive_controls(ctx: UIContext) -> list:
    """A control that drives a standard action while presenting as something
    else makes the action's occurrences look system-initiated."""
    out = []
    flagged = set()
    for elem in ctx.ui.visible_elements():
        resolved = ctx.resolve_trigger(elem)
        if resolved is None or resolved[0] != ctx.bound_instance:
            continue
        action = resolved[2].name
        if action in flagged or ctx.is_honest(elem):
            continue
        flagged.add(action)
        out.append(Deviation(
            INITIATOR_MISMATCH, "%s.%s" % (ctx.entry.name, action),
            OBSERVED_VS_EXPECTED,
            "element '%s' fires '%s' while presenting as something else; "
            "to the user the action runs without them" % (elem.id, action)))
    return out


def _observed_gaps(ctx: UIContext, observed: ObservedConcept) -> list:
    """Required controls that exist but sit beyond the reachability or
    prominence thresholds: the observed concept lacks the action."""
    out = []
    observed_names = observed.action_names()
    for standard in ctx.entry.standards:
        if not isinstance(standard, RequireControl):
            continue
        if standard.action in observed_names:
            continue
        elems = [e for e in ctx.ui.visible_elements()
                 if _is_bound_trigger(ctx, e, standard.action)]
        if not elems:
            continue  # correspondence reports outright absence
        if all(not ctx.is_honest(e) for e in elems):
            continue  # the deceptive-control check reports these
        probe = min(elems, key=lambda e: e.steps)
        out.append(Deviation(
            MISSING_ACTION, "%s.%s" % (ctx.entry.name, standard.action),
            OBSERVED_VS_EXPECTED,
            "'%s' is not part of the observed concept: its control needs "
            "%d steps at prominence %s (thresholds: %d steps, %s)"
            % (standard.action, probe.steps, probe.prominence,
               ctx.cfg.max_steps, ctx.cfg.min_prominence)))
    return out


def _is_bound_trigger(ctx: UIContext, elem, action: str) -> bool:
    resolved = ctx.resolve_trigger(elem)
    return resolved is not None and resolved[0] == ctx.bound_instance \
        and resolved[2].name == action


def _observed_sync_deviations(ctx: UIContext,
                              observed: ObservedConcept) -> list:
    """Preselected couplings the UI implies, measured against the entry's
    independence declarations."""
    out = []
    required = {("%s.%s" % trig, "%s.%s" % react)
                for trig, react in _template_pairs(ctx.entry)}
    for trig_subject, react_subject, elem_id in observed.syncs:
        if (trig_subject, react_subject) in required:
            continue
        for subject in (react_subject, trig_subject):
            concept, _, member = subject.partition(".")
            if concept == ctx.entry.name and member in ctx.entry.independent:
                out.append(Deviation(
                    UNEXPECTED_SYNC, subject, OBSERVED_VS_EXPECTED,
                    "preselected element '%s' couples %s with %s in the "
                    "observed design" % (elem_id, trig_subject,
                                         react_subject)))
                break
    return out


# ---------------------------------------------------------------------------
# The full check

def check(entry: CatalogEntry, candidate: AppModel, ui: Optional[UIModel],
          benefit: Benefit, domain: DomainSpec, catalog: dict,
          cfg: Config = Config(),
          registry: Optional[ConventionRegistry] = None) -> DeviationReport:
    """Compare a candidate design (and optionally its UI) against a standard
    catalog entry and classify every deviation with the darkness verdict.

    When the candidate neither binds the standard concept nor evokes it
    through the UI's conventions, the design simply is not presenting that
    concept and the report is empty.
    """
    registry = registry or default_registry()
    cfg.validate()
    bound = resolve_binding(entry, candidate, ui, registry, cfg)
    if bound is None:
        if ui is not None:
            return DeviationReport(entry.name, ())
        raise UnboundConcept("no instance of '%s' in app '%s'"
                             % (entry.name, candidate.name))
    comparison = compare_behavior(entry, candidate, bound, catalog,
                                  domain, cfg)
    deviations = list(structural_diff(entry, candidate, domain, catalog,
                                      cfg, bound, comparison))
    if comparison.divergence is not None:
        deviations.append(comparison.divergence)
    if ui is not None:
        cand_engine = comparison.cand_engine
        states = cand_engine.sample_states(cfg.sample_depth, cfg.sample_cap)
        ctx = UIContext(ui, candidate, entry, bound, cand_engine, states,
                        cfg, registry)
        observed = derive_observed(ctx)
        deviations.extend(_deceptive_controls(ctx))
        deviations.extend(_observed_gaps(ctx, observed))
        deviations.extend(_observed_sync_deviations(ctx, observed))
        deviations.extend(check_correspondence(ctx))
        deviations.extend(check_faithfulness(ctx))
        deviations.extend(check_consistency(ctx))
        deviations.extend(check_symmetry(ctx))
        deviations.extend(check_conventions(ctx))
        deviations.extend(check_reach_parity(ctx))
        deviations.extend(check_standards(ctx))
    return _finalize(entry, deviations, benefit)


def _finalize(entry: CatalogEntry, deviations: list,
              benefit: Benefit) -> DeviationReport:
    unique = {}
    for dev in deviations:
        key = (dev.dyad, dev.category_label(), dev.subject)
        if key not in unique:
            unique[key] = dev
    findings = []
    for key in sorted(unique):
        dev = unique[key]
        who = benefit.beneficiary(dev.subject)
        findings.append(DarkFinding(dev, who, who == BENEFITS_PROVIDER))
    return DeviationReport(entry.name, tuple(findings))


def check_extension(core: CatalogEntry, ext: AppModel, domain: DomainSpec,
                    depth: int, catalog: dict,
                    cfg: Config = Config()) -> CompatibilityReport:
    """Does an extended implementation conflict with the minimal standard
    concept? Pure additions are compatible; missing or weakened core
    functionality, or an unexecutable core trace, is a conflict."""
    bound = resolve_binding(core, ext, None, default_registry(), cfg)
    if bound is None:
        raise UnboundConcept("extension app '%s' does not bind '%s'"
                             % (ext.name, core.name))
    comparison = compare_behavior(core, ext, bound, catalog, domain,
                                  cfg.with_depth(depth))
    structural = structural_diff(core, ext, domain, catalog, cfg, bound,
                                 comparison)
    conflicts = [d for d in structural if d.category != EXTENSION]
    if comparison.divergence is not None:
        conflicts.append(comparison.divergence)
    return CompatibilityReport(not conflicts, tuple(conflicts),
                               comparison.preserved)
