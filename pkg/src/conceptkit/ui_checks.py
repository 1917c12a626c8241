"""Checkers for the mapping principles and concept-specific UI standards.

Each checker is a pure function of its inputs and returns deviations in a
stable order. Transparency checks (correspondence, faithfulness) ask whether
the UI tells the truth about the design; uniformity checks (consistency,
symmetry, conventions, reach parity) ask whether it presents the design
evenly. Faithfulness-class findings are implemented-vs-expected; visibility
and reachability findings are observed-vs-expected.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .model import (
    AppModel, ConceptDef, EntitySort, MapKind, Ref, Lit, EntityLit, Bin, Not,
    InSet, Card, Sum, Deviation,
    MAPPING_VIOLATION, CORRESPONDENCE, FAITHFULNESS, CONSISTENCY, SYMMETRY,
    CONVENTIONS, REACH_PARITY, STANDARD,
    OBSERVED_VS_EXPECTED, IMPLEMENTED_VS_EXPECTED,
    EvalError, MissingKey, USER,
)
from .ui import (
    UIModel, UIElement, TriggersAction, DisplaysState, ClaimsState,
    StaticBinding, ConventionRegistry,
    MEANS_CONCEPT, MEANS_ACTION, MEANS_STATE,
    RequireControl, RequireDisplay, LabelReservation, GuardedControl,
    EqualProminence, ReachParity, ConsistencyGroup,
    SCOPE_PER_ITEM, BUTTON, CHECKBOX,
)
from .engine import Engine
from .config import Config
from .catalog_types import CatalogEntry

_EPS = 1e-9


@dataclass
class UIContext:
    """Everything the UI checkers need about one candidate design."""

    ui: UIModel
    app: AppModel
    entry: CatalogEntry
    bound_instance: str
    engine: Engine
    states: list  # sampled app states, init state first
    cfg: Config
    registry: ConventionRegistry
    concept_to_instance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.concept_to_instance:
            for inst in self.app.instances:
                self.concept_to_instance.setdefault(inst.concept, inst.name)
            bound = self.app.instance(self.bound_instance)
            if bound is not None:
                self.concept_to_instance[self.entry.name] = bound.name

    # -- resolution helpers --------------------------------------------------

    def instance_named(self, name: str) -> Optional[str]:
        """Resolve an instance-or-concept name to an instance name."""
        if self.app.instance(name) is not None:
            return name
        return self.concept_to_instance.get(name)

    def resolve_trigger(self, elem: UIElement):
        """(instance, ConceptDef, ActionDef) for a trigger element, or None
        if the element points at nothing in the app."""
        if not isinstance(elem.binding, TriggersAction):
            return None
        call = elem.binding.call
        inst = self.instance_named(call.instance)
        if inst is None:
            return None
        concept = self.app.concept_of(inst)
        action = concept.action(call.action)
        if action is None or len(call.args) != len(action.params):
            return None
        return inst, concept, action

    def resolve_display(self, elem: UIElement):
        """(instance, ConceptDef, StateComponent, ref) for a display or
        claims element."""
        binding = elem.binding
        if isinstance(binding, DisplaysState):
            ref = binding.ref
        elif isinstance(binding, ClaimsState):
            ref = binding.ref
        else:
            return None
        if ref.instance is None:
            return None
        inst = self.instance_named(ref.instance)
        if inst is None:
            return None
        concept = self.app.concept_of(inst)
        comp = concept.component(ref.name)
        if comp is None:
            return None
        return inst, concept, comp, ref

    def subject(self, inst: str, member: str) -> str:
        concept = self.app.concept_of(inst)
        name = concept.name if concept else inst
        # Report subjects under the standard concept's name for the bound
        # instance, so candidate variants keep catalog vocabulary.
        if inst == self.bound_instance:
            name = self.entry.name
        return "%s.%s" % (name, member)

    def requalify(self, expr):
        return requalify(expr, self.concept_to_instance)

    def eval_state(self, state, home: str, env: dict, expr):
        return self.engine.eval_in(state, home, env,
                                   self.requalify(expr))

    def shown_value(self, state, elem: UIElement):
        """What a display/claims element renders in a state, or None if the
        expression cannot be evaluated there."""
        resolved = self.resolve_display(elem)
        if resolved is None:
            return None
        inst, _, _, ref = resolved
        expr = elem.binding.shown if isinstance(elem.binding, ClaimsState) \
            else ref
        try:
            return self.eval_state(state, inst, {}, expr)
        except (EvalError, MissingKey):
            return None

    # -- template argument enumeration ---------------------------------------

    def template_args(self, state, elem: UIElement, action):
        """All concrete argument tuples the element can issue in a state,
        each with the variable environment that produced it."""
        call = elem.binding.call
        var_positions = [i for i, arg in enumerate(call.args)
                         if _is_template_var(arg)]
        var_names = [call.args[i].name for i in var_positions]
        pools = [self.engine.domain.pool(action.params[i][1])
                 for i in var_positions]
        results = []
        for combo in itertools.product(*pools):
            env = dict(zip(var_names, combo))
            args = []
            ok = True
            inst = self.instance_named(call.instance)
            for arg in call.args:
                if _is_template_var(arg):
                    args.append(env[arg.name])
                    continue
                try:
                    args.append(self.eval_state(state, inst, env, arg))
                except (EvalError, MissingKey):
                    ok = False
                    break
            if ok:
                results.append((tuple(args), env))
        return results

    # -- honesty --------------------------------------------------------------

    def effective_concept(self, inst: str) -> str:
        """The concept an instance plays: the bound instance counts as the
        standard concept whatever its definition is called."""
        if inst == self.bound_instance:
            return self.entry.name
        concept = self.app.concept_of(inst)
        return concept.name if concept else inst

    def token_mismatch(self, elem: UIElement) -> Optional[str]:
        """Evidence string when the element's convention token contradicts
        its binding; None when honest or unregistered."""
        if elem.convention is None:
            return None
        meaning = self.registry.lookup(elem.convention)
        if meaning is None or isinstance(elem.binding, StaticBinding):
            return None
        if isinstance(elem.binding, TriggersAction):
            resolved = self.resolve_trigger(elem)
            if resolved is None:
                return None
            inst, _, action = resolved
            concept_name = self.effective_concept(inst)
            if meaning.kind == MEANS_CONCEPT:
                if concept_name != meaning.concept:
                    return ("token '%s' means %s but element drives %s.%s"
                            % (elem.convention, meaning, concept_name,
                               action.name))
                return None
            if meaning.kind == MEANS_ACTION:
                if meaning.concept is not None \
                        and concept_name != meaning.concept \
                        or action.name != meaning.member:
                    return ("token '%s' means %s but element triggers %s.%s"
                            % (elem.convention, meaning, concept_name,
                               action.name))
                return None
            return ("token '%s' means state %s but element triggers an action"
                    % (elem.convention, meaning))
        resolved = self.resolve_display(elem)
        if resolved is None:
            return None
        inst, _, comp, _ = resolved
        concept_name = self.effective_concept(inst)
        if meaning.kind == MEANS_CONCEPT:
            if concept_name != meaning.concept:
                return ("token '%s' means %s but element shows %s.%s"
                        % (elem.convention, meaning, concept_name, comp.name))
            return None
        if meaning.kind == MEANS_STATE:
            if meaning.concept is not None \
                    and concept_name != meaning.concept \
                    or comp.name != meaning.member:
                return ("token '%s' means %s but element shows %s.%s"
                        % (elem.convention, meaning, concept_name, comp.name))
            return None
        return ("token '%s' means action %s but element displays state"
                % (elem.convention, meaning))

    def label_reserved_against(self, elem: UIElement) -> Optional[str]:
        """Evidence when the element's label is reserved for a different
        action than the one it triggers."""
        if not isinstance(elem.binding, TriggersAction):
            return None
        resolved = self.resolve_trigger(elem)
        if resolved is None:
            return None
        inst, _, action = resolved
        for standard in self.entry.standards:
            if isinstance(standard, LabelReservation) \
                    and standard.action is not None \
                    and standard.label == elem.label:
                if inst != self.bound_instance \
                        or action.name != standard.action:
                    return ("label %r is reserved for action '%s'"
                            % (elem.label, standard.action))
        return None

    def is_honest(self, elem: UIElement) -> bool:
        return self.token_mismatch(elem) is None and \
            self.label_reserved_against(elem) is None


def _is_template_var(expr) -> bool:
    return isinstance(expr, Ref) and expr.instance is None \
        and expr.key is None


def requalify(expr, mapping: dict):
    """Rewrite concept-qualified references to instance-qualified ones."""
    def fix_ref(ref: Ref) -> Ref:
        inst = ref.instance
        if inst is not None and inst in mapping:
            inst = mapping[inst]
        key = requalify(ref.key, mapping) if ref.key is not None else None
        return Ref(ref.name, key, inst)

    if isinstance(expr, Ref):
        return fix_ref(expr)
    if isinstance(expr, Bin):
        return Bin(expr.op, requalify(expr.left, mapping),
                   requalify(expr.right, mapping))
    if isinstance(expr, Not):
        return Not(requalify(expr.expr, mapping))
    if isinstance(expr, InSet):
        return InSet(requalify(expr.elem, mapping), fix_ref(expr.target))
    if isinstance(expr, Card):
        return Card(fix_ref(expr.target))
    if isinstance(expr, Sum):
        return Sum(expr.var, fix_ref(expr.target),
                   requalify(expr.body, mapping))
    return expr


def _mentioned_concepts(expr, out: set) -> set:
    if isinstance(expr, Ref):
        if expr.instance is not None:
            out.add(expr.instance)
        if expr.key is not None:
            _mentioned_concepts(expr.key, out)
    elif isinstance(expr, Bin):
        _mentioned_concepts(expr.left, out)
        _mentioned_concepts(expr.right, out)
    elif isinstance(expr, Not):
        _mentioned_concepts(expr.expr, out)
    elif isinstance(expr, InSet):
        _mentioned_concepts(expr.elem, out)
        if expr.target.instance is not None:
            out.add(expr.target.instance)
    elif isinstance(expr, Card):
        if expr.target.instance is not None:
            out.add(expr.target.instance)
    elif isinstance(expr, Sum):
        if expr.target.instance is not None:
            out.add(expr.target.instance)
        _mentioned_concepts(expr.body, out)
    return out


def _violation(principle: str, subject: str, dyad: str,
               evidence: str) -> Deviation:
    return Deviation(MAPPING_VIOLATION, subject, dyad, evidence, principle)


# ---------------------------------------------------------------------------
# Transparency: correspondence

def check_correspondence(ctx: UIContext) -> list:
    """Required controls and displays must have visible elements; elements
    must not imply actions or states absent from the design."""
    out = []
    for standard in ctx.entry.standards:
        if isinstance(standard, RequireControl):
            out.extend(_check_control_coverage(ctx, standard))
        elif isinstance(standard, RequireDisplay):
            out.extend(_check_display_coverage(ctx, standard))
    for elem in ctx.ui.visible_elements():
        if isinstance(elem.binding, TriggersAction):
            if ctx.resolve_trigger(elem) is None:
                call = elem.binding.call
                out.append(_violation(
                    CORRESPONDENCE,
                    "%s.%s" % (call.instance, call.action),
                    OBSERVED_VS_EXPECTED,
                    "element '%s' implies an action the design does not have"
                    % elem.id))
        elif isinstance(elem.binding, (DisplaysState, ClaimsState)):
            if ctx.resolve_display(elem) is None:
                ref = elem.binding.ref
                out.append(_violation(
                    CORRESPONDENCE,
                    "%s.%s" % (ref.instance or "?", ref.name),
                    OBSERVED_VS_EXPECTED,
                    "element '%s' implies a state the design does not have"
                    % elem.id))
    return out


def _required_items(ctx: UIContext, sort: Optional[EntitySort]) -> tuple:
    if sort is None:
        return ()
    try:
        return ctx.engine.domain.pool(sort)
    except Exception:
        return ()


def _check_control_coverage(ctx: UIContext, standard: RequireControl) -> list:
    action = ctx.entry.concept.action(standard.action)
    if action is None:
        return []
    elems = [e for e in ctx.ui.visible_elements()
             if _triggers_bound_action(ctx, e, standard.action)]
    subject = "%s.%s" % (ctx.entry.name, standard.action)
    if standard.scope == SCOPE_PER_ITEM:
        entity_pos = _first_entity_param(action)
        items = _required_items(
            ctx, action.params[entity_pos][1] if entity_pos is not None
            else None)
        missing = [item for item in items
                   if not any(_covers_item(e, entity_pos, item)
                              for e in elems)]
        if missing:
            return [_violation(
                CORRESPONDENCE, subject, OBSERVED_VS_EXPECTED,
                "no visible control for '%s' on: %s"
                % (standard.action, ", ".join(missing)))]
        if not items and not elems:
            return [_violation(
                CORRESPONDENCE, subject, OBSERVED_VS_EXPECTED,
                "no visible element triggers '%s'" % standard.action)]
        return []
    if not elems:
        return [_violation(
            CORRESPONDENCE, subject, OBSERVED_VS_EXPECTED,
            "no visible element triggers '%s'" % standard.action)]
    return []


def _check_display_coverage(ctx: UIContext, standard: RequireDisplay) -> list:
    comp = ctx.entry.concept.component(standard.component)
    if comp is None:
        return []
    subject = "%s.%s" % (ctx.entry.name, standard.component)
    elems = [e for e in ctx.ui.visible_elements()
             if _displays_bound_component(ctx, e, standard.component)]
    if standard.scope == SCOPE_PER_ITEM and isinstance(comp.kind, MapKind):
        items = _required_items(ctx, comp.kind.key)
        missing = [item for item in items
                   if not any(_display_covers_item(e, item) for e in elems)]
        if missing:
            return [_violation(
                CORRESPONDENCE, subject, OBSERVED_VS_EXPECTED,
                "state '%s' is not displayed for: %s"
                % (standard.component, ", ".join(missing)))]
        return []
    if not elems:
        return [_violation(
            CORRESPONDENCE, subject, OBSERVED_VS_EXPECTED,
            "no visible element displays '%s'" % standard.component)]
    return []


def _triggers_bound_action(ctx: UIContext, elem: UIElement,
                           action: str) -> bool:
    resolved = ctx.resolve_trigger(elem)
    return resolved is not None and resolved[0] == ctx.bound_instance \
        and resolved[2].name == action


def _displays_bound_component(ctx: UIContext, elem: UIElement,
                              component: str) -> bool:
    resolved = ctx.resolve_display(elem)
    return resolved is not None and resolved[0] == ctx.bound_instance \
        and resolved[2].name == component


def _first_entity_param(action) -> Optional[int]:
    for i, (_, sort) in enumerate(action.params):
        if isinstance(sort, EntitySort):
            return i
    return None


def _covers_item(elem: UIElement, entity_pos: Optional[int],
                 item: str) -> bool:
    if entity_pos is None:
        return True
    arg = elem.binding.call.args[entity_pos]
    if _is_template_var(arg):
        return True
    if isinstance(arg, EntityLit):
        return arg.value == item
    return True  # computed argument; assume it can reach any item


def _display_covers_item(elem: UIElement, item: str) -> bool:
    ref = elem.binding.ref
    if ref.key is None or _is_template_var(ref.key):
        return True
    if isinstance(ref.key, EntityLit):
        return ref.key.value == item
    return True


# ---------------------------------------------------------------------------
# Transparency: faithfulness

def check_faithfulness(ctx: UIContext) -> list:
    """Claims elements must show the value they claim; reserved labels must
    mean what the catalog reserves them for."""
    out = []
    for elem in ctx.ui.visible_elements():
        if isinstance(elem.binding, ClaimsState):
            resolved = ctx.resolve_display(elem)
            if resolved is None:
                continue
            inst, _, comp, ref = resolved
            subject = ctx.subject(inst, comp.name)
            for state in ctx.states:
                try:
                    actual = ctx.eval_state(state, inst, {}, ref)
                    shown = ctx.eval_state(state, inst, {},
                                           elem.binding.shown)
                except (EvalError, MissingKey):
                    continue
                if actual != shown:
                    out.append(_violation(
                        FAITHFULNESS, subject, IMPLEMENTED_VS_EXPECTED,
                        "element '%s' shows %r where the actual value is %r"
                        % (elem.id, shown, actual)))
                    break
        mismatch = ctx.label_reserved_against(elem)
        if mismatch is not None:
            resolved = ctx.resolve_trigger(elem)
            inst, _, action = resolved
            out.append(_violation(
                FAITHFULNESS, ctx.subject(inst, action.name),
                IMPLEMENTED_VS_EXPECTED,
                "element '%s': %s" % (elem.id, mismatch)))
    out.extend(_check_reserved_displays(ctx))
    return out


def _check_reserved_displays(ctx: UIContext) -> list:
    out = []
    for standard in ctx.entry.standards:
        if not isinstance(standard, LabelReservation) \
                or standard.state_expr is None:
            continue
        for elem in ctx.ui.visible_elements():
            if elem.label != standard.label:
                continue
            if not isinstance(elem.binding, (DisplaysState, ClaimsState)):
                continue
            resolved = ctx.resolve_display(elem)
            if resolved is None:
                continue
            inst, _, comp, _ = resolved
            for state in ctx.states:
                shown = ctx.shown_value(state, elem)
                if shown is None:
                    continue
                try:
                    reserved = ctx.eval_state(state, ctx.bound_instance, {},
                                              standard.state_expr)
                except (EvalError, MissingKey):
                    continue
                if shown != reserved:
                    out.append(_violation(
                        FAITHFULNESS, ctx.subject(inst, comp.name),
                        IMPLEMENTED_VS_EXPECTED,
                        "element '%s' labeled %r shows %r, reserved meaning "
                        "has value %r"
                        % (elem.id, standard.label, shown, reserved)))
                    break
            else:
                continue
            break
    return out


# ---------------------------------------------------------------------------
# Uniformity: consistency

def check_consistency(ctx: UIContext) -> list:
    """Same state or action represented in several places must look the same
    and show the same values in every sampled state."""
    out = []
    display_groups: dict = {}
    trigger_groups: dict = {}
    for elem in ctx.ui.visible_elements():
        resolved = ctx.resolve_display(elem)
        if resolved is not None:
            inst, _, comp, ref = resolved
            key = (inst, comp.name, _key_repr(ref))
            display_groups.setdefault(key, []).append(elem)
            continue
        trigger = ctx.resolve_trigger(elem)
        if trigger is not None:
            inst, _, action = trigger
            trigger_groups.setdefault((inst, action.name), []).append(elem)
    for (inst, comp, _key), elems in sorted(display_groups.items(),
                                            key=lambda kv: kv[0]):
        if len(elems) < 2:
            continue
        subject = ctx.subject(inst, comp)
        styles = sorted({(e.kind, e.style) for e in elems})
        if len(styles) > 1:
            out.append(_violation(
                CONSISTENCY, subject, OBSERVED_VS_EXPECTED,
                "state is rendered in differing forms: %s"
                % "; ".join("%s/%s" % s for s in styles)))
        out.extend(_value_disagreements(ctx, subject, elems))
    for (inst, action), elems in sorted(trigger_groups.items()):
        if len(elems) < 2:
            continue
        styles = sorted({(e.kind, e.style) for e in elems})
        if len(styles) > 1:
            out.append(_violation(
                CONSISTENCY, ctx.subject(inst, action), OBSERVED_VS_EXPECTED,
                "controls for the same action differ: %s"
                % "; ".join("%s/%s" % s for s in styles)))
    return out


def _key_repr(ref: Ref) -> str:
    from .lang.printer import print_expr
    return print_expr(ref.key) if ref.key is not None else ""


def _has_free_vars(ref: Ref) -> bool:
    return ref.key is not None and _is_template_var(ref.key)


def _value_disagreements(ctx: UIContext, subject: str, elems: list) -> list:
    if any(_has_free_vars(e.binding.ref) for e in elems):
        return []
    for state in ctx.states:
        shown = []
        for elem in elems:
            value = ctx.shown_value(state, elem)
            if value is not None:
                shown.append((elem, value))
        values = {v for _, v in shown}
        if len(values) > 1:
            detail = ", ".join("'%s' shows %r" % (e.id, v)
                               for e, v in shown)
            return [_violation(
                CONSISTENCY, subject, OBSERVED_VS_EXPECTED,
                "the same state shows different values: %s" % detail)]
    return []


# ---------------------------------------------------------------------------
# Uniformity: symmetry

def check_symmetry(ctx: UIContext) -> list:
    """Paired alternatives must have comparable prominence and symmetric
    defaults; a preselected consequential option is asymmetry by itself."""
    out = []
    done = set()
    for elem in ctx.ui.visible_elements():
        if elem.paired is None or elem.id in done:
            continue
        other = ctx.ui.element(elem.paired)
        if other is None or not other.visible:
            continue
        done.add(elem.id)
        done.add(other.id)
        low, high = sorted((elem, other), key=lambda e: e.prominence)
        if high.prominence - low.prominence > ctx.cfg.epsilon + _EPS:
            out.append(_violation(
                SYMMETRY, _elem_subject(ctx, low), OBSERVED_VS_EXPECTED,
                "prominence %s vs %s exceeds tolerance %s"
                % (low.prominence, high.prominence, ctx.cfg.epsilon)))
        a_default = _default_on(elem)
        b_default = _default_on(other)
        if a_default != b_default:
            chosen = elem if a_default else other
            out.append(_violation(
                SYMMETRY, _elem_subject(ctx, chosen), OBSERVED_VS_EXPECTED,
                "option '%s' is preselected while its alternative '%s' is "
                "not" % (chosen.id, (other if chosen is elem else elem).id)))
    return out


def _default_on(elem: UIElement) -> bool:
    return isinstance(elem.binding, TriggersAction) and \
        elem.binding.default_on


def _elem_subject(ctx: UIContext, elem: UIElement) -> str:
    resolved = ctx.resolve_trigger(elem)
    if resolved is not None:
        inst, _, action = resolved
        return ctx.subject(inst, action.name)
    display = ctx.resolve_display(elem)
    if display is not None:
        inst, _, comp, _ = display
        return ctx.subject(inst, comp.name)
    return "ui.%s" % elem.id


# ---------------------------------------------------------------------------
# Uniformity: conventions

def check_conventions(ctx: UIContext) -> list:
    """Registered convention tokens must mean what the registry says; the
    registry is closed-world, so unknown tokens never flag."""
    out = []
    for elem in ctx.ui.visible_elements():
        evidence = ctx.token_mismatch(elem)
        if evidence is not None:
            out.append(_violation(
                CONVENTIONS, _elem_subject(ctx, elem),
                IMPLEMENTED_VS_EXPECTED,
                "element '%s': %s" % (elem.id, evidence)))
    return out


# ---------------------------------------------------------------------------
# Reach parity

def check_reach_parity(ctx: UIContext) -> list:
    out = []
    for standard in ctx.entry.standards:
        if not isinstance(standard, ReachParity):
            continue
        steps_a = _min_steps(ctx, standard.action_a)
        steps_b = _min_steps(ctx, standard.action_b)
        if steps_a is None or steps_b is None:
            continue
        limit = standard.max_ratio * max(1, steps_a)
        if steps_b > limit + _EPS:
            out.append(_violation(
                REACH_PARITY,
                "%s.%s" % (ctx.entry.name, standard.action_b),
                OBSERVED_VS_EXPECTED,
                "'%s' takes %d steps against %d for '%s' (limit ratio %s)"
                % (standard.action_b, steps_b, steps_a, standard.action_a,
                   standard.max_ratio)))
    return out


def _min_steps(ctx: UIContext, action: str) -> Optional[int]:
    steps = [e.steps for e in ctx.ui.visible_elements()
             if _triggers_bound_action(ctx, e, action)]
    return min(steps) if steps else None


# ---------------------------------------------------------------------------
# Concept-specific standards

def check_standards(ctx: UIContext) -> list:
    """GuardedControl, EqualProminence, and ConsistencyGroup standards from
    the catalog entry. RequireControl/RequireDisplay are correspondence's
    job and label reservations belong to faithfulness."""
    out = []
    for standard in ctx.entry.standards:
        if isinstance(standard, GuardedControl):
            out.extend(_check_guarded(ctx, standard))
        elif isinstance(standard, EqualProminence):
            out.extend(_check_equal_prominence(ctx, standard))
        elif isinstance(standard, ConsistencyGroup):
            out.extend(_check_group(ctx, standard))
    return out


def _check_guarded(ctx: UIContext, standard: GuardedControl) -> list:
    action = ctx.entry.concept.action(standard.action)
    if action is None:
        return []
    mentioned = _mentioned_concepts(standard.guard, set())
    for concept in mentioned:
        if ctx.instance_named(concept) is None:
            return []  # guard talks about a concept this design lacks
    for elem in ctx.ui.visible_elements():
        if not _triggers_bound_action(ctx, elem, standard.action):
            continue
        cand_action = ctx.resolve_trigger(elem)[2]
        for state in ctx.states:
            for args, env in ctx.template_args(state, elem, cand_action):
                if not _guard_holds(ctx, state, elem, env):
                    continue  # the control itself forbids this tuple
                std_env = {name: value for (name, _), value
                           in zip(action.params, args)}
                try:
                    std_ok = ctx.eval_state(state, ctx.bound_instance,
                                            std_env, standard.guard)
                except (EvalError, MissingKey):
                    continue
                if not std_ok:
                    return [_violation(
                        STANDARD,
                        "%s.%s" % (ctx.entry.name, standard.action),
                        OBSERVED_VS_EXPECTED,
                        "element '%s' offers %s outside the required guard"
                        % (elem.id, _render_args(args)))]
    return []


def _guard_holds(ctx: UIContext, state, elem: UIElement, env: dict) -> bool:
    guard = elem.binding.guard
    if guard is None:
        return True
    inst = ctx.instance_named(elem.binding.call.instance)
    try:
        return bool(ctx.eval_state(state, inst, env, guard))
    except (EvalError, MissingKey):
        return False


def _render_args(args: tuple) -> str:
    return "(%s)" % ", ".join(str(a) for a in args)


def _check_equal_prominence(ctx: UIContext,
                            standard: EqualProminence) -> list:
    prom_a = _max_prominence(ctx, standard.action_a)
    prom_b = _max_prominence(ctx, standard.action_b)
    if prom_a is None or prom_b is None:
        return []
    if abs(prom_a - prom_b) > ctx.cfg.epsilon + _EPS:
        weaker = standard.action_b if prom_b < prom_a else standard.action_a
        return [_violation(
            SYMMETRY, "%s.%s" % (ctx.entry.name, weaker),
            OBSERVED_VS_EXPECTED,
            "prominence of '%s' (%s) and '%s' (%s) must match within %s"
            % (standard.action_a, prom_a, standard.action_b, prom_b,
               ctx.cfg.epsilon))]
    return []


def _max_prominence(ctx: UIContext, action: str) -> Optional[float]:
    values = [e.prominence for e in ctx.ui.visible_elements()
              if _triggers_bound_action(ctx, e, action)]
    return max(values) if values else None


def _check_group(ctx: UIContext, standard: ConsistencyGroup) -> list:
    elems = [e for e in ctx.ui.visible_elements()
             if _triggers_bound_action(ctx, e, standard.subject)
             or _displays_bound_component(ctx, e, standard.subject)]
    if len(elems) < 2:
        return []
    forms = sorted({(e.kind, e.style, e.label) for e in elems})
    if len(forms) > 1:
        return [_violation(
            CONSISTENCY, "%s.%s" % (ctx.entry.name, standard.subject),
            OBSERVED_VS_EXPECTED,
            "representations of '%s' differ: %s"
            % (standard.subject,
               "; ".join("%s/%s/%r" % f for f in forms)))]
    return []


# ---------------------------------------------------------------------------
# Observed concept and evocation

@dataclass(frozen=True)
class ObservedConcept:
    """What the UI conveys about the bound standard concept: actions the
    user can find and operate, states they can see, and couplings implied
    by preselected options."""

    actions: tuple  # of (action name, min steps, element ids)
    states: tuple  # of component names
    syncs: tuple  # of (trigger subject, reaction subject, element id)
    initiators: tuple = (USER,)

    def action_names(self) -> frozenset:
        return frozenset(name for name, _, _ in self.actions)

    def state_names(self) -> frozenset:
        return frozenset(self.states)


def derive_observed(ctx: UIContext) -> ObservedConcept:
    actions: dict = {}
    for elem in ctx.ui.visible_elements():
        resolved = ctx.resolve_trigger(elem)
        if resolved is None or resolved[0] != ctx.bound_instance:
            continue
        if elem.steps > ctx.cfg.max_steps:
            continue
        if elem.prominence + _EPS < ctx.cfg.min_prominence:
            continue
        if not ctx.is_honest(elem):
            continue
        name = resolved[2].name
        steps, ids = actions.get(name, (elem.steps, ()))
        actions[name] = (min(steps, elem.steps), ids + (elem.id,))
    states = []
    for elem in ctx.ui.visible_elements():
        resolved = ctx.resolve_display(elem)
        if resolved is None or resolved[0] != ctx.bound_instance:
            continue
        if resolved[2].name not in states:
            states.append(resolved[2].name)
    syncs = _observed_syncs(ctx)
    return ObservedConcept(
        tuple(sorted((name, steps, ids)
                     for name, (steps, ids) in actions.items())),
        tuple(states), syncs)


def _observed_syncs(ctx: UIContext) -> tuple:
    """Couplings the interface implies: a preselected checkbox next to a
    commit button folds the checkbox's action into the button press."""
    out = []
    for screen in ctx.ui.screens:
        buttons = [e for e in screen.elements
                   if e.visible and e.kind == BUTTON
                   and ctx.resolve_trigger(e) is not None]
        defaults = [e for e in screen.elements
                    if e.visible and e.kind == CHECKBOX and _default_on(e)
                    and ctx.resolve_trigger(e) is not None]
        for button in buttons:
            b_inst, _, b_action = ctx.resolve_trigger(button)
            for box in defaults:
                d_inst, _, d_action = ctx.resolve_trigger(box)
                if (b_inst, b_action.name) == (d_inst, d_action.name):
                    continue
                out.append((ctx.subject(b_inst, b_action.name),
                            ctx.subject(d_inst, d_action.name), box.id))
    return tuple(sorted(set(out)))


def identify_evoked(ui: UIModel, registry: ConventionRegistry,
                    evoke_k: int = 2) -> dict:
    """Concepts the UI evokes through its convention tokens. A concept is
    evoked when at least evoke_k distinct registered tokens meaning it
    appear on visible elements; evidence lists the matched tokens."""
    tokens: dict = {}
    for elem in ui.visible_elements():
        if elem.convention is None:
            continue
        meaning = registry.lookup(elem.convention)
        if meaning is None or meaning.concept is None:
            continue
        tokens.setdefault(meaning.concept, set()).add(elem.convention)
    return {concept: tuple(sorted(seen))
            for concept, seen in sorted(tokens.items())
            if len(seen) >= evoke_k}
