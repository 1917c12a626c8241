"""Canonical pretty-printers for every file format.

The printers emit text the parsers accept, and reparsing printed text yields
a structurally identical object (parse . print . parse == parse). Minimal
parentheses are produced, so the emitted text is also the normal form.
"""

from __future__ import annotations

from ..model import (
    EntitySort, Lit, EntityLit, Ref, Bin, Not, InSet, Card, Sum,
    ScalarKind, SetKind, MapKind, StateComponent, ActionDef, ConceptDef,
    SetInsert, SetRemove, MapPut, MapDrop, Assign, Clear,
    SyncRule, AppModel, VLit, VEntity, VSet, VMap,
)
from ..ui import (
    UIModel, UIElement, TriggersAction, DisplaysState, ClaimsState,
    StaticBinding, RequireControl, RequireDisplay, LabelReservation,
    GuardedControl, EqualProminence, ReachParity, ConsistencyGroup,
    SCOPE_PER_ITEM,
)
from ..catalog_types import CatalogEntry, Scenario

_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_CMP = 4
_PREC_ADD = 5
_PREC_MUL = 6
_PREC_ATOM = 7

_BIN_PREC = {"or": _PREC_OR, "and": _PREC_AND, "=": _PREC_CMP,
             "!=": _PREC_CMP, "<": _PREC_CMP, "<=": _PREC_CMP,
             "+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL}


def print_expr(expr, context: int = 0) -> str:
    text, prec = _render(expr)
    if prec < context:
        return "(%s)" % text
    return text


def _render(expr):
    if isinstance(expr, Lit):
        if isinstance(expr.value, bool):
            return ("true" if expr.value else "false"), _PREC_ATOM
        if isinstance(expr.value, int):
            return str(expr.value), _PREC_ATOM
        return _quote(expr.value), _PREC_ATOM
    if isinstance(expr, EntityLit):
        return "'" + expr.value, _PREC_ATOM
    if isinstance(expr, Ref):
        return _ref(expr), _PREC_ATOM
    if isinstance(expr, Card):
        return "|%s|" % _ref(expr.target), _PREC_ATOM
    if isinstance(expr, Sum):
        return "sum %s in %s: %s" % (expr.var, _ref(expr.target),
                                     print_expr(expr.body)), 0
    if isinstance(expr, Not):
        return "not %s" % print_expr(expr.expr, _PREC_NOT), _PREC_NOT
    if isinstance(expr, InSet):
        return "%s in %s" % (print_expr(expr.elem, _PREC_ADD),
                             _ref(expr.target)), _PREC_CMP
    if isinstance(expr, Bin):
        prec = _BIN_PREC[expr.op]
        # Comparisons are non-associative: a comparison child on either side
        # must be parenthesized. The other operators are left-associative.
        left = print_expr(expr.left, prec + 1 if prec == _PREC_CMP else prec)
        right = print_expr(expr.right, prec + 1)
        return "%s %s %s" % (left, expr.op, right), prec
    raise TypeError("unknown expression node: %r" % (expr,))


def _ref(ref: Ref) -> str:
    text = ref.name if ref.instance is None else \
        "%s.%s" % (ref.instance, ref.name)
    if ref.key is not None:
        text += "[%s]" % print_expr(ref.key)
    return text


def _quote(text: str) -> str:
    return '"%s"' % text.replace("\\", "\\\\").replace('"', '\\"')


def _num(value: float) -> str:
    # repr of a small decimal float is digits[.digits], which the lexer
    # accepts; authored values never need exponent form.
    return repr(value)


def _sort(sort) -> str:
    return sort.name if isinstance(sort, EntitySort) else sort


def print_stmt(stmt) -> str:
    if isinstance(stmt, SetInsert):
        return "%s += %s" % (stmt.target, print_expr(stmt.elem))
    if isinstance(stmt, SetRemove):
        return "%s -= %s" % (stmt.target, print_expr(stmt.elem))
    if isinstance(stmt, MapPut):
        return "%s[%s] := %s" % (stmt.target, print_expr(stmt.key),
                                 print_expr(stmt.value, _PREC_ADD))
    if isinstance(stmt, MapDrop):
        return "drop %s[%s]" % (stmt.target, print_expr(stmt.key))
    if isinstance(stmt, Assign):
        return "%s := %s" % (stmt.target, print_expr(stmt.value, _PREC_ADD))
    if isinstance(stmt, Clear):
        return "clear %s" % stmt.target
    raise TypeError("unknown statement node: %r" % (stmt,))


def print_concept(concept: ConceptDef) -> str:
    lines = []
    head = "concept %s" % concept.name
    if concept.type_params:
        head += " [%s]" % ", ".join(concept.type_params)
    lines.append(head)
    lines.append("purpose %s" % _quote(concept.purpose))
    lines.append("state")
    for comp in concept.state:
        lines.append("  " + _state_decl(comp))
    lines.append("actions")
    for action in concept.actions:
        lines.extend(_action_lines(action))
    return "\n".join(lines) + "\n"


def _state_decl(comp: StateComponent) -> str:
    if comp.derived is not None:
        return "derived %s: %s = %s" % (comp.name, _sort(comp.kind.sort),
                                        print_expr(comp.derived))
    kind = comp.kind
    if isinstance(kind, ScalarKind):
        return "%s: one %s" % (comp.name, _sort(kind.sort))
    if isinstance(kind, SetKind):
        return "%s: set %s" % (comp.name, kind.elem.name)
    if isinstance(kind, MapKind):
        return "%s: %s -> %s" % (comp.name, kind.key.name, _sort(kind.value))
    raise TypeError("unknown component kind: %r" % (kind,))


def _action_lines(action: ActionDef) -> list:
    params = ", ".join("%s: %s" % (n, _sort(s)) for n, s in action.params)
    lines = ["  %s(%s) by %s" % (action.name, params, action.initiator)]
    if action.precondition is not None:
        lines.append("    requires %s" % print_expr(action.precondition))
    if action.effects:
        if len(action.effects) == 1:
            lines.append("    effects %s" % print_stmt(action.effects[0]))
        else:
            lines.append("    effects")
            for i, stmt in enumerate(action.effects):
                sep = ";" if i < len(action.effects) - 1 else ""
                lines.append("      %s%s" % (print_stmt(stmt), sep))
    return lines


def print_value_lit(value) -> str:
    if isinstance(value, VLit):
        if isinstance(value.value, bool):
            return "true" if value.value else "false"
        if isinstance(value.value, int):
            return str(value.value)
        return _quote(value.value)
    if isinstance(value, VEntity):
        return value.value
    if isinstance(value, VSet):
        return "{%s}" % ", ".join(print_value_lit(v) for v in value.items)
    if isinstance(value, VMap):
        return "{%s}" % ", ".join(
            "%s: %s" % (k, print_value_lit(v)) for k, v in value.pairs)
    raise TypeError("unknown value literal: %r" % (value,))


def print_sync(rule: SyncRule) -> str:
    trigger = "%s.%s(%s)" % (rule.trigger.instance, rule.trigger.action,
                             ", ".join(rule.trigger.params))
    text = "sync %s when %s" % (rule.name, trigger)
    if rule.require is not None:
        text += " require %s" % print_expr(rule.require)
    if rule.reactions:
        calls = ["%s.%s(%s)" % (r.instance, r.action,
                                ", ".join(print_expr(a) for a in r.args))
                 for r in rule.reactions]
        text += " then " + ", ".join(calls)
    return text


def print_app(app: AppModel) -> str:
    lines = ["app %s" % app.name, ""]
    for concept in app.concepts:
        lines.append(print_concept(concept).rstrip("\n"))
        lines.append("")
    for inst in app.instances:
        decl = "instance %s: %s" % (inst.name, inst.concept)
        if inst.implements:
            decl += " implements %s" % inst.implements
        lines.append(decl)
    for init in app.inits:
        lines.append("init %s.%s = %s" % (init.instance, init.component,
                                          print_value_lit(init.value)))
    for inst, action in sorted(app.internals):
        lines.append("internal %s.%s" % (inst, action))
    for rule in app.syncs:
        lines.append(print_sync(rule))
    return "\n".join(lines).rstrip("\n") + "\n"


def print_ui(model: UIModel) -> str:
    lines = []
    for screen in model.screens:
        lines.append("screen %s {" % screen.name)
        for elem in screen.elements:
            lines.extend(_element_lines(elem))
        lines.append("}")
    return "\n".join(lines) + "\n"


def _element_lines(elem: UIElement) -> list:
    head = "  element %s: %s label %s" % (elem.id, elem.kind,
                                          _quote(elem.label))
    if elem.style:
        head += " style %s" % _quote(elem.style)
    lines = [head, "    %s" % _binding(elem.binding)]
    tail = "    prominence %s steps %d" % (_num(elem.prominence), elem.steps)
    if elem.convention is not None:
        tail += " convention %s" % _quote(elem.convention)
    if elem.paired is not None:
        tail += " paired %s" % elem.paired
    if not elem.visible:
        tail += " hidden"
    lines.append(tail)
    return lines


def _binding(binding) -> str:
    if isinstance(binding, TriggersAction):
        call = binding.call
        text = "triggers %s.%s(%s)" % (
            call.instance, call.action,
            ", ".join(print_expr(a) for a in call.args))
        if binding.guard is not None:
            text += " guard %s" % print_expr(binding.guard)
        if binding.default_on:
            text += " default on"
        return text
    if isinstance(binding, DisplaysState):
        return "displays %s" % _ref(binding.ref)
    if isinstance(binding, ClaimsState):
        return "claims %s shows %s" % (_ref(binding.ref),
                                       print_expr(binding.shown))
    if isinstance(binding, StaticBinding):
        return "static"
    raise TypeError("unknown binding: %r" % (binding,))


def print_standard(standard) -> str:
    if isinstance(standard, RequireControl):
        text = "control %s" % standard.action
        if standard.scope == SCOPE_PER_ITEM:
            text += " per item"
        return text
    if isinstance(standard, RequireDisplay):
        text = "display %s" % standard.component
        if standard.scope == SCOPE_PER_ITEM:
            text += " per item"
        return text
    if isinstance(standard, LabelReservation):
        if standard.action is not None:
            return "reserve %s for action %s" % (_quote(standard.label),
                                                 standard.action)
        return "reserve %s for %s" % (_quote(standard.label),
                                      print_expr(standard.state_expr))
    if isinstance(standard, GuardedControl):
        return "guard %s by %s" % (standard.action,
                                   print_expr(standard.guard))
    if isinstance(standard, EqualProminence):
        return "pair %s %s" % (standard.action_a, standard.action_b)
    if isinstance(standard, ReachParity):
        return "reach %s %s max %s" % (standard.action_a, standard.action_b,
                                       _num(standard.max_ratio))
    if isinstance(standard, ConsistencyGroup):
        return "consistent %s" % standard.subject
    raise TypeError("unknown mapping standard: %r" % (standard,))


def print_catalog(entry: CatalogEntry) -> str:
    lines = ["catalog %s {" % entry.name, ""]
    lines.append(print_concept(entry.concept).rstrip("\n"))
    lines.append("")
    if entry.independent:
        lines.append("independent %s" % ", ".join(entry.independent))
    for rule in entry.required_syncs:
        lines.append(print_sync(rule))
    if entry.standards:
        lines.append("mapping {")
        for standard in entry.standards:
            lines.append("  %s" % print_standard(standard))
        lines.append("}")
    for variant in entry.variants:
        lines.append("variant %s %s" % (variant.name, _quote(variant.path)))
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_scenario(scenario: Scenario) -> str:
    lines = ["scenario %s {" % scenario.name]
    lines.append("  standard %s" % scenario.standard)
    lines.append("  app %s" % _quote(scenario.app_path))
    if scenario.ui_path is not None:
        lines.append("  ui %s" % _quote(scenario.ui_path))
    parts = ["%s = {%s}" % (sort, ", ".join(ids))
             for sort, ids in scenario.domain.entities]
    if scenario.domain.nat is not None:
        parts.append("Nat = {%s}" % ", ".join(
            str(v) for v in scenario.domain.nat))
    if scenario.domain.money is not None:
        parts.append("Money = {%s}" % ", ".join(
            str(v) for v in scenario.domain.money))
    lines.append("  domain { %s }" % " ".join(parts))
    if scenario.depth is not None:
        lines.append("  depth %d" % scenario.depth)
    lines.append("  benefit %s" % scenario.benefit.default)
    for subject, who in scenario.benefit.overrides:
        lines.append("  override %s = %s" % (subject, who))
    for exp in scenario.expected:
        lines.append("  expect %s on %s dyad %s"
                     % (exp.category_label(), exp.subject, exp.dyad))
    lines.append("  dark %s" % ("true" if scenario.dark else "false"))
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_model(obj) -> str:
    """Print any parseable object back to its source form."""
    if isinstance(obj, ConceptDef):
        return print_concept(obj)
    if isinstance(obj, AppModel):
        return print_app(obj)
    if isinstance(obj, UIModel):
        return print_ui(obj)
    if isinstance(obj, CatalogEntry):
        return print_catalog(obj)
    if isinstance(obj, Scenario):
        return print_scenario(obj)
    raise TypeError("cannot print %r" % type(obj).__name__)
