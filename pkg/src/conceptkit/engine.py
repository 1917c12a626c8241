"""Execution engine for composed app models.

States are plain nested mappings treated as immutable: a step never mutates
its input, it builds a new state. A step atomically runs the initiating
call's precondition and effects, then fires every matching sync rule's
reactions transitively; any failure in the closure discards the whole step.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from typing import Optional

from .model import (
    AppModel, ConceptDef, EntitySort, SetKind, MapKind,
    SetInsert, SetRemove, MapPut, MapDrop, Assign, Clear,
    NAT, MONEY, BOOL, TEXT, USER, PROVIDER, roles_of,
    Lit, VLit, VEntity, VSet, VMap,
    _eval, EvalError, MissingKey,
)
from .catalog_types import DomainSpec


class EngineError(Exception):
    pass


class MissingDomain(EngineError):
    """An instantiated entity sort has no finite domain."""


class BudgetExceeded(EngineError):
    """Trace enumeration passed the configured state cap."""


PRECONDITION_FAILED = "PreconditionFailed"
INITIATOR_FORBIDDEN = "InitiatorForbidden"
CYCLE_DETECTED = "CycleDetected"

SYNC_DEPTH_CAP = 32


class StepError(EngineError):
    """A rejected step; the input state is unchanged."""

    def __init__(self, kind: str, who: str, message: str = ""):
        self.kind = kind
        self.who = who
        super().__init__("%s(%s)%s" % (kind, who,
                                       ": " + message if message else ""))


@dataclass(frozen=True)
class ActionCall:
    instance: str
    action: str
    args: tuple
    initiator: str

    def render(self) -> str:
        return "%s.%s(%s)" % (self.instance, self.action,
                              ", ".join(_render_value(a) for a in self.args))


@dataclass(frozen=True)
class Step:
    call: ActionCall
    reactions: tuple  # of ActionCall, firing order
    digest: str

    def render(self) -> str:
        inner = ", ".join(r.render() for r in self.reactions)
        return "%s %s => [%s]" % (self.call.initiator, self.call.render(),
                                  inner)


@dataclass(frozen=True)
class Trace:
    steps: tuple  # of Step

    def key(self) -> tuple:
        return tuple((s.call.initiator, s.call.instance, s.call.action,
                      s.call.args) for s in self.steps)

    def render(self) -> str:
        return "\n".join(s.render() for s in self.steps)


def _render_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return str(value)


@dataclass(frozen=True)
class Domain:
    """Finite pools the engine draws argument values from."""

    entities: dict  # sort name -> sorted tuple of ids
    nat: tuple
    money: tuple
    text: tuple = ("",)

    def pool(self, sort):
        if isinstance(sort, EntitySort):
            ids = self.entities.get(sort.name)
            if ids is None:
                raise MissingDomain("no domain for entity sort '%s'"
                                    % sort.name)
            return ids
        if sort == NAT:
            return self.nat
        if sort == MONEY:
            return self.money
        if sort == BOOL:
            return (False, True)
        if sort == TEXT:
            return self.text
        raise ValueError("unknown sort %r" % (sort,))


def build_domain(app: AppModel, spec: Optional[DomainSpec] = None) -> Domain:
    """Assemble the argument pools for an app.

    Entity ids come from the domain spec. Numeric pools default to the
    integer literals appearing in the app's expressions and initial values,
    plus 0 and 1 for Nat, so small models need no explicit pools.
    """
    entities = {}
    if spec is not None:
        for sort, ids in spec.entities:
            entities[sort] = tuple(sorted(ids))
    literals = _collect_int_literals(app)
    nat = spec.nat if spec is not None and spec.nat is not None \
        else tuple(sorted({0, 1} | literals))
    money = spec.money if spec is not None and spec.money is not None \
        else tuple(sorted(literals | _collect_init_ints(app)))
    return Domain(entities, tuple(sorted(nat)), tuple(sorted(money)))


def _collect_int_literals(app: AppModel) -> set:
    out: set = set()

    def walk(expr):
        if isinstance(expr, Lit) and isinstance(expr.value, int) \
                and not isinstance(expr.value, bool):
            out.add(expr.value)
        for attr in ("left", "right", "expr", "elem", "body", "key"):
            child = getattr(expr, attr, None)
            if child is not None and not isinstance(child, str):
                walk(child)

    for concept in app.concepts:
        for comp in concept.state:
            if comp.derived is not None:
                walk(comp.derived)
        for action in concept.actions:
            if action.precondition is not None:
                walk(action.precondition)
            for stmt in action.effects:
                for attr in ("elem", "key", "value"):
                    child = getattr(stmt, attr, None)
                    if child is not None:
                        walk(child)
    for rule in app.syncs:
        if rule.require is not None:
            walk(rule.require)
        for reaction in rule.reactions:
            for arg in reaction.args:
                walk(arg)
    return out


def _collect_init_ints(app: AppModel) -> set:
    out: set = set()
    for init in app.inits:
        for leaf in _value_leaves(init.value):
            if isinstance(leaf, int) and not isinstance(leaf, bool):
                out.add(leaf)
    return out


def _value_leaves(value):
    if isinstance(value, VLit):
        yield value.value
    elif isinstance(value, VEntity):
        yield value.value
    elif isinstance(value, VSet):
        for item in value.items:
            yield from _value_leaves(item)
    elif isinstance(value, VMap):
        for _, item in value.pairs:
            yield from _value_leaves(item)


# ---------------------------------------------------------------------------

def state_digest(state: dict) -> str:
    """Stable digest of an app state; bit-identical states agree."""
    canon = {}
    for inst in sorted(state):
        comps = {}
        for name in sorted(state[inst]):
            value = state[inst][name]
            if isinstance(value, frozenset):
                comps[name] = ["set"] + sorted(value)
            elif isinstance(value, dict):
                comps[name] = ["map"] + sorted(value.items())
            else:
                comps[name] = value
        canon[inst] = comps
    blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


class Engine:
    """Executes one app model over a finite domain."""

    def __init__(self, app: AppModel, domain: Domain,
                 state_cap: int = 10 ** 6):
        self.app = app
        self.domain = domain
        self.state_cap = state_cap
        self.schemas = {}
        for inst in app.instances:
            concept = app.concept(inst.concept)
            if concept is None:
                raise EngineError("instance '%s' references unknown concept "
                                  "'%s'" % (inst.name, inst.concept))
            self.schemas[inst.name] = concept
        self._rules_by_trigger = {}
        for rule in app.syncs:
            key = (rule.trigger.instance, rule.trigger.action)
            self._rules_by_trigger.setdefault(key, []).append(rule)

    # -- initialization -----------------------------------------------------

    def init_state(self) -> dict:
        state = {}
        for inst in self.app.instances:
            concept = self.schemas[inst.name]
            values = {}
            for comp in concept.stored_components():
                values[comp.name] = self._default_value(comp.kind)
            state[inst.name] = values
        for init in self.app.inits:
            concept = self.schemas[init.instance]
            comp = concept.component(init.component)
            state[init.instance][init.component] = \
                self._init_value(comp.kind, init.value)
        return state

    def _default_value(self, kind):
        if isinstance(kind, SetKind):
            return frozenset()
        if isinstance(kind, MapKind):
            return {}
        sort = kind.sort
        if sort in (NAT, MONEY):
            return 0
        if sort == BOOL:
            return False
        if sort == TEXT:
            return ""
        # Entity scalar: deterministic default, the first domain id.
        pool = self.domain.pool(sort)
        if not pool:
            raise MissingDomain("empty domain for entity sort '%s'"
                                % sort.name)
        return pool[0]

    def _init_value(self, kind, value):
        if isinstance(kind, SetKind):
            if isinstance(value, VSet):
                return frozenset(self._leaf(v) for v in value.items)
            raise EngineError("set component initialized with non-set value")
        if isinstance(kind, MapKind):
            if isinstance(value, VMap):
                return {k: self._leaf(v) for k, v in value.pairs}
            if isinstance(value, VSet) and not value.items:
                return {}
            raise EngineError("map component initialized with non-map value")
        if isinstance(value, (VLit, VEntity)):
            return self._leaf(value)
        raise EngineError("scalar component initialized with collection")

    @staticmethod
    def _leaf(value):
        return value.value

    # -- expression evaluation ----------------------------------------------

    def _resolver(self, state: dict):
        def resolve(instance: str):
            if instance not in state:
                raise EvalError("unknown instance '%s'" % instance)
            return self.schemas[instance], state[instance]
        return resolve

    def eval_in(self, state: dict, home: str, env: dict, expr):
        """Evaluate an app-level expression with `home` as the default
        instance for unqualified references."""
        concept = self.schemas[home]
        return _eval(concept, state[home], env, expr, self._resolver(state))

    # -- stepping -------------------------------------------------------------

    def step(self, state: dict, call: ActionCall):
        """Run one initiating call plus its sync closure.

        Returns (post_state, Step). Raises StepError without touching the
        input state when any precondition, guard, or update in the closure
        fails.
        """
        concept = self.schemas.get(call.instance)
        if concept is None:
            raise StepError(PRECONDITION_FAILED, call.instance,
                            "unknown instance")
        action = concept.action(call.action)
        if action is None:
            raise StepError(PRECONDITION_FAILED, call.render(),
                            "unknown action")
        if call.initiator not in roles_of(action.initiator):
            raise StepError(INITIATOR_FORBIDDEN,
                            "%s.%s" % (call.instance, call.action),
                            "role '%s' may not initiate" % call.initiator)
        if len(call.args) != len(action.params):
            raise StepError(PRECONDITION_FAILED, call.render(),
                            "arity mismatch")
        reactions: list = []
        post = self._execute(state, call.instance, call.action,
                             tuple(call.args), reactions, depth=0)
        reaction_calls = tuple(
            ActionCall(inst, act, args, call.initiator)
            for inst, act, args in reactions[1:])
        return post, Step(call, reaction_calls, state_digest(post))

    def _execute(self, state: dict, instance: str, action_name: str,
                 args: tuple, log: list, depth: int) -> dict:
        if depth > SYNC_DEPTH_CAP:
            raise StepError(CYCLE_DETECTED,
                            "%s.%s" % (instance, action_name),
                            "sync closure exceeds depth %d" % SYNC_DEPTH_CAP)
        concept = self.schemas[instance]
        action = concept.action(action_name)
        if action is None:
            raise StepError(PRECONDITION_FAILED,
                            "%s.%s" % (instance, action_name),
                            "unknown action")
        if len(args) != len(action.params):
            raise StepError(PRECONDITION_FAILED,
                            "%s.%s" % (instance, action_name),
                            "arity mismatch")
        env = {name: value for (name, _), value in zip(action.params, args)}
        who = "%s.%s" % (instance, action_name)
        if action.precondition is not None:
            try:
                ok = self.eval_in(state, instance, env, action.precondition)
            except (EvalError, MissingKey) as exc:
                raise StepError(PRECONDITION_FAILED, who, str(exc))
            if not ok:
                raise StepError(PRECONDITION_FAILED, who)
        log.append((instance, action_name, args))
        # bind_state: reaction arguments and rule guards read the state the
        # trigger fired from, before its effects.
        bind_state = state
        work = self._apply_effects(state, instance, action.effects, env, who)
        for rule in self._rules_by_trigger.get((instance, action_name), ()):
            rule_env = dict(zip(rule.trigger.params, args))
            if rule.require is not None:
                try:
                    ok = self.eval_in(bind_state, instance, rule_env,
                                      rule.require)
                except (EvalError, MissingKey) as exc:
                    raise StepError(PRECONDITION_FAILED, rule.name, str(exc))
                if not ok:
                    raise StepError(PRECONDITION_FAILED, rule.name)
            for reaction in rule.reactions:
                try:
                    rargs = tuple(
                        self.eval_in(bind_state, instance, rule_env, arg)
                        for arg in reaction.args)
                except (EvalError, MissingKey) as exc:
                    raise StepError(PRECONDITION_FAILED, rule.name, str(exc))
                work = self._execute(work, reaction.instance, reaction.action,
                                     rargs, log, depth + 1)
        return work

    def _apply_effects(self, state: dict, instance: str, effects, env: dict,
                       who: str) -> dict:
        if not effects:
            return state
        values = dict(state[instance])
        concept = self.schemas[instance]
        resolver = self._resolver(state)

        def ev(expr):
            try:
                return _eval(concept, values, env, expr, resolver)
            except (EvalError, MissingKey) as exc:
                raise StepError(PRECONDITION_FAILED, who, str(exc))

        for stmt in effects:
            if isinstance(stmt, SetInsert):
                values[stmt.target] = values[stmt.target] | {ev(stmt.elem)}
            elif isinstance(stmt, SetRemove):
                values[stmt.target] = values[stmt.target] - {ev(stmt.elem)}
            elif isinstance(stmt, MapPut):
                updated = dict(values[stmt.target])
                updated[ev(stmt.key)] = self._guard_nat(
                    concept, stmt, ev(stmt.value), who)
                values[stmt.target] = updated
            elif isinstance(stmt, MapDrop):
                updated = dict(values[stmt.target])
                updated.pop(ev(stmt.key), None)
                values[stmt.target] = updated
            elif isinstance(stmt, Assign):
                values[stmt.target] = self._guard_nat(
                    concept, stmt, ev(stmt.value), who)
            elif isinstance(stmt, Clear):
                comp = concept.component(stmt.target)
                values[stmt.target] = self._default_value(comp.kind)
            else:
                raise TypeError("unknown statement: %r" % (stmt,))
        out = dict(state)
        out[instance] = values
        return out

    def _guard_nat(self, concept: ConceptDef, stmt, value, who: str):
        comp = concept.component(stmt.target)
        kind = comp.kind
        target_sort = kind.value if isinstance(kind, MapKind) else kind.sort
        if target_sort == NAT and isinstance(value, int) and value < 0:
            raise StepError(PRECONDITION_FAILED, who,
                            "Nat component '%s' would go negative"
                            % stmt.target)
        return value

    # -- enumeration ----------------------------------------------------------

    def arg_tuples(self, action) -> list:
        pools = [self.domain.pool(sort) for _, sort in action.params]
        return [tuple(combo) for combo in itertools.product(*pools)]

    def candidate_calls(self, role: str, instances=None) -> list:
        """All syntactically possible initiating calls for a role, in a
        deterministic order. Internal actions are excluded; an `instances`
        filter restricts which instances may initiate."""
        calls = []
        for inst in self.app.instances:
            if instances is not None and inst.name not in instances:
                continue
            concept = self.schemas[inst.name]
            for action in concept.actions:
                if (inst.name, action.name) in self.app.internals:
                    continue
                if role not in roles_of(action.initiator):
                    continue
                for args in self.arg_tuples(action):
                    calls.append(ActionCall(inst.name, action.name, args,
                                            role))
        return calls

    def all_candidate_calls(self, instances=None) -> list:
        return self.candidate_calls(USER, instances) + \
            self.candidate_calls(PROVIDER, instances)

    def enabled(self, state: dict, role: str) -> tuple:
        """The (instance, action) pairs whose initiator admits the role and
        whose own precondition holds for some argument tuple; each comes
        with its first witness tuple."""
        found = {}
        for inst in self.app.instances:
            concept = self.schemas[inst.name]
            for action in concept.actions:
                key = (inst.name, action.name)
                if key in found or key in self.app.internals:
                    continue
                if role not in roles_of(action.initiator):
                    continue
                for args in self.arg_tuples(action):
                    env = {name: value
                           for (name, _), value in zip(action.params, args)}
                    if action.precondition is None:
                        found[key] = args
                        break
                    try:
                        ok = self.eval_in(state, inst.name, env,
                                          action.precondition)
                    except (EvalError, MissingKey):
                        continue
                    if ok:
                        found[key] = args
                        break
        return tuple(sorted((inst, action, args)
                            for (inst, action), args in found.items()))

    def try_step(self, state: dict, call: ActionCall):
        try:
            return self.step(state, call)
        except StepError:
            return None

    def sample_states(self, depth: int, cap: int = 25,
                      instances=None) -> list:
        """A deterministic sample of reachable states: the initial state
        plus breadth-first successors up to `depth`, at most `cap` states."""
        init = self.init_state()
        calls = self.all_candidate_calls(instances)
        states = [init]
        seen = {state_digest(init)}
        frontier = [init]
        for _ in range(depth):
            next_frontier = []
            for state in frontier:
                for call in calls:
                    if len(states) >= cap:
                        return states
                    result = self.try_step(state, call)
                    if result is None:
                        continue
                    post, _ = result
                    digest = state_digest(post)
                    if digest in seen:
                        continue
                    seen.add(digest)
                    states.append(post)
                    next_frontier.append(post)
            frontier = next_frontier
        return states

    def enumerate_traces(self, depth: int, instances=None):
        """The exact set of traces of length <= depth reachable from the
        initial state, including the empty trace, ordered by call-sequence
        key."""
        init = self.init_state()
        calls = self.all_candidate_calls(instances)
        traces = [Trace(())]
        frontier = [((), init)]
        visited = 0
        for _ in range(depth):
            next_frontier = []
            for steps, state in frontier:
                for call in calls:
                    result = self.try_step(state, call)
                    if result is None:
                        continue
                    visited += 1
                    if visited > self.state_cap:
                        raise BudgetExceeded(
                            "state cap %d exceeded" % self.state_cap)
                    post, step = result
                    extended = steps + (step,)
                    traces.append(Trace(extended))
                    next_frontier.append((extended, post))
            frontier = next_frontier
            if not frontier:
                break
        unique = {}
        for trace in traces:
            unique.setdefault(trace.key(), trace)
        return tuple(unique[key] for key in sorted(unique))

    def replay(self, state: dict, calls) -> tuple:
        """Apply a call sequence; returns (final state, Trace). Raises
        StepError on the first failing call."""
        steps = []
        for call in calls:
            state, step = self.step(state, call)
            steps.append(step)
        return state, Trace(tuple(steps))
