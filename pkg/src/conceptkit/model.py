"""Core domain types: sorts, expressions, concepts, apps, and deviation reports.

Everything here is an immutable value; construction is cheap and sharing is
safe. Expression evaluation and static validation live here too, so the rest
of the toolkit can treat a ConceptDef as a checked, executable artifact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

# ---------------------------------------------------------------------------
# Sorts

NAT = "Nat"
MONEY = "Money"
BOOL = "Bool"
TEXT = "Text"
PRIMITIVE_SORTS = (NAT, MONEY, BOOL, TEXT)

# Validator-internal sort of a bare integer literal, compatible with both
# Nat and Money.
_NUM = "Num"


@dataclass(frozen=True)
class EntitySort:
    """Opaque identifier sort (e.g. Item, User); values support equality only."""

    name: str

    def __str__(self) -> str:
        return self.name


Sort = Union[str, EntitySort]


def is_numeric(sort: Sort) -> bool:
    return sort in (NAT, MONEY, _NUM)


def sort_name(sort: Sort) -> str:
    return sort.name if isinstance(sort, EntitySort) else sort


# ---------------------------------------------------------------------------
# Expressions

@dataclass(frozen=True)
class Lit:
    """Integer, boolean, or text literal."""

    value: Union[int, bool, str]


@dataclass(frozen=True)
class EntityLit:
    """A concrete entity identifier, written 'id in source text."""

    value: str


@dataclass(frozen=True)
class Ref:
    """Reference to a parameter or state component, optionally keyed.

    instance is None inside a concept definition; sync rules, guards and UI
    expressions may qualify the reference with an instance or concept name.
    """

    name: str
    key: Optional["Expr"] = None
    instance: Optional[str] = None


@dataclass(frozen=True)
class Bin:
    """Binary operator: + - * = != < <= and or."""

    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    expr: "Expr"


@dataclass(frozen=True)
class InSet:
    elem: "Expr"
    target: Ref


@dataclass(frozen=True)
class Card:
    """Cardinality |S| of a set component."""

    target: Ref


@dataclass(frozen=True)
class Sum:
    """Bounded sum over a set component: sum k in S: body."""

    var: str
    target: Ref
    body: "Expr"


Expr = Union[Lit, EntityLit, Ref, Bin, Not, InSet, Card, Sum]

BOOL_OPS = ("and", "or")


# ---------------------------------------------------------------------------
# State components and update statements

@dataclass(frozen=True)
class ScalarKind:
    sort: Sort


@dataclass(frozen=True)
class SetKind:
    elem: EntitySort


@dataclass(frozen=True)
class MapKind:
    key: EntitySort
    value: Sort


ComponentKind = Union[ScalarKind, SetKind, MapKind]


@dataclass(frozen=True)
class StateComponent:
    name: str
    kind: ComponentKind
    derived: Optional[Expr] = None


@dataclass(frozen=True)
class SetInsert:
    target: str
    elem: Expr


@dataclass(frozen=True)
class SetRemove:
    target: str
    elem: Expr


@dataclass(frozen=True)
class MapPut:
    target: str
    key: Expr
    value: Expr


@dataclass(frozen=True)
class MapDrop:
    target: str
    key: Expr


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr


@dataclass(frozen=True)
class Clear:
    target: str


UpdateStmt = Union[SetInsert, SetRemove, MapPut, MapDrop, Assign, Clear]


# ---------------------------------------------------------------------------
# Concepts

USER = "user"
PROVIDER = "provider"
EITHER = "either"
INITIATORS = (USER, PROVIDER, EITHER)
ROLES = (USER, PROVIDER)


def roles_of(initiator: str) -> frozenset:
    """Concrete roles admitted by an initiator declaration."""
    if initiator == EITHER:
        return frozenset(ROLES)
    return frozenset((initiator,))


@dataclass(frozen=True)
class ActionDef:
    name: str
    params: tuple  # of (name, Sort)
    initiator: str
    precondition: Optional[Expr] = None
    effects: tuple = ()  # of UpdateStmt

    def param_sorts(self) -> tuple:
        return tuple(s for _, s in self.params)


@dataclass(frozen=True)
class ConceptDef:
    name: str
    type_params: tuple  # of entity sort names
    purpose: str
    state: tuple  # of StateComponent
    actions: tuple  # of ActionDef

    def component(self, name: str) -> Optional[StateComponent]:
        for c in self.state:
            if c.name == name:
                return c
        return None

    def action(self, name: str) -> Optional[ActionDef]:
        for a in self.actions:
            if a.name == name:
                return a
        return None

    def stored_components(self) -> tuple:
        return tuple(c for c in self.state if c.derived is None)


# ---------------------------------------------------------------------------
# App models

@dataclass(frozen=True)
class Instance:
    name: str
    concept: str
    implements: Optional[str] = None


@dataclass(frozen=True)
class Trigger:
    instance: str
    action: str
    params: tuple  # of str, binding names for the trigger's arguments


@dataclass(frozen=True)
class Reaction:
    instance: str
    action: str
    args: tuple  # of Expr over trigger params and readable state


@dataclass(frozen=True)
class SyncRule:
    name: str
    trigger: Trigger
    reactions: tuple = ()  # of Reaction
    require: Optional[Expr] = None


@dataclass(frozen=True)
class VLit:
    value: Union[int, bool, str]


@dataclass(frozen=True)
class VEntity:
    value: str


@dataclass(frozen=True)
class VSet:
    items: tuple


@dataclass(frozen=True)
class VMap:
    pairs: tuple  # of (key entity id, leaf value)


ValueLit = Union[VLit, VEntity, VSet, VMap]


@dataclass(frozen=True)
class InitClause:
    instance: str
    component: str
    value: ValueLit


@dataclass(frozen=True)
class AppModel:
    """A composed candidate design: inline concept definitions, instances,
    initial-state overrides, internal (non-initiable) action markers, and
    synchronization rules."""

    name: str
    concepts: tuple  # of ConceptDef, declaration order
    instances: tuple  # of Instance
    inits: tuple = ()  # of InitClause
    internals: frozenset = frozenset()  # of (instance, action)
    syncs: tuple = ()  # of SyncRule

    def concept(self, name: str) -> Optional[ConceptDef]:
        for c in self.concepts:
            if c.name == name:
                return c
        return None

    def instance(self, name: str) -> Optional[Instance]:
        for i in self.instances:
            if i.name == name:
                return i
        return None

    def concept_of(self, instance: str) -> Optional[ConceptDef]:
        inst = self.instance(instance)
        return self.concept(inst.concept) if inst else None


# ---------------------------------------------------------------------------
# Deviations and findings

MISSING_ACTION = "MissingAction"
INITIATOR_MISMATCH = "InitiatorMismatch"
PRECONDITION_MISMATCH = "PreconditionMismatch"
BEHAVIOR_MISMATCH = "BehaviorMismatch"
MISSING_STATE = "MissingState"
MISSING_SYNC = "MissingSync"
UNEXPECTED_SYNC = "UnexpectedSync"
MAPPING_VIOLATION = "MappingViolation"
EXTENSION = "Extension"

OBSERVED_VS_EXPECTED = "ObservedVsExpected"
IMPLEMENTED_VS_EXPECTED = "ImplementedVsExpected"
DYADS = (IMPLEMENTED_VS_EXPECTED, OBSERVED_VS_EXPECTED)

CORRESPONDENCE = "Correspondence"
FAITHFULNESS = "Faithfulness"
CONSISTENCY = "Consistency"
SYMMETRY = "Symmetry"
CONVENTIONS = "Conventions"
REACH_PARITY = "ReachParity"
STANDARD = "Standard"
PRINCIPLES = (CORRESPONDENCE, FAITHFULNESS, CONSISTENCY, SYMMETRY,
              CONVENTIONS, REACH_PARITY, STANDARD)


@dataclass(frozen=True)
class Deviation:
    category: str
    subject: str
    dyad: str
    evidence: str
    principle: Optional[str] = None

    def category_label(self) -> str:
        if self.category == MAPPING_VIOLATION and self.principle:
            return "%s(%s)" % (self.category, self.principle)
        return self.category

    def sort_key(self) -> tuple:
        return (self.dyad, self.category_label(), self.subject, self.evidence)


BENEFITS_PROVIDER = "provider"
BENEFITS_USER = "user"
BENEFITS_NEUTRAL = "neutral"


@dataclass(frozen=True)
class DarkFinding:
    deviation: Deviation
    beneficiary: str
    dark: bool


# ---------------------------------------------------------------------------
# Static validation

@dataclass(frozen=True)
class StaticError:
    code: str
    location: str
    message: str

    def __str__(self) -> str:
        return "%s at %s: %s" % (self.code, self.location, self.message)


class _SortChecker:
    """Infers expression sorts against a concept's schema and a parameter
    environment, collecting one StaticError per violation."""

    def __init__(self, concept: ConceptDef, errors: list, location: str):
        self.concept = concept
        self.errors = errors
        self.location = location

    def fail(self, code: str, message: str) -> str:
        self.errors.append(StaticError(code, self.location, message))
        return _NUM  # recover with a permissive sort

    def ref_component(self, ref: Ref) -> Optional[StateComponent]:
        if ref.instance is not None:
            self.fail("QualifiedRefInConcept",
                      "'%s.%s' qualified references are not allowed inside a "
                      "concept definition" % (ref.instance, ref.name))
            return None
        return self.concept.component(ref.name)

    def infer(self, expr: Expr, params: dict) -> Sort:
        if isinstance(expr, Lit):
            if isinstance(expr.value, bool):
                return BOOL
            if isinstance(expr.value, int):
                return _NUM
            return TEXT
        if isinstance(expr, EntityLit):
            return _ANY_ENTITY
        if isinstance(expr, Ref):
            return self.infer_ref(expr, params)
        if isinstance(expr, Bin):
            return self.infer_bin(expr, params)
        if isinstance(expr, Not):
            inner = self.infer(expr.expr, params)
            if inner != BOOL:
                self.fail("SortMismatch", "'not' applied to non-Bool expression")
            return BOOL
        if isinstance(expr, InSet):
            comp = self.ref_component(expr.target)
            if comp is None and expr.target.instance is None:
                self.fail("UnknownStateRef",
                          "unknown set component '%s'" % expr.target.name)
            if comp is not None and not isinstance(comp.kind, SetKind):
                self.fail("SortMismatch",
                          "'in' requires a set component, got '%s'" % comp.name)
            elem = self.infer(expr.elem, params)
            if comp is not None and isinstance(comp.kind, SetKind):
                self.check_assignable(elem, comp.kind.elem, "'in' element")
            return BOOL
        if isinstance(expr, Card):
            comp = self.ref_component(expr.target)
            if comp is None:
                if expr.target.instance is None:
                    self.fail("UnknownStateRef",
                              "unknown set component '%s'" % expr.target.name)
            elif not isinstance(comp.kind, SetKind):
                self.fail("SortMismatch",
                          "cardinality requires a set component")
            return NAT
        if isinstance(expr, Sum):
            comp = self.ref_component(expr.target)
            if comp is None:
                if expr.target.instance is None:
                    self.fail("UnknownStateRef",
                              "unknown set component '%s'" % expr.target.name)
                return _NUM
            if not isinstance(comp.kind, SetKind):
                self.fail("SumOverNonSet",
                          "sum ranges over '%s' which is not a set" % comp.name)
                return _NUM
            inner = dict(params)
            inner[expr.var] = comp.kind.elem
            body = self.infer(expr.body, inner)
            if not is_numeric(body):
                self.fail("SortMismatch", "sum body must be numeric")
            return body
        raise TypeError("unknown expression node: %r" % (expr,))

    def infer_ref(self, ref: Ref, params: dict) -> Sort:
        if ref.instance is not None:
            self.fail("QualifiedRefInConcept",
                      "'%s.%s' qualified references are not allowed inside a "
                      "concept definition" % (ref.instance, ref.name))
            return _NUM
        if ref.key is None and ref.name in params:
            return params[ref.name]
        comp = self.concept.component(ref.name)
        if comp is None:
            self.fail("UnknownStateRef", "unknown reference '%s'" % ref.name)
            return _NUM
        if ref.key is not None:
            if not isinstance(comp.kind, MapKind):
                self.fail("SortMismatch",
                          "'%s' is not a map but is keyed" % ref.name)
                return _NUM
            key = self.infer(ref.key, params)
            self.check_assignable(key, comp.kind.key, "map key")
            return comp.kind.value
        if isinstance(comp.kind, ScalarKind):
            return comp.kind.sort
        if isinstance(comp.kind, MapKind):
            self.fail("SortMismatch", "map '%s' used without a key" % ref.name)
            return comp.kind.value
        self.fail("SortMismatch",
                  "set '%s' cannot be used as a plain value" % ref.name)
        return _NUM

    def infer_bin(self, expr: Bin, params: dict) -> Sort:
        left = self.infer(expr.left, params)
        right = self.infer(expr.right, params)
        op = expr.op
        if op in BOOL_OPS:
            if left != BOOL or right != BOOL:
                self.fail("SortMismatch", "'%s' requires Bool operands" % op)
            return BOOL
        if op in ("=", "!="):
            if not self.comparable(left, right):
                self.fail("SortMismatch",
                          "'%s' compares incompatible sorts %s and %s"
                          % (op, sort_name(left), sort_name(right)))
            return BOOL
        if op in ("<", "<="):
            if not (is_numeric(left) and is_numeric(right)
                    and self.comparable(left, right)):
                self.fail("SortMismatch",
                          "'%s' requires numeric operands of one sort" % op)
            return BOOL
        if op == "*":
            if not (is_numeric(left) and is_numeric(right)):
                self.fail("SortMismatch", "'*' requires numeric operands")
                return _NUM
            if MONEY in (left, right):
                if left == MONEY and right == MONEY:
                    self.fail("SortMismatch", "cannot multiply Money by Money")
                return MONEY
            return NAT if NAT in (left, right) else _NUM
        if op in ("+", "-"):
            if not (is_numeric(left) and is_numeric(right)
                    and self.comparable(left, right)):
                self.fail("SortMismatch",
                          "'%s' requires numeric operands of one sort" % op)
                return _NUM
            return self.join(left, right)
        raise ValueError("unknown operator %r" % op)

    @staticmethod
    def comparable(a: Sort, b: Sort) -> bool:
        if a == b:
            return True
        if _NUM in (a, b):
            return is_numeric(a) and is_numeric(b) or a == b
        if a is _ANY_ENTITY or b is _ANY_ENTITY:
            return isinstance(a, EntitySort) or isinstance(b, EntitySort) \
                or a is _ANY_ENTITY and b is _ANY_ENTITY
        return False

    @staticmethod
    def join(a: Sort, b: Sort) -> Sort:
        if a == _NUM:
            return b
        return a

    def check_assignable(self, actual: Sort, expected: Sort, what: str) -> None:
        if expected == _NUM or actual == _NUM:
            if is_numeric(expected) and is_numeric(actual):
                return
        if actual is _ANY_ENTITY and isinstance(expected, EntitySort):
            return
        if actual != expected:
            self.fail("SortMismatch",
                      "%s has sort %s, expected %s"
                      % (what, sort_name(actual), sort_name(expected)))


class _AnyEntity:
    """Sort of an entity literal before unification; assignable to any
    entity sort."""

    def __repr__(self) -> str:
        return "<entity>"


_ANY_ENTITY = _AnyEntity()


def validate_concept(concept: ConceptDef) -> list:
    """Statically check a concept definition.

    Returns an empty list iff every invariant holds: unique names, declared
    sorts, well-sorted expressions, derived components never written and
    derived expressions referencing only stored components.
    """
    errors: list = []
    loc = concept.name

    def err(code, location, message):
        errors.append(StaticError(code, location, message))

    declared_entities = set(concept.type_params)
    seen_state = set()
    for comp in concept.state:
        cloc = "%s.state.%s" % (concept.name, comp.name)
        if comp.name in seen_state:
            err("DuplicateState", cloc, "state component declared twice")
        seen_state.add(comp.name)
        for s in _kind_sorts(comp.kind):
            if isinstance(s, EntitySort) and s.name not in declared_entities:
                err("UnknownSort", cloc,
                    "entity sort '%s' is not a type parameter" % s.name)
        if isinstance(comp.kind, (SetKind, MapKind)) and comp.derived is not None:
            err("DerivedKindError", cloc,
                "derived components must be scalars")
        if comp.derived is not None:
            checker = _SortChecker(concept, errors, cloc)
            got = checker.infer(comp.derived, {})
            if isinstance(comp.kind, ScalarKind):
                checker.check_assignable(got, comp.kind.sort, "derived value")
            for ref in _state_refs(comp.derived):
                target = concept.component(ref)
                if target is not None and target.derived is not None:
                    err("DerivedRefsDerived", cloc,
                        "derived component references derived '%s'" % ref)

    seen_actions = set()
    for action in concept.actions:
        aloc = "%s.%s" % (concept.name, action.name)
        if action.name in seen_actions:
            err("DuplicateAction", aloc, "action declared twice")
        seen_actions.add(action.name)
        if action.initiator not in INITIATORS:
            err("BadInitiator", aloc,
                "initiator must be user, provider, or either")
        params = {}
        for pname, psort in action.params:
            if pname in params:
                err("DuplicateParam", aloc, "parameter '%s' repeated" % pname)
            if isinstance(psort, EntitySort) and \
                    psort.name not in declared_entities:
                err("UnknownSort", aloc,
                    "entity sort '%s' is not a type parameter" % psort.name)
            params[pname] = psort
        if action.precondition is not None:
            checker = _SortChecker(concept, errors,
                                   aloc + ".requires")
            got = checker.infer(action.precondition, params)
            if got != BOOL:
                err("NonBoolPrecondition", aloc + ".requires",
                    "precondition must be Bool-sorted")
        for i, stmt in enumerate(action.effects):
            _validate_stmt(concept, stmt, params, errors,
                           "%s.effects[%d]" % (aloc, i))

    return errors


def _validate_stmt(concept: ConceptDef, stmt: UpdateStmt, params: dict,
                   errors: list, loc: str) -> None:
    checker = _SortChecker(concept, errors, loc)
    comp = concept.component(stmt.target)
    if comp is None:
        errors.append(StaticError("UnknownStateRef", loc,
                                  "effect targets undeclared component '%s'"
                                  % stmt.target))
        return
    if comp.derived is not None:
        errors.append(StaticError("DerivedWriteError", loc,
                                  "effect writes derived component '%s'"
                                  % stmt.target))
        return
    kind = comp.kind
    if isinstance(stmt, (SetInsert, SetRemove)):
        if not isinstance(kind, SetKind):
            errors.append(StaticError("UpdateKindMismatch", loc,
                                      "'%s' is not a set" % stmt.target))
            return
        checker.check_assignable(checker.infer(stmt.elem, params),
                                 kind.elem, "set element")
    elif isinstance(stmt, (MapPut, MapDrop)):
        if not isinstance(kind, MapKind):
            errors.append(StaticError("UpdateKindMismatch", loc,
                                      "'%s' is not a map" % stmt.target))
            return
        checker.check_assignable(checker.infer(stmt.key, params),
                                 kind.key, "map key")
        if isinstance(stmt, MapPut):
            checker.check_assignable(checker.infer(stmt.value, params),
                                     kind.value, "map value")
    elif isinstance(stmt, Assign):
        if not isinstance(kind, ScalarKind):
            errors.append(StaticError("UpdateKindMismatch", loc,
                                      "'%s' is not a scalar" % stmt.target))
            return
        checker.check_assignable(checker.infer(stmt.value, params),
                                 kind.sort, "assigned value")
    elif isinstance(stmt, Clear):
        pass  # any component kind may be cleared
    else:
        raise TypeError("unknown statement node: %r" % (stmt,))


def _kind_sorts(kind: ComponentKind) -> tuple:
    if isinstance(kind, ScalarKind):
        return (kind.sort,)
    if isinstance(kind, SetKind):
        return (kind.elem,)
    return (kind.key, kind.value)


def _state_refs(expr: Expr) -> set:
    """Names of unqualified, unkeyed-or-keyed references inside an expression."""
    out: set = set()
    _walk_refs(expr, out)
    return out


def _walk_refs(expr: Expr, out: set) -> None:
    if isinstance(expr, Ref):
        if expr.instance is None:
            out.add(expr.name)
        if expr.key is not None:
            _walk_refs(expr.key, out)
    elif isinstance(expr, Bin):
        _walk_refs(expr.left, out)
        _walk_refs(expr.right, out)
    elif isinstance(expr, Not):
        _walk_refs(expr.expr, out)
    elif isinstance(expr, InSet):
        _walk_refs(expr.elem, out)
        if expr.target.instance is None:
            out.add(expr.target.name)
    elif isinstance(expr, Card):
        if expr.target.instance is None:
            out.add(expr.target.name)
    elif isinstance(expr, Sum):
        if expr.target.instance is None:
            out.add(expr.target.name)
        _walk_refs(expr.body, out)


# ---------------------------------------------------------------------------
# Evaluation

class MissingKey(Exception):
    """Raised when a map lookup has no entry for the requested key."""

    def __init__(self, component: str, key):
        self.component = component
        self.key = key
        super().__init__("no entry for key %r in map '%s'" % (key, component))


class EvalError(Exception):
    pass


@dataclass(frozen=True)
class ConceptState:
    """A concept's stored state: component name -> value.

    Scalars are plain Python values, sets are frozensets of entity ids, maps
    are tuples of sorted (key, value) pairs exposed through lookup helpers.
    Derived components are never stored; they are evaluated on read.
    """

    concept: ConceptDef
    values: tuple  # of (component name, value), sorted by name

    @staticmethod
    def make(concept: ConceptDef, mapping: dict) -> "ConceptState":
        return ConceptState(concept, tuple(sorted(mapping.items())))

    def as_dict(self) -> dict:
        return dict(self.values)

    def get(self, name: str):
        for n, v in self.values:
            if n == name:
                return v
        raise EvalError("no stored component '%s' in %s"
                        % (name, self.concept.name))


def eval_expr(state: ConceptState, env: dict, expr: Expr):
    """Evaluate a concept-local expression. Pure and deterministic.

    env binds action parameters and sum variables. Raises MissingKey when a
    map lookup finds no entry.
    """
    return _eval(state.concept, state.as_dict(), env, expr)


def _eval(concept: ConceptDef, values: dict, env: dict, expr: Expr,
          resolver=None):
    """Recursive evaluator. resolver maps an instance name to a
    (ConceptDef, values dict) pair so app-level expressions can read the
    state of other concept instances."""
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, EntityLit):
        return expr.value
    if isinstance(expr, Ref):
        return _eval_ref(concept, values, env, expr, resolver)
    if isinstance(expr, Bin):
        return _eval_bin(concept, values, env, expr, resolver)
    if isinstance(expr, Not):
        return not _eval(concept, values, env, expr.expr, resolver)
    if isinstance(expr, InSet):
        elem = _eval(concept, values, env, expr.elem, resolver)
        members = _resolve_collection(concept, values, env, expr.target,
                                      resolver)
        return elem in members
    if isinstance(expr, Card):
        return len(_resolve_collection(concept, values, env, expr.target,
                                       resolver))
    if isinstance(expr, Sum):
        members = _resolve_collection(concept, values, env, expr.target,
                                      resolver)
        total = 0
        for member in sorted(members):
            inner = dict(env)
            inner[expr.var] = member
            total += _eval(concept, values, inner, expr.body, resolver)
        return total
    raise TypeError("unknown expression node: %r" % (expr,))


def _retarget(concept: ConceptDef, values: dict, ref: Ref, resolver):
    """Resolve a possibly qualified reference to its owning concept+values."""
    if ref.instance is None:
        return concept, values
    if resolver is None:
        raise EvalError("qualified reference '%s.%s' outside app context"
                        % (ref.instance, ref.name))
    return resolver(ref.instance)


def _eval_ref(concept: ConceptDef, values: dict, env: dict, ref: Ref,
              resolver):
    if ref.instance is None and ref.key is None and ref.name in env:
        return env[ref.name]
    owner, owner_values = _retarget(concept, values, ref, resolver)
    comp = owner.component(ref.name)
    if comp is None:
        raise EvalError("unknown reference '%s'" % ref.name)
    if comp.derived is not None:
        return _eval(owner, owner_values, {}, comp.derived, resolver)
    stored = owner_values[ref.name]
    if ref.key is not None:
        # The key expression evaluates in the referencing context, not the
        # owning instance's.
        key = _eval(concept, values, env, ref.key, resolver)
        if key not in stored:
            raise MissingKey(ref.name, key)
        return stored[key]
    return stored


def _resolve_collection(concept: ConceptDef, values: dict, env: dict,
                        ref: Ref, resolver):
    owner, owner_values = _retarget(concept, values, ref, resolver)
    comp = owner.component(ref.name)
    if comp is None:
        raise EvalError("unknown set component '%s'" % ref.name)
    return owner_values[ref.name]


def _eval_bin(concept: ConceptDef, values: dict, env: dict, expr: Bin,
              resolver):
    op = expr.op
    if op == "and":
        return bool(_eval(concept, values, env, expr.left, resolver)) and \
            bool(_eval(concept, values, env, expr.right, resolver))
    if op == "or":
        return bool(_eval(concept, values, env, expr.left, resolver)) or \
            bool(_eval(concept, values, env, expr.right, resolver))
    left = _eval(concept, values, env, expr.left, resolver)
    right = _eval(concept, values, env, expr.right, resolver)
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    raise ValueError("unknown operator %r" % op)
