"""Recursive-descent parsers for the textual formats.

One lexer feeds five small grammars: concept files, app files, UI files,
catalog entries, and scenario files. Parsing is a pure function of the
source text; the first syntax error aborts with a positioned ParseError,
and unresolved cross-references inside app files raise LinkError at the
referencing position (declaration before use).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from ..model import (
    NAT, MONEY, BOOL, TEXT, EntitySort,
    Lit, EntityLit, Ref, Bin, Not, InSet, Card, Sum,
    ScalarKind, SetKind, MapKind, StateComponent,
    SetInsert, SetRemove, MapPut, MapDrop, Assign, Clear,
    ActionDef, ConceptDef, Instance, Trigger, Reaction, SyncRule,
    VLit, VEntity, VSet, VMap, InitClause, AppModel,
    USER, PROVIDER, EITHER,
)
from ..ui import (
    UIElement, UIModel, Screen,
    TriggersAction, DisplaysState, ClaimsState, StaticBinding, CallTemplate,
    ELEMENT_KINDS,
    RequireDisplay, RequireControl, LabelReservation, GuardedControl,
    EqualProminence, ReachParity, ConsistencyGroup,
    SCOPE_GLOBAL, SCOPE_PER_ITEM,
)
from ..catalog_types import (
    CatalogEntry, VariantRef, Scenario, ExpectedDeviation, Benefit,
    DomainSpec,
)

KIND_CONCEPT = "Concept"
KIND_APP = "App"
KIND_UI = "UI"
KIND_CATALOG = "Catalog"
KIND_SCENARIO = "Scenario"

_EXTENSIONS = {
    ".concept": KIND_CONCEPT,
    ".app": KIND_APP,
    ".ui": KIND_UI,
    ".catalog": KIND_CATALOG,
    ".scenario": KIND_SCENARIO,
}


@dataclass(frozen=True)
class SourceFile:
    path: str
    kind: str
    text: str

    @staticmethod
    def load(path: str) -> "SourceFile":
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
        return SourceFile(path, kind_of(path), text)

    @staticmethod
    def of(text: str, kind: str, path: str = "<memory>") -> "SourceFile":
        return SourceFile(path, kind, text)


def kind_of(path: str) -> str:
    ext = os.path.splitext(path)[1]
    if ext not in _EXTENSIONS:
        raise ValueError("unrecognized source extension %r" % ext)
    return _EXTENSIONS[ext]


class ParseError(Exception):
    """Syntax error with a 1-based source position."""

    def __init__(self, line: int, column: int, message: str,
                 expected: tuple = ()):
        self.line = line
        self.column = column
        self.message = message
        self.expected = expected
        super().__init__("%d:%d: %s" % (line, column, message))


class LinkError(ParseError):
    """A structurally valid file references something it never declared."""


# ---------------------------------------------------------------------------
# Lexer

IDENT, INT, NUMBER, STRING, TICK, OP, EOF = (
    "ident", "int", "number", "string", "tick", "op", "eof")

_PUNCT = ("->", ":=", "+=", "-=", "!=", "<=", ">=",
          "(", ")", "{", "}", "[", "]", ",", ";", ":", ".",
          "=", "<", ">", "+", "-", "*", "|")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "/" and text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token(IDENT, text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                tokens.append(Token(NUMBER, text[i:j], start_line, start_col))
            else:
                tokens.append(Token(INT, text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            out = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    esc = text[j + 1]
                    out.append({"n": "\n", "t": "\t"}.get(esc, esc))
                    j += 2
                elif text[j] == "\n":
                    raise ParseError(start_line, start_col,
                                     "unterminated string literal")
                else:
                    out.append(text[j])
                    j += 1
            if j >= n:
                raise ParseError(start_line, start_col,
                                 "unterminated string literal")
            tokens.append(Token(STRING, "".join(out), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch == "'":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j == i + 1:
                raise ParseError(start_line, start_col,
                                 "empty entity literal")
            tokens.append(Token(TICK, text[i + 1:j], start_line, start_col))
            col += j - i
            i = j
            continue
        for punct in _PUNCT:
            if text.startswith(punct, i):
                tokens.append(Token(OP, punct, start_line, start_col))
                i += len(punct)
                col += len(punct)
                break
        else:
            raise ParseError(start_line, start_col,
                             "unexpected character %r" % ch)
    # Position EOF at the end of input so errors stay inside the text.
    tokens.append(Token(EOF, "", line, col))
    return tokens


# Words that cannot start a plain reference inside an expression.
_EXPR_RESERVED = frozenset(("sum", "not", "and", "or", "in", "true", "false"))


class Parser:
    """Token-stream walker shared by all five grammars."""

    def __init__(self, src: SourceFile):
        self.src = src
        self.tokens = tokenize(src.text)
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind in (IDENT, OP) and tok.value == value

    def at_kind(self, kind: str) -> bool:
        return self.peek().kind == kind

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.advance()
            return True
        return False

    def error(self, message: str, expected: tuple = (),
              token: Optional[Token] = None):
        tok = token or self.peek()
        raise ParseError(tok.line, tok.col, message, expected)

    def link_error(self, message: str, token: Token):
        raise LinkError(token.line, token.col, message)

    def expect(self, value: str) -> Token:
        if not self.at(value):
            tok = self.peek()
            shown = tok.value if tok.kind != EOF else "end of file"
            self.error("expected '%s', found %r" % (value, shown), (value,))
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != IDENT:
            self.error("expected %s" % what, (what,))
        return self.advance()

    def expect_string(self, what: str = "string literal") -> str:
        tok = self.peek()
        if tok.kind != STRING:
            self.error("expected %s" % what, (what,))
        return self.advance().value

    def expect_int(self, what: str = "integer") -> int:
        tok = self.peek()
        if tok.kind != INT:
            self.error("expected %s" % what, (what,))
        return int(self.advance().value)

    def expect_number(self, what: str = "number") -> float:
        tok = self.peek()
        if tok.kind not in (INT, NUMBER):
            self.error("expected %s" % what, (what,))
        return float(self.advance().value)

    def expect_eof(self) -> None:
        if not self.at_kind(EOF):
            tok = self.peek()
            self.error("unexpected %r after end of definition" % tok.value)

    # -- sorts --------------------------------------------------------------

    def parse_sort(self):
        tok = self.expect_ident("sort name")
        if tok.value in (NAT, MONEY, BOOL, TEXT):
            return tok.value
        return EntitySort(tok.value)

    def parse_entity_sort(self) -> EntitySort:
        sort = self.parse_sort()
        if not isinstance(sort, EntitySort):
            self.error("expected an entity sort", token=self.tokens[self.pos - 1])
        return sort

    # -- expressions --------------------------------------------------------

    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.at("or"):
            self.advance()
            left = Bin("or", left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.at("and"):
            self.advance()
            left = Bin("and", left, self.parse_not())
        return left

    def parse_not(self):
        if self.at("not"):
            self.advance()
            return Not(self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_additive()
        tok = self.peek()
        if tok.kind == OP and tok.value in ("=", "!=", "<", "<=", ">", ">="):
            self.advance()
            right = self.parse_additive()
            # > and >= are sugar: normalize by swapping operands.
            if tok.value == ">":
                return Bin("<", right, left)
            if tok.value == ">=":
                return Bin("<=", right, left)
            return Bin(tok.value, left, right)
        if self.at("in"):
            self.advance()
            target = self.parse_ref(allow_key=False)
            return InSet(left, target)
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.peek().kind == OP and self.peek().value in ("+", "-"):
            op = self.advance().value
            left = Bin(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self):
        left = self.parse_atom()
        while self.peek().kind == OP and self.peek().value == "*":
            self.advance()
            left = Bin("*", left, self.parse_atom())
        return left

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == INT:
            self.advance()
            return Lit(int(tok.value))
        if tok.kind == STRING:
            self.advance()
            return Lit(tok.value)
        if tok.kind == TICK:
            self.advance()
            return EntityLit(tok.value)
        if self.at("true"):
            self.advance()
            return Lit(True)
        if self.at("false"):
            self.advance()
            return Lit(False)
        if self.at("|"):
            self.advance()
            target = self.parse_ref(allow_key=False)
            self.expect("|")
            return Card(target)
        if self.at("sum"):
            self.advance()
            var = self.expect_ident("sum variable").value
            self.expect("in")
            target = self.parse_ref(allow_key=False)
            self.expect(":")
            body = self.parse_expr()
            return Sum(var, target, body)
        if self.at("("):
            self.advance()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        if tok.kind == IDENT and tok.value not in _EXPR_RESERVED:
            return self.parse_ref()
        self.error("expected an expression", ("expression",))

    def parse_ref(self, allow_key: bool = True) -> Ref:
        first = self.expect_ident("reference").value
        instance = None
        name = first
        if self.at(".") and self.peek(1).kind == IDENT:
            self.advance()
            instance = first
            name = self.expect_ident("component name").value
        key = None
        if allow_key and self.at("["):
            self.advance()
            key = self.parse_expr()
            self.expect("]")
        elif not allow_key and self.at("["):
            self.error("keyed reference not allowed here")
        return Ref(name, key, instance)

    # -- concept definitions -------------------------------------------------

    def parse_concept_def(self) -> ConceptDef:
        self.expect("concept")
        name = self.expect_ident("concept name").value
        type_params = []
        if self.accept("["):
            type_params.append(self.expect_ident("type parameter").value)
            while self.accept(","):
                type_params.append(self.expect_ident("type parameter").value)
            self.expect("]")
        self.expect("purpose")
        purpose = self.expect_string("purpose string")
        state = []
        self.expect("state")
        while not self.at("actions") and not self.at_kind(EOF):
            state.append(self.parse_state_decl())
        self.expect("actions")
        actions = [self.parse_action_decl()]
        while self.peek().kind == IDENT and self.peek(1).kind == OP \
                and self.peek(1).value == "(":
            actions.append(self.parse_action_decl())
        return ConceptDef(name, tuple(type_params), purpose,
                          tuple(state), tuple(actions))

    def parse_state_decl(self) -> StateComponent:
        if self.accept("derived"):
            name = self.expect_ident("component name").value
            self.expect(":")
            sort = self.parse_sort()
            self.expect("=")
            expr = self.parse_expr()
            return StateComponent(name, ScalarKind(sort), expr)
        name = self.expect_ident("component name").value
        self.expect(":")
        if self.accept("one"):
            return StateComponent(name, ScalarKind(self.parse_sort()))
        if self.accept("set"):
            return StateComponent(name, SetKind(self.parse_entity_sort()))
        key = self.parse_sort()
        self.expect("->")
        value = self.parse_sort()
        if not isinstance(key, EntitySort):
            self.error("map keys must be entity sorts",
                       token=self.tokens[self.pos - 3])
        return StateComponent(name, MapKind(key, value))

    def parse_action_decl(self) -> ActionDef:
        name = self.expect_ident("action name").value
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.parse_param())
            while self.accept(","):
                params.append(self.parse_param())
        self.expect(")")
        if not self.at("by"):
            self.error("expected initiator clause 'by user|provider|either'",
                       ("by",))
        self.advance()
        tok = self.peek()
        if tok.kind == IDENT and tok.value in (USER, PROVIDER, EITHER):
            initiator = self.advance().value
        else:
            self.error("expected initiator keyword user, provider, or either",
                       (USER, PROVIDER, EITHER))
        precondition = None
        if self.accept("requires"):
            precondition = self.parse_expr()
        effects = []
        if self.accept("effects"):
            effects.append(self.parse_stmt())
            while self.accept(";"):
                effects.append(self.parse_stmt())
        return ActionDef(name, tuple(params), initiator, precondition,
                         tuple(effects))

    def parse_param(self):
        name = self.expect_ident("parameter name").value
        self.expect(":")
        return (name, self.parse_sort())

    def parse_stmt(self):
        if self.accept("clear"):
            return Clear(self.expect_ident("component name").value)
        if self.accept("drop"):
            target = self.expect_ident("map component").value
            self.expect("[")
            key = self.parse_expr()
            self.expect("]")
            return MapDrop(target, key)
        target = self.expect_ident("component name").value
        if self.accept("["):
            key = self.parse_expr()
            self.expect("]")
            self.expect(":=")
            return MapPut(target, key, self.parse_expr())
        if self.accept("+="):
            return SetInsert(target, self.parse_expr())
        if self.accept("-="):
            return SetRemove(target, self.parse_expr())
        self.expect(":=")
        return Assign(target, self.parse_expr())

    # -- app files -----------------------------------------------------------

    def parse_app_model(self) -> AppModel:
        self.expect("app")
        name = self.expect_ident("app name").value
        concepts: list = []
        instances: list = []
        inits: list = []
        internals: set = set()
        syncs: list = []
        concept_names: set = set()
        instance_map: dict = {}
        while not self.at_kind(EOF):
            if self.at("concept"):
                concept = self.parse_concept_def()
                concepts.append(concept)
                concept_names.add(concept.name)
            elif self.at("instance"):
                self.advance()
                iname = self.expect_ident("instance name").value
                self.expect(":")
                ctok = self.expect_ident("concept name")
                implements = None
                if self.accept("implements"):
                    implements = self.expect_ident("standard name").value
                if ctok.value not in concept_names:
                    self.link_error("instance references undeclared concept "
                                    "'%s'" % ctok.value, ctok)
                inst = Instance(iname, ctok.value, implements)
                instances.append(inst)
                instance_map[iname] = next(
                    c for c in concepts if c.name == ctok.value)
            elif self.at("init"):
                self.advance()
                itok = self.expect_ident("instance name")
                self.expect(".")
                ctok = self.expect_ident("component name")
                self.expect("=")
                value = self.parse_value_lit()
                concept = instance_map.get(itok.value)
                if concept is None:
                    self.link_error("init references undeclared instance "
                                    "'%s'" % itok.value, itok)
                if concept.component(ctok.value) is None:
                    self.link_error("init references unknown component "
                                    "'%s.%s'" % (itok.value, ctok.value), ctok)
                inits.append(InitClause(itok.value, ctok.value, value))
            elif self.at("internal"):
                self.advance()
                itok = self.expect_ident("instance name")
                self.expect(".")
                atok = self.expect_ident("action name")
                concept = instance_map.get(itok.value)
                if concept is None:
                    self.link_error("internal references undeclared instance "
                                    "'%s'" % itok.value, itok)
                if concept.action(atok.value) is None:
                    self.link_error("internal references unknown action "
                                    "'%s.%s'" % (itok.value, atok.value), atok)
                internals.add((itok.value, atok.value))
            elif self.at("sync"):
                syncs.append(self.parse_sync_rule(instance_map))
            else:
                self.error("expected concept, instance, init, internal, "
                           "or sync declaration",
                           ("concept", "instance", "init", "internal", "sync"))
        return AppModel(name, tuple(concepts), tuple(instances),
                        tuple(inits), frozenset(internals), tuple(syncs))

    def parse_sync_rule(self, instance_map: dict) -> SyncRule:
        self.expect("sync")
        name = self.expect_ident("sync name").value
        self.expect("when")
        itok = self.peek()
        inst, action, args, atok = self.parse_call()
        concept = instance_map.get(inst)
        if concept is None:
            self.link_error("sync references undeclared instance '%s'"
                            % inst, itok)
        action_def = concept.action(action)
        if action_def is None:
            self.link_error("sync references unknown action '%s.%s'"
                            % (inst, action), atok)
        params = []
        for arg in args:
            if not isinstance(arg, Ref) or arg.instance is not None \
                    or arg.key is not None:
                self.link_error("trigger arguments must be plain binding "
                                "names", atok)
            params.append(arg.name)
        if len(params) != len(action_def.params):
            self.link_error("trigger arity mismatch for '%s.%s'"
                            % (inst, action), atok)
        trigger = Trigger(inst, action, tuple(params))
        require = None
        if self.accept("require"):
            require = self.parse_expr()
        reactions = []
        if self.accept("then"):
            while True:
                rtok = self.peek()
                rinst, raction, rargs, ratok = self.parse_call()
                rconcept = instance_map.get(rinst)
                if rconcept is None:
                    self.link_error("sync references undeclared instance "
                                    "'%s'" % rinst, rtok)
                raction_def = rconcept.action(raction)
                if raction_def is None:
                    self.link_error("sync references unknown action '%s.%s'"
                                    % (rinst, raction), ratok)
                if len(rargs) != len(raction_def.params):
                    self.link_error("reaction arity mismatch for '%s.%s'"
                                    % (rinst, raction), ratok)
                reactions.append(Reaction(rinst, raction, tuple(rargs)))
                if not self.accept(","):
                    break
        if require is None and not reactions:
            self.error("sync rule needs a require clause or reactions")
        return SyncRule(name, trigger, tuple(reactions), require)

    def parse_call(self):
        itok = self.expect_ident("instance name")
        self.expect(".")
        atok = self.expect_ident("action name")
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.parse_expr())
            while self.accept(","):
                args.append(self.parse_expr())
        self.expect(")")
        return itok.value, atok.value, args, atok

    def parse_value_lit(self):
        tok = self.peek()
        if tok.kind == INT:
            self.advance()
            return VLit(int(tok.value))
        if tok.kind == STRING:
            self.advance()
            return VLit(tok.value)
        if self.at("true"):
            self.advance()
            return VLit(True)
        if self.at("false"):
            self.advance()
            return VLit(False)
        if tok.kind == IDENT:
            self.advance()
            return VEntity(tok.value)
        if self.at("{"):
            self.advance()
            if self.accept("}"):
                return VSet(())
            first = self.parse_value_leaf()
            if self.at(":"):
                if not isinstance(first, VEntity):
                    self.error("map keys must be entity identifiers")
                pairs = []
                self.advance()
                pairs.append((first.value, self.parse_value_leaf()))
                while self.accept(","):
                    key = self.expect_ident("map key").value
                    self.expect(":")
                    pairs.append((key, self.parse_value_leaf()))
                self.expect("}")
                return VMap(tuple(pairs))
            items = [first]
            while self.accept(","):
                items.append(self.parse_value_leaf())
            self.expect("}")
            return VSet(tuple(items))
        self.error("expected a value literal", ("value",))

    def parse_value_leaf(self):
        tok = self.peek()
        if tok.kind == INT:
            self.advance()
            return VLit(int(tok.value))
        if tok.kind == STRING:
            self.advance()
            return VLit(tok.value)
        if self.at("true"):
            self.advance()
            return VLit(True)
        if self.at("false"):
            self.advance()
            return VLit(False)
        if tok.kind == IDENT:
            self.advance()
            return VEntity(tok.value)
        self.error("expected a scalar value", ("value",))

    # -- UI files -------------------------------------------------------------

    def parse_ui_model(self) -> UIModel:
        screens = []
        if not self.at("screen"):
            self.error("expected 'screen'", ("screen",))
        while self.at("screen"):
            screens.append(self.parse_screen())
        self.expect_eof()
        model = UIModel(tuple(screens))
        self._check_pairings(model)
        return model

    def parse_screen(self) -> Screen:
        self.expect("screen")
        name = self.expect_ident("screen name").value
        self.expect("{")
        elements = []
        while not self.accept("}"):
            elements.append(self.parse_element(name))
        return Screen(name, tuple(elements))

    def parse_element(self, screen: str) -> UIElement:
        self.expect("element")
        elem_id = self.expect_ident("element id").value
        self.expect(":")
        kind_tok = self.expect_ident("element kind")
        if kind_tok.value not in ELEMENT_KINDS:
            self.error("unknown element kind '%s'" % kind_tok.value,
                       ELEMENT_KINDS, token=kind_tok)
        self.expect("label")
        label = self.expect_string("label string")
        style = ""
        if self.accept("style"):
            style = self.expect_string("style class")
        binding = self.parse_binding()
        self.expect("prominence")
        prominence = self.expect_number("prominence value")
        if not 0.0 <= prominence <= 1.0:
            self.error("prominence must lie in [0, 1]",
                       token=self.tokens[self.pos - 1])
        self.expect("steps")
        steps = self.expect_int("steps count")
        convention = None
        if self.accept("convention"):
            convention = self.expect_string("convention token")
        paired = None
        if self.accept("paired"):
            paired = self.expect_ident("paired element id").value
        visible = True
        if self.accept("hidden"):
            visible = False
        return UIElement(elem_id, screen, kind_tok.value, label, style,
                         binding, prominence, steps, visible, convention,
                         paired)

    def parse_binding(self):
        if self.accept("triggers"):
            inst, action, args, _ = self.parse_call()
            guard = None
            if self.accept("guard"):
                guard = self.parse_expr()
            default_on = False
            if self.accept("default"):
                self.expect("on")
                default_on = True
            return TriggersAction(CallTemplate(inst, action, tuple(args)),
                                  guard, default_on)
        if self.accept("displays"):
            return DisplaysState(self.parse_ref())
        if self.accept("claims"):
            claimed = self.parse_ref()
            self.expect("shows")
            shown = self.parse_expr()
            return ClaimsState(claimed, shown)
        if self.accept("static"):
            return StaticBinding()
        self.error("expected element binding",
                   ("triggers", "displays", "claims", "static"))

    def _check_pairings(self, model: UIModel) -> None:
        by_id = {e.id: e for e in model.elements()}
        for elem in model.elements():
            if elem.paired is None:
                continue
            other = by_id.get(elem.paired)
            if other is None:
                raise LinkError(1, 1, "element '%s' paired with unknown "
                                "element '%s'" % (elem.id, elem.paired))
            if other.paired != elem.id:
                raise LinkError(1, 1, "pairing between '%s' and '%s' is not "
                                "symmetric" % (elem.id, elem.paired))

    # -- catalog entries -------------------------------------------------------

    def parse_catalog_entry(self) -> CatalogEntry:
        self.expect("catalog")
        name = self.expect_ident("entry name").value
        self.expect("{")
        concept = self.parse_concept_def()
        if concept.name != name:
            self.error("catalog entry '%s' must define concept '%s'"
                       % (name, name))
        independent: list = []
        if self.accept("independent"):
            independent.append(self.expect_ident("action name").value)
            while self.accept(","):
                independent.append(self.expect_ident("action name").value)
        syncs = []
        while self.at("sync"):
            syncs.append(self.parse_concept_sync())
        standards = []
        if self.accept("mapping"):
            self.expect("{")
            while not self.accept("}"):
                standards.append(self.parse_mapping_standard())
        variants = []
        while self.accept("variant"):
            vname = self.expect_ident("variant name").value
            vpath = self.expect_string("variant path")
            variants.append(VariantRef(vname, vpath))
        self.expect("}")
        self.expect_eof()
        return CatalogEntry(concept, tuple(independent), tuple(syncs),
                            tuple(standards), tuple(variants))

    def parse_concept_sync(self) -> SyncRule:
        # Catalog-level sync templates use concept names as instance names;
        # they are rewired to concrete instances when an app is checked.
        self.expect("sync")
        name = self.expect_ident("sync name").value
        self.expect("when")
        inst, action, args, atok = self.parse_call()
        params = []
        for arg in args:
            if not isinstance(arg, Ref) or arg.instance is not None \
                    or arg.key is not None:
                self.link_error("trigger arguments must be plain binding "
                                "names", atok)
            params.append(arg.name)
        trigger = Trigger(inst, action, tuple(params))
        require = None
        if self.accept("require"):
            require = self.parse_expr()
        reactions = []
        if self.accept("then"):
            while True:
                rinst, raction, rargs, _ = self.parse_call()
                reactions.append(Reaction(rinst, raction, tuple(rargs)))
                if not self.accept(","):
                    break
        if require is None and not reactions:
            self.error("sync rule needs a require clause or reactions")
        return SyncRule(name, trigger, tuple(reactions), require)

    def parse_mapping_standard(self):
        if self.accept("control"):
            action = self.expect_ident("action name").value
            scope = SCOPE_GLOBAL
            if self.accept("per"):
                self.expect("item")
                scope = SCOPE_PER_ITEM
            return RequireControl(action, scope)
        if self.accept("display"):
            component = self.expect_ident("state component").value
            scope = SCOPE_GLOBAL
            if self.accept("per"):
                self.expect("item")
                scope = SCOPE_PER_ITEM
            return RequireDisplay(component, scope)
        if self.accept("reserve"):
            label = self.expect_string("reserved label")
            self.expect("for")
            if self.accept("action"):
                return LabelReservation(label, None,
                                        self.expect_ident("action").value)
            return LabelReservation(label, self.parse_expr(), None)
        if self.accept("guard"):
            action = self.expect_ident("action name").value
            self.expect("by")
            return GuardedControl(action, self.parse_expr())
        if self.accept("pair"):
            a = self.expect_ident("action name").value
            b = self.expect_ident("action name").value
            return EqualProminence(a, b)
        if self.accept("reach"):
            a = self.expect_ident("action name").value
            b = self.expect_ident("action name").value
            self.expect("max")
            return ReachParity(a, b, self.expect_number("ratio"))
        if self.accept("consistent"):
            return ConsistencyGroup(self.expect_ident("subject").value)
        self.error("expected a mapping standard",
                   ("control", "display", "reserve", "guard", "pair",
                    "reach", "consistent"))

    # -- scenario files ----------------------------------------------------------

    def parse_scenario(self) -> Scenario:
        self.expect("scenario")
        name = self.expect_ident("scenario name").value
        self.expect("{")
        self.expect("standard")
        standard = self.expect_ident("standard entry name").value
        self.expect("app")
        app_path = self.expect_string("app path")
        ui_path = None
        if self.accept("ui"):
            ui_path = self.expect_string("ui path")
        self.expect("domain")
        domain = self.parse_domain_block()
        depth = None
        if self.accept("depth"):
            depth = self.expect_int("depth")
        self.expect("benefit")
        default = self.parse_beneficiary()
        overrides = []
        while self.accept("override"):
            subject = self.parse_subject()
            self.expect("=")
            overrides.append((subject, self.parse_beneficiary()))
        expected = []
        while self.accept("expect"):
            expected.append(self.parse_expected())
        self.expect("dark")
        if self.accept("true"):
            dark = True
        elif self.accept("false"):
            dark = False
        else:
            self.error("expected true or false", ("true", "false"))
        self.expect("}")
        self.expect_eof()
        return Scenario(name, standard, app_path, ui_path, domain, depth,
                        Benefit(default, tuple(overrides)), tuple(expected),
                        dark)

    def parse_domain_block(self) -> DomainSpec:
        self.expect("{")
        entities: list = []
        nat: Optional[tuple] = None
        money: Optional[tuple] = None
        while not self.accept("}"):
            sort = self.expect_ident("sort name").value
            self.expect("=")
            self.expect("{")
            values = []
            if not self.at("}"):
                values.append(self.parse_domain_value(sort))
                while self.accept(","):
                    values.append(self.parse_domain_value(sort))
            self.expect("}")
            if sort == NAT:
                nat = tuple(values)
            elif sort == MONEY:
                money = tuple(values)
            else:
                entities.append((sort, tuple(values)))
        return DomainSpec(tuple(entities), nat, money)

    def parse_domain_value(self, sort: str):
        if sort in (NAT, MONEY):
            return self.expect_int("integer")
        return self.expect_ident("entity id").value

    def parse_beneficiary(self) -> str:
        tok = self.peek()
        if tok.kind == IDENT and tok.value in ("provider", "user", "neutral"):
            return self.advance().value
        self.error("expected provider, user, or neutral",
                   ("provider", "user", "neutral"))

    def parse_subject(self) -> str:
        concept = self.expect_ident("concept name").value
        self.expect(".")
        member = self.expect_ident("member name").value
        subject = "%s.%s" % (concept, member)
        if self.accept("->"):
            rconcept = self.expect_ident("concept name").value
            self.expect(".")
            rmember = self.expect_ident("member name").value
            subject = "%s->%s.%s" % (subject, rconcept, rmember)
        return subject

    def parse_expected(self) -> ExpectedDeviation:
        category = self.expect_ident("deviation category").value
        principle = None
        if category == "MappingViolation":
            self.expect("(")
            principle = self.expect_ident("principle").value
            self.expect(")")
        self.expect("on")
        subject = self.parse_subject()
        self.expect("dyad")
        tok = self.peek()
        if tok.kind == IDENT and tok.value in ("observed", "implemented"):
            dyad = self.advance().value
        else:
            self.error("expected observed or implemented",
                       ("observed", "implemented"))
        return ExpectedDeviation(category, principle, subject, dyad)


# ---------------------------------------------------------------------------
# Entry points

def _guarded(producer):
    # Degenerate inputs (thousands of nested parentheses) must surface as a
    # positioned ParseError, not a RecursionError.
    try:
        return producer()
    except RecursionError:
        raise ParseError(1, 1, "input nests too deeply to parse")


def parse_concept(src: SourceFile) -> ConceptDef:
    def go():
        parser = Parser(src)
        concept = parser.parse_concept_def()
        parser.expect_eof()
        return concept
    return _guarded(go)


def parse_app(src: SourceFile) -> AppModel:
    return _guarded(lambda: Parser(src).parse_app_model())


def parse_ui(src: SourceFile) -> UIModel:
    return _guarded(lambda: Parser(src).parse_ui_model())


def parse_catalog(src: SourceFile) -> CatalogEntry:
    return _guarded(lambda: Parser(src).parse_catalog_entry())


def parse_scenario(src: SourceFile) -> Scenario:
    return _guarded(lambda: Parser(src).parse_scenario())


_PARSERS = {
    KIND_CONCEPT: parse_concept,
    KIND_APP: parse_app,
    KIND_UI: parse_ui,
    KIND_CATALOG: parse_catalog,
    KIND_SCENARIO: parse_scenario,
}


def parse_source(src: SourceFile):
    """Parse any source file according to its kind."""
    return _PARSERS[src.kind](src)


def parse_domain_spec(text: str) -> DomainSpec:
    """Parse a bare domain block, e.g. 'Item = {a, b} Money = {100}'."""
    parser = Parser(SourceFile.of("{ %s }" % text, KIND_SCENARIO,
                                  "<domain>"))
    spec = parser.parse_domain_block()
    parser.expect_eof()
    return spec


def parse_script(text: str) -> list:
    """Parse a simulation script: one `role instance.action(args)` per line,
    arguments being literals or bare entity ids."""
    parser = Parser(SourceFile.of(text, KIND_SCENARIO, "<script>"))
    calls = []
    while not parser.at_kind(EOF):
        tok = parser.peek()
        if tok.kind != IDENT or tok.value not in (USER, PROVIDER):
            parser.error("expected a role, user or provider",
                         (USER, PROVIDER))
        role = parser.advance().value
        inst, action, args, atok = parser.parse_call()
        values = []
        for arg in args:
            if isinstance(arg, Lit):
                values.append(arg.value)
            elif isinstance(arg, EntityLit):
                values.append(arg.value)
            elif isinstance(arg, Ref) and arg.instance is None \
                    and arg.key is None:
                values.append(arg.name)
            else:
                parser.error("script arguments must be literal values",
                             token=atok)
        calls.append((role, inst, action, tuple(values)))
    return calls
