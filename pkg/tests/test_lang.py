"""Parsing and printing: grammar coverage, error positions, round-trips."""

import os

import pytest
from hypothesis import given, settings, strategies as st

from conceptkit.lang import (
    LinkError, ParseError, SourceFile, parse_app, parse_concept,
    parse_scenario, parse_source, parse_ui, print_concept, print_expr,
    print_model,
)
from conceptkit.lang.parser import Parser, tokenize
from conceptkit.model import (
    Bin, Card, EntityLit, InSet, Lit, Not, Ref, Sum, validate_concept,
    EITHER, PROVIDER, roles_of,
)
from conceptkit.corpus import DATA_ROOT

from conftest import all_corpus_files


def concept_src(text):
    return SourceFile.of(text, "Concept")


class TestParseConcept:
    def test_shipped_cart_file(self):
        path = os.path.join(DATA_ROOT, "concepts", "shoppingcart.concept")
        concept = parse_concept(SourceFile.load(path))
        assert concept.name == "ShoppingCart"
        assert len(concept.actions) == 6
        assert validate_concept(concept) == []

    def test_empty_file_errors_at_origin(self):
        with pytest.raises(ParseError) as err:
            parse_concept(concept_src(""))
        assert (err.value.line, err.value.column) == (1, 1)

    def test_missing_initiator_clause(self):
        src = concept_src("""
concept C [Item]
purpose "p"
state
  items: set Item
actions
  add(i: Item) requires i in items
""")
        with pytest.raises(ParseError) as err:
            parse_concept(src)
        assert "by" in err.value.expected
        assert "user|provider|either" in err.value.message

    def test_wrong_initiator_keyword(self):
        src = concept_src("""
concept C [Item]
purpose "p"
state
  items: set Item
actions
  add(i: Item) by robot
""")
        with pytest.raises(ParseError) as err:
            parse_concept(src)
        assert set(err.value.expected) == {"user", "provider", "either"}

    def test_error_positions_lie_inside_text(self):
        bad_texts = ["concept", "concept X purpose", "x y z",
                     'concept C purpose "p" state actions a() by user )']
        for text in bad_texts:
            with pytest.raises(ParseError) as err:
                parse_concept(concept_src(text))
            lines = text.split("\n")
            assert 1 <= err.value.line <= len(lines)
            assert err.value.column >= 1

    def test_comments_and_whitespace_insensitivity(self):
        src = concept_src("""
// a comment
concept   C [Item]   purpose "p"
state items: set Item   // trailing
actions add(i: Item) by user effects items += i
""")
        concept = parse_concept(src)
        assert concept.name == "C"
        assert concept.actions[0].effects


class TestParseApp:
    def test_sportsdirect_variant_lets_provider_add(self):
        path = os.path.join(DATA_ROOT, "apps", "sportsdirect.app")
        app = parse_app(SourceFile.load(path))
        cart = app.concept_of("cart")
        assert cart.name == "ShoppingCart"
        add = cart.action("add")
        assert add.initiator == EITHER
        assert PROVIDER in roles_of(add.initiator)

    def test_forced_action_sync(self):
        path = os.path.join(DATA_ROOT, "apps", "linkedin.app")
        app = parse_app(SourceFile.load(path))
        assert len(app.syncs) == 1
        rule = app.syncs[0]
        assert (rule.trigger.instance, rule.trigger.action) == \
            ("account", "create")
        assert [(r.instance, r.action) for r in rule.reactions] == \
            [("contact", "share")]

    def test_sync_with_undeclared_instance(self):
        src = SourceFile.of("""
app broken

concept C [Item]
purpose "p"
state
  items: set Item
actions
  add(i: Item) by user
    effects items += i

instance c: C
sync s when wallet.add(i) then c.add(i)
""", "App")
        with pytest.raises(LinkError) as err:
            parse_app(src)
        assert "wallet" in err.value.message

    def test_trigger_arity_checked(self):
        src = SourceFile.of("""
app broken

concept C [Item]
purpose "p"
state
  items: set Item
actions
  add(i: Item) by user
    effects items += i

instance c: C
sync s when c.add(i, j) then c.add(i)
""", "App")
        with pytest.raises(LinkError):
            parse_app(src)

    def test_init_read_back(self):
        path = os.path.join(DATA_ROOT, "apps", "tmobile.app")
        app = parse_app(SourceFile.load(path))
        inits = {(c.instance, c.component): c.value for c in app.inits}
        stock = inits[("catalog", "stock")]
        assert [(k, v.value) for k, v in stock.pairs] == [("planA", 5)]


class TestParseUi:
    def test_asymmetric_pairing_rejected(self):
        src = SourceFile.of("""
screen s {
  element a: Button label "a" static prominence 0.5 steps 1 paired b
  element b: Button label "b" static prominence 0.5 steps 1
}
""", "UI")
        with pytest.raises(LinkError):
            parse_ui(src)

    def test_prominence_range_enforced(self):
        src = SourceFile.of("""
screen s {
  element a: Button label "a" static prominence 1.5 steps 1
}
""", "UI")
        with pytest.raises(ParseError):
            parse_ui(src)


class TestScenario:
    def test_subjects_and_expectations(self):
        path = os.path.join(DATA_ROOT, "scenarios", "fakeurgency.scenario")
        scenario = parse_scenario(SourceFile.load(path))
        assert scenario.standard == "CountdownTimer"
        assert scenario.expected[0].subject == \
            "CountdownTimer.expire->Catalog.endSale"
        assert scenario.dark is True


class TestScenarioOverrides:
    def test_override_clauses_parse_and_apply(self):
        scenario = parse_scenario(SourceFile.of("""
scenario custom {
  standard ShoppingCart
  app "x.app"
  domain { Item = {a} }
  benefit provider
  override ShoppingCart.estimatedCheckoutTotal = user
  override ShoppingCart.buyNow->Order.fulfill = neutral
  expect Extension on ShoppingCart.estimatedCheckoutTotal dyad implemented
  dark true
}
""", "Scenario"))
        benefit = scenario.benefit
        assert benefit.beneficiary("ShoppingCart.estimatedCheckoutTotal") \
            == "user"
        assert benefit.beneficiary("ShoppingCart.buyNow->Order.fulfill") \
            == "neutral"
        assert benefit.beneficiary("ShoppingCart.other") == "provider"


class TestCatalogParsing:
    def test_entry_name_must_match_concept(self):
        with pytest.raises(ParseError):
            SourceFile_ = SourceFile.of("""
catalog Wrong {
concept Other
purpose "p"
state
  n: one Nat
actions
  a() by user
}
""", "Catalog")
            from conceptkit.lang import parse_catalog
            parse_catalog(SourceFile_)


class TestConfig:
    def test_unknown_key_rejected(self):
        from conceptkit.config import parse_config
        with pytest.raises(ValueError):
            parse_config("nonsense = 1")

    def test_depth_cap_enforced(self):
        from conceptkit.config import parse_config
        with pytest.raises(ValueError):
            parse_config("depth = 12")

    def test_comments_and_overrides(self):
        from conceptkit.config import parse_config
        cfg = parse_config("# tuned\nmaxSteps = 7\nepsilon = 0.4\n")
        assert cfg.max_steps == 7 and cfg.epsilon == 0.4


class TestRoundTrip:
    @pytest.mark.parametrize("path", all_corpus_files(),
                             ids=lambda p: os.path.relpath(p, DATA_ROOT))
    def test_corpus_file(self, path):
        src = SourceFile.load(path)
        first = parse_source(src)
        text = print_model(first)
        again = parse_source(SourceFile.of(text, src.kind, src.path))
        assert first == again

    def test_determinism(self):
        path = os.path.join(DATA_ROOT, "apps", "cartcatalog.app")
        src = SourceFile.load(path)
        assert print_model(parse_source(src)) == \
            print_model(parse_source(src))

    def test_minimal_concept_prints_one_action_block(self):
        src = concept_src("""
concept One [Item]
purpose "single action"
state
  items: set Item
actions
  touch(i: Item) by user
""")
        text = print_concept(parse_concept(src))
        assert text.count(") by ") == 1


# -- expression round-trip via hypothesis -----------------------------------

_names = st.sampled_from(["items", "quantity", "stock", "price", "n", "u"])
_insts = st.none() | st.sampled_from(["cart", "catalog"])

# Set-valued targets (of membership, cardinality, sums) are plain component
# references, never keyed.
_targets = st.builds(Ref, _names, st.none(), _insts)

_exprs = st.deferred(lambda: (
    st.builds(Lit, st.integers(min_value=0, max_value=9999))
    | st.builds(Lit, st.booleans())
    | st.builds(EntityLit, st.sampled_from(["a", "b", "gift"]))
    | st.builds(Ref, _names, st.none() | _exprs, _insts)
    | st.builds(Bin, st.sampled_from(["+", "-", "*", "=", "!=", "<", "<=",
                                      "and", "or"]), _exprs, _exprs)
    | st.builds(Not, _exprs)
    | st.builds(InSet, _exprs, _targets)
    | st.builds(Card, _targets)
    | st.builds(Sum, st.sampled_from(["i", "k"]), _targets, _exprs)
))


@settings(max_examples=300, deadline=None)
@given(_exprs)
def test_expr_print_parse_round_trip(expr):
    text = print_expr(expr)
    parser = Parser(SourceFile.of(text, "Concept"))
    again = parser.parse_expr()
    parser.expect_eof()
    assert again == expr


def test_pathological_nesting_is_a_parse_error():
    text = "concept C [Item]\npurpose \"p\"\nstate\n  n: one Nat\nactions\n" \
        + "  a() by user requires " + "(" * 4000 + "n = 1" + ")" * 4000
    with pytest.raises(ParseError):
        parse_concept(concept_src(text))


def test_tokenizer_positions_are_one_based():
    tokens = tokenize("ab cd\n  ef")
    assert [(t.value, t.line, t.col) for t in tokens[:3]] == \
        [("ab", 1, 1), ("cd", 1, 4), ("ef", 2, 3)]
