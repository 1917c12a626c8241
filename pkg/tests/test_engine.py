"""Engine semantics: initialization, enabling, atomic steps, enumeration."""

import random

import pytest

from conceptkit.catalog_types import DomainSpec
from conceptkit.engine import (
    ActionCall, BudgetExceeded, Engine, MissingDomain, StepError,
    build_domain, state_digest,
    PRECONDITION_FAILED, INITIATOR_FORBIDDEN, CYCLE_DETECTED,
)
from conceptkit.lang import SourceFile, parse_app
from conceptkit.model import USER, PROVIDER

from conftest import CART_DOMAIN

SMALL_DOMAIN = DomainSpec((("Item", ("a",)), ("User", ("u1",))),
                          nat=(1,), money=(300,))


def engine_for(app, spec):
    return Engine(app, build_domain(app, spec))


@pytest.fixture()
def engine(cartcatalog_app):
    return engine_for(cartcatalog_app, CART_DOMAIN)


@pytest.fixture()
def small_engine(cartcatalog_app):
    return engine_for(cartcatalog_app, SMALL_DOMAIN)


def user_add(item="a", price=300):
    return ActionCall("cart", "add", (item, price), USER)


class TestInitState:
    def test_cart_starts_empty(self, engine):
        state = engine.init_state()
        assert state["cart"]["items"] == frozenset()
        assert state["cart"]["quantity"] == {}
        assert state["cart"]["owner"] == "u1"

    def test_declared_init_values_read_back(self):
        import os
        from conceptkit.corpus import DATA_ROOT
        app = parse_app(SourceFile.load(
            os.path.join(DATA_ROOT, "apps", "tmobile.app")))
        engine = engine_for(app, DomainSpec((("Item", ("planA",)),),
                                            nat=(1,), money=(7000,)))
        state = engine.init_state()
        assert state["catalog"]["stock"] == {"planA": 5}
        assert state["catalog"]["price"] == {"planA": 7000}

    def test_missing_entity_domain(self, cartcatalog_app):
        engine = engine_for(cartcatalog_app,
                            DomainSpec((("Item", ("a",)),)))
        with pytest.raises(MissingDomain):
            engine.init_state()  # User has no domain, owner has no default


class TestEnabled:
    def test_add_enabled_remove_not_on_empty_cart(self, engine):
        state = engine.init_state()
        enabled = {(inst, action)
                   for inst, action, _ in engine.enabled(state, USER)}
        assert ("cart", "add") in enabled
        assert ("cart", "remove") not in enabled
        assert ("cart", "checkout") not in enabled

    def test_provider_cannot_add_on_standard_cart(self, engine):
        state = engine.init_state()
        enabled = {(inst, action)
                   for inst, action, _ in engine.enabled(state, PROVIDER)}
        assert ("cart", "add") not in enabled

    def test_remove_enabled_once_item_in_cart(self, engine):
        state, _ = engine.step(engine.init_state(), user_add())
        enabled = {(inst, action): args
                   for inst, action, args in engine.enabled(state, USER)}
        assert enabled[("cart", "remove")] == ("a",)


class TestStep:
    def test_add_decrements_stock_through_sync(self, engine):
        state, step = engine.step(engine.init_state(), user_add())
        assert state["cart"]["items"] == frozenset({"a"})
        assert state["catalog"]["stock"] == {"a": 0, "b": 1}
        assert [r.render() for r in step.reactions] == \
            ["catalog.removeFromStock(a, 1)"]

    def test_out_of_stock_add_fails_and_leaves_state_unchanged(self, engine):
        state = engine.init_state()
        state["catalog"] = dict(state["catalog"], stock={"a": 0, "b": 1})
        before = state_digest(state)
        with pytest.raises(StepError) as err:
            engine.step(state, user_add())
        assert err.value.kind == PRECONDITION_FAILED
        assert err.value.who == "catalog.removeFromStock"
        assert state_digest(state) == before

    def test_wrong_price_fails_pin_guard(self, engine):
        with pytest.raises(StepError) as err:
            engine.step(engine.init_state(),
                        ActionCall("cart", "add", ("a", 450), USER))
        assert err.value.kind == PRECONDITION_FAILED
        assert err.value.who == "pinPrice"

    def test_provider_initiated_add_forbidden(self, engine):
        with pytest.raises(StepError) as err:
            engine.step(engine.init_state(),
                        ActionCall("cart", "add", ("a", 300), PROVIDER))
        assert err.value.kind == INITIATOR_FORBIDDEN

    def test_sync_atomicity_no_partial_effects(self, engine):
        """When the reaction's precondition fails, the trigger's own effects
        are rolled back too."""
        state, _ = engine.step(engine.init_state(), user_add())
        state, _ = engine.step(
            state, ActionCall("cart", "remove", ("a",), USER))
        state, _ = engine.step(state, user_add())
        # requantify to 2 would need stock 2 for a; only 1 exists in total
        with pytest.raises(StepError):
            engine.step(state, ActionCall("cart", "changeQuantity", ("a", 2),
                                          USER))
        assert state["cart"]["quantity"] == {"a": 1}
        assert state["catalog"]["stock"]["a"] == 0

    def test_requantify_conserves_stock(self, engine):
        state, _ = engine.step(engine.init_state(),
                               ActionCall("cart", "add", ("b", 450), USER))
        state, _ = engine.step(
            state, ActionCall("cart", "changeQuantity", ("b", 1), USER))
        assert state["catalog"]["stock"]["b"] == 0
        assert state["cart"]["quantity"]["b"] == 1

    def test_step_is_deterministic(self, engine):
        a = engine.step(engine.init_state(), user_add())
        b = engine.step(engine.init_state(), user_add())
        assert a[1].digest == b[1].digest


class TestEnumerate:
    def test_depth_zero_is_the_empty_trace(self, small_engine):
        traces = small_engine.enumerate_traces(0)
        assert len(traces) == 1
        assert traces[0].steps == ()

    def test_depth_one_single_item(self, small_engine):
        traces = small_engine.enumerate_traces(1)
        rendered = sorted(t.render() for t in traces if t.steps)
        assert rendered == ["user cart.add(a, 300) => "
                            "[catalog.removeFromStock(a, 1)]"]

    def test_depth_two_includes_remove_and_checkout(self, small_engine):
        keys = {tuple((s.call.instance, s.call.action, s.call.args)
                      for s in t.steps)
                for t in small_engine.enumerate_traces(2)}
        assert (("cart", "add", ("a", 300)),
                ("cart", "remove", ("a",))) in keys
        assert (("cart", "add", ("a", 300)),
                ("cart", "checkout", ())) in keys

    def test_budget_exceeded(self, cartcatalog_app):
        engine = Engine(cartcatalog_app,
                        build_domain(cartcatalog_app, CART_DOMAIN),
                        state_cap=3)
        with pytest.raises(BudgetExceeded):
            engine.enumerate_traces(3)

    def test_enumeration_is_deterministic(self, engine):
        first = [t.key() for t in engine.enumerate_traces(2)]
        second = [t.key() for t in engine.enumerate_traces(2)]
        assert first == second


def test_stock_conservation_until_checkout(engine):
    """initial_stock(i) == stock(i) + quantity_in_cart(i) in every reachable
    pre-checkout state of the shipped composition."""
    init = engine.init_state()
    initial_stock = dict(init["catalog"]["stock"])
    for trace in engine.enumerate_traces(3):
        if any(s.call.action == "checkout" for s in trace.steps):
            continue
        state = init
        for step in trace.steps:
            state, _ = engine.step(state, step.call)
        for item, total in initial_stock.items():
            held = state["catalog"]["stock"][item]
            carted = state["cart"]["quantity"].get(item, 0)
            assert held + carted == total, trace.render()


def test_failed_steps_never_mutate_state(engine):
    rng = random.Random(42)
    calls = engine.all_candidate_calls()
    state = engine.init_state()
    failures = 0
    while failures < 500:
        call = rng.choice(calls)
        before = state_digest(state)
        try:
            state2, _ = engine.step(state, call)
        except StepError:
            failures += 1
            assert state_digest(state) == before
            continue
        if rng.random() < 0.5:
            state = state2


def test_bool_and_text_parameters_enumerate():
    src = SourceFile.of("""
app toggles

concept Switch
purpose "a settable flag"
state
  on: one Bool
actions
  set(v: Bool) by user
    effects on := v

instance s: Switch
""", "App")
    app = parse_app(src)
    engine = engine_for(app, DomainSpec(()))
    calls = engine.candidate_calls(USER)
    assert [c.args for c in calls] == [(False,), (True,)]
    state, _ = engine.step(engine.init_state(),
                           ActionCall("s", "set", (True,), USER))
    assert state["s"]["on"] is True


def test_cycle_detection():
    src = SourceFile.of("""
app pingpong

concept Counter
purpose "counts"
state
  n: one Nat
actions
  ping() by user
    effects n := n + 1
  pong() by user
    effects n := n + 1

instance a: Counter
instance b: Counter
sync fwd when a.ping() then b.pong()
sync back when b.pong() then a.ping()
""", "App")
    app = parse_app(src)
    engine = engine_for(app, DomainSpec(()))
    with pytest.raises(StepError) as err:
        engine.step(engine.init_state(), ActionCall("a", "ping", (), USER))
    assert err.value.kind == CYCLE_DETECTED


def test_nat_underflow_fails_step():
    src = SourceFile.of("""
app counter

concept Counter
purpose "counts"
state
  n: one Nat
actions
  down() by user
    effects n := n - 1

instance c: Counter
""", "App")
    app = parse_app(src)
    engine = engine_for(app, DomainSpec(()))
    with pytest.raises(StepError):
        engine.step(engine.init_state(), ActionCall("c", "down", (), USER))


def test_trace_dump_format_is_stable(engine):
    state = engine.init_state()
    state, s1 = engine.step(state, user_add())
    state, s2 = engine.step(state, ActionCall("cart", "checkout", (), USER))
    assert s1.render() == \
        "user cart.add(a, 300) => [catalog.removeFromStock(a, 1)]"
    assert s2.render() == "user cart.checkout() => []"


def test_step_decomposes_into_sequential_effect_application(engine):
    """The post-state of a step equals applying the trigger's effects and
    then each reaction's effects by hand; nothing else changes."""
    init = engine.init_state()
    post, step = engine.step(init, user_add())
    cart = dict(init["cart"])
    cart["items"] = cart["items"] | {"a"}
    cart["quantity"] = {**cart["quantity"], "a": 1}
    cart["price"] = {**cart["price"], "a": 300}
    catalog = dict(init["catalog"])
    catalog["stock"] = {**catalog["stock"], "a": catalog["stock"]["a"] - 1}
    assert post == {"cart": cart, "catalog": catalog}
    assert step.digest == state_digest({"cart": cart, "catalog": catalog})


def test_reaction_args_bind_against_pre_trigger_state(engine):
    """remove(i) returns the pre-removal quantity to stock even though the
    trigger's effects drop it first."""
    state, _ = engine.step(engine.init_state(), user_add())
    state, step = engine.step(state,
                              ActionCall("cart", "remove", ("a",), USER))
    assert [r.render() for r in step.reactions] == \
        ["catalog.addToStock(a, 1)"]
    assert state["catalog"]["stock"]["a"] == 1
