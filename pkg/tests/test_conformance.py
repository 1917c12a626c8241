"""Conformance checks: structural diff, trace inclusion, the full verdict."""

import os
from dataclasses import replace

import pytest

from conceptkit.catalog_types import Benefit, DomainSpec
from conceptkit.config import Config
from conceptkit.conformance import (
    UnboundConcept, check, check_extension, compare_behavior,
    resolve_binding, standard_app, structural_diff, trace_inclusion,
)
from conceptkit.corpus import DATA_ROOT, catalog_by_name, load_extensions
from conceptkit.engine import ActionCall, Engine, StepError, build_domain
from conceptkit.lang import SourceFile, parse_app, parse_ui
from conceptkit.model import (
    BEHAVIOR_MISMATCH, EXTENSION, INITIATOR_MISMATCH,
    IMPLEMENTED_VS_EXPECTED, MISSING_ACTION, MISSING_SYNC,
    OBSERVED_VS_EXPECTED, PRECONDITION_MISMATCH, UNEXPECTED_SYNC,
)
from conceptkit.ui import default_registry

CATALOG = catalog_by_name()
CART = CATALOG["ShoppingCart"]
CART_DOMAIN = DomainSpec((("Item", ("a", "b")), ("User", ("u1",))),
                         nat=(1, 2), money=(100, 200))
USERS = DomainSpec((("User", ("u1",)),))
CFG = Config(depth=2)


def load_app(name):
    return parse_app(SourceFile.load(os.path.join(DATA_ROOT, "apps", name)))


def load_ui(name):
    return parse_ui(SourceFile.load(os.path.join(DATA_ROOT, "uis", name)))


def categories(deviations):
    return sorted(d.category for d in deviations)


class TestStructuralDiff:
    def test_provider_add_variant(self):
        out = structural_diff(CART, load_app("sportsdirect.app"),
                              CART_DOMAIN, CATALOG, CFG)
        assert [(d.category, d.subject) for d in out] == \
            [(INITIATOR_MISMATCH, "ShoppingCart.add")]

    def test_missing_disable_action(self):
        entry = CATALOG["Notification"]
        out = structural_diff(entry, load_app("instagram.app"), USERS,
                              CATALOG, CFG)
        assert [(d.category, d.subject) for d in out] == \
            [(MISSING_ACTION, "Notification.disable")]

    def test_entry_against_itself(self):
        app = standard_app(CART, CATALOG, CART_DOMAIN)
        assert structural_diff(CART, app, CART_DOMAIN, CATALOG, CFG) == []

    def test_narrowed_precondition_is_flagged(self):
        app = load_app("standardcart.app")
        concept = app.concepts[0]
        add = concept.action("add")
        # candidate demands an empty cart before any add
        from conceptkit.model import Bin, Card, Lit, Not, Ref, InSet
        narrowed = replace(add, precondition=Bin(
            "and", Not(InSet(Ref("i"), Ref("items"))),
            Bin("=", Card(Ref("items")), Lit(0))))
        candidate = replace(app, concepts=(replace(
            concept, actions=tuple(narrowed if a.name == "add" else a
                                   for a in concept.actions)),))
        out = structural_diff(CART, candidate, CART_DOMAIN, CATALOG, CFG)
        assert PRECONDITION_MISMATCH in categories(out)

    def test_missing_required_sync(self):
        entry = CATALOG["CountdownTimer"]
        out = structural_diff(entry, load_app("hurrify.app"),
                              DomainSpec((("Item", ("deal",)),), nat=(0,),
                                         money=(100,)),
                              CATALOG, CFG)
        assert (MISSING_SYNC, "CountdownTimer.expire->Catalog.endSale") in \
            [(d.category, d.subject) for d in out]

    def test_unexpected_sync_on_independent_action(self):
        entry = CATALOG["Subscription"]
        out = structural_diff(entry, load_app("figma.app"), USERS, CATALOG,
                              CFG)
        assert [(d.category, d.subject) for d in out] == \
            [(UNEXPECTED_SYNC, "Subscription.subscribe")]

    def test_silent_enrollment_is_an_unexpected_sync(self):
        """A foreign sync firing an independent opt-in action is coupling,
        not a mere extension."""
        app = parse_app(SourceFile.of("""
app autoenroll

concept Account [User]
purpose "register users"
state
  registered: set User
actions
  create(u: User) by user
    requires not u in registered
    effects registered += u

concept Notification [User]
purpose "send updates to users who asked for them"
state
  enabled: set User
actions
  enable(u: User) by user
    requires not u in enabled
    effects enabled += u
  disable(u: User) by user
    requires u in enabled
    effects enabled -= u
  notify(u: User) by provider
    requires u in enabled

instance account: Account
instance marketing: Notification
sync autoOptIn when account.create(u) then marketing.enable(u)
""", "App"))
        entry = CATALOG["Notification"]
        out = structural_diff(entry, app, USERS, CATALOG, CFG)
        assert [(d.category, d.subject) for d in out] == \
            [(UNEXPECTED_SYNC, "Notification.enable")]

    def test_pure_additions_become_extensions(self):
        ext = dict(load_extensions())["saveForLater"]
        out = structural_diff(CART, ext, CART_DOMAIN, CATALOG, CFG)
        assert set(categories(out)) == {EXTENSION}
        subjects = {d.subject for d in out}
        assert "ShoppingCart.saveForLater" in subjects
        assert "ShoppingCart.saved" in subjects

    def test_independent_trigger_coupled_to_foreign_reaction(self):
        """Independence cuts both ways: the standard action as a trigger of
        a foreign reaction is also an unexpected coupling."""
        app = parse_app(SourceFile.of("""
app tattletale

concept ShoppingCart [Item, User]
purpose "maintain the set of items a user intends to purchase"
state
  owner: one User
  items: set Item
  quantity: Item -> Nat
  price: Item -> Money
  derived subtotal: Money = sum i in items: quantity[i] * price[i]
actions
  initialize(u: User) by either
    effects owner := u; clear items; clear quantity; clear price
  add(i: Item, p: Money) by user
    requires not i in items
    effects items += i; quantity[i] := 1; price[i] := p
  remove(i: Item) by user
    requires i in items
    effects items -= i; drop quantity[i]; drop price[i]
  changeQuantity(i: Item, q: Nat) by user
    requires i in items and q >= 1
    effects quantity[i] := q
  changePrice(i: Item, p: Money) by provider
    requires i in items
    effects price[i] := p
  checkout() by user
    requires |items| >= 1
    effects clear items; clear quantity; clear price

concept Tracker [Item]
purpose "log shopper behavior"
state
  events: one Nat
actions
  log(i: Item) by provider
    effects events := events + 1

instance cart: ShoppingCart
instance tracker: Tracker
sync snoop when cart.add(i, p) then tracker.log(i)
""", "App"))
        out = structural_diff(CART, app, CART_DOMAIN, CATALOG, CFG)
        assert [(d.category, d.subject) for d in out] == \
            [(UNEXPECTED_SYNC, "ShoppingCart.add")]

    def test_replacing_add_arity_is_missing_action(self):
        """The quantity-form variant that removes the one-argument add has
        no surviving core call path: the action is effectively missing."""
        ext = dict(load_extensions())["multiQuantityAdd"]
        concept = ext.concept("ShoppingCart")
        mutated_actions = []
        for action in concept.actions:
            if action.name == "add":
                continue
            if action.name == "addMultiple":
                action = replace(action, name="add")
            mutated_actions.append(action)
        candidate = replace(ext, concepts=(replace(
            concept, actions=tuple(mutated_actions)),))
        report = check_extension(CART, candidate, CART_DOMAIN, 2, CATALOG,
                                 CFG)
        assert not report.compatible
        assert (MISSING_ACTION, "ShoppingCart.add") in \
            [(d.category, d.subject) for d in report.violations]

    def test_unbound_candidate(self):
        with pytest.raises(UnboundConcept):
            structural_diff(CART, load_app("linkedin.app"), CART_DOMAIN,
                            CATALOG, CFG)


class TestTraceInclusion:
    def test_save_for_later_preserves_core_traces(self):
        ext = dict(load_extensions())["saveForLater"]
        report = trace_inclusion(CART, ext, CART_DOMAIN, 3, CATALOG, CFG)
        assert report.compatible
        assert report.violations == ()

    def test_gift_insertion_yields_witness(self):
        report = trace_inclusion(CART, load_app("giftcart.app"),
                                 DomainSpec((("Item", ("a", "gift")),
                                             ("User", ("u1",))),
                                            nat=(1,), money=(100, 200)),
                                 2, CATALOG, CFG)
        assert not report.compatible
        violation = report.violations[0]
        assert violation.category == BEHAVIOR_MISMATCH
        assert violation.subject == "ShoppingCart.add"
        assert "gift" in violation.evidence

    def test_identical_candidate_preserves_every_trace(self):
        app = standard_app(CART, CATALOG, CART_DOMAIN)
        report = trace_inclusion(CART, app, CART_DOMAIN, 2, CATALOG, CFG)
        std_engine = Engine(app, build_domain(app, CART_DOMAIN))
        total = len(std_engine.enumerate_traces(2,
                                                instances=("ShoppingCart",)))
        assert report.compatible
        assert report.preserved_trace_count == total

    def test_inclusion_agrees_with_direct_replay(self):
        """Replaying each standard trace by hand succeeds exactly when the
        inclusion check counted it preserved."""
        candidate = load_app("sportsdirect.app")
        bound = resolve_binding(CART, candidate, None, default_registry(),
                                CFG)
        comparison = compare_behavior(CART, candidate, bound, CATALOG,
                                      CART_DOMAIN, CFG)
        std_engine = comparison.std_engine
        cand_engine = comparison.cand_engine
        preserved = 0
        for trace in std_engine.enumerate_traces(CFG.depth,
                                                 instances=(CART.name,)):
            std_state = std_engine.init_state()
            cand_state = cand_engine.init_state()
            ok = True
            for step in trace.steps:
                std_state, _ = std_engine.step(std_state, step.call)
                try:
                    cand_state, _ = cand_engine.step(
                        cand_state, ActionCall(bound, step.call.action,
                                               step.call.args,
                                               step.call.initiator))
                except StepError:
                    ok = False
                    break
                for comp in CART.concept.state:
                    from conceptkit.model import Ref
                    if std_engine.eval_in(std_state, CART.name, {},
                                          Ref(comp.name)) != \
                            cand_engine.eval_in(cand_state, bound, {},
                                                Ref(comp.name)):
                        ok = False
                        break
                if not ok:
                    break
            preserved += ok
        assert preserved == comparison.preserved


class TestCheck:
    def test_sneaked_add_is_dark(self):
        report = check(CART, load_app("sportsdirect.app"), None,
                       Benefit("provider"), CART_DOMAIN, CATALOG, CFG)
        assert report.any_dark()
        finding = report.findings[0]
        assert finding.deviation.category == INITIATOR_MISMATCH
        assert finding.dark and finding.beneficiary == "provider"

    def test_standard_app_is_clean_under_any_annotation(self):
        for benefit in ("provider", "user", "neutral"):
            report = check(CART, load_app("standardcart.app"), None,
                           Benefit(benefit), CART_DOMAIN, CATALOG, CFG)
            assert report.findings == ()

    def test_user_serving_extension_is_reported_not_dark(self):
        ext = dict(load_extensions())["estimatedTotal"]
        report = check(CART, ext, None, Benefit("user"), CART_DOMAIN,
                       CATALOG, CFG)
        assert report.findings
        assert all(f.deviation.category == EXTENSION
                   for f in report.findings)
        assert not report.any_dark()

    def test_per_subject_overrides_gate_individual_findings(self):
        ext = dict(load_extensions())["estimatedTotal"]
        benefit = Benefit("provider",
                          (("ShoppingCart.estimatedCheckoutTotal", "user"),))
        report = check(CART, ext, None, benefit, CART_DOMAIN, CATALOG, CFG)
        by_subject = {f.deviation.subject: f for f in report.findings}
        assert not by_subject["ShoppingCart.estimatedCheckoutTotal"].dark
        assert by_subject["ShoppingCart.setShippingFee"].dark

    def test_darkness_gate_never_fires_without_provider_annotation(self):
        report = check(CATALOG["Subscription"], load_app("figma.app"), None,
                       Benefit("neutral"), USERS, CATALOG, CFG)
        assert report.findings and not report.any_dark()

    def test_dyad_totality(self):
        report = check(CATALOG["Subscription"], load_app("nyt.app"),
                       load_ui("nyt.ui"), Benefit("provider"), USERS,
                       CATALOG, CFG)
        for finding in report.findings:
            assert finding.deviation.dyad in (IMPLEMENTED_VS_EXPECTED,
                                              OBSERVED_VS_EXPECTED)

    def test_unbound_without_ui_raises(self):
        with pytest.raises(UnboundConcept):
            check(CART, load_app("linkedin.app"), None, Benefit("neutral"),
                  CART_DOMAIN, CATALOG, CFG)

    def test_unbound_unevoked_ui_yields_empty_report(self):
        report = check(CART, load_app("stitchfix.app"),
                       load_ui("stitchfix.ui"), Benefit("provider"),
                       CART_DOMAIN, CATALOG, CFG)
        assert report.findings == ()

    def test_report_ordering_is_stable(self):
        report = check(CATALOG["Subscription"], load_app("nyt.app"),
                       load_ui("nyt.ui"), Benefit("provider"), USERS,
                       CATALOG, CFG)
        keys = [f.deviation.sort_key()[:3] for f in report.findings]
        assert keys == sorted(keys)

    def test_monotonicity_removing_actions(self):
        """Removing an action from a candidate never decreases the deviation
        count against the same standard."""
        base_app = load_app("sportsdirect.app")
        base_count = len(check(CART, base_app, None, Benefit("provider"),
                               CART_DOMAIN, CATALOG, CFG).findings)
        concept = base_app.concepts[0]
        for action in concept.actions:
            if action.name == "initialize":
                continue
            mutated = replace(base_app, concepts=(replace(
                concept,
                actions=tuple(a for a in concept.actions
                              if a.name != action.name)),))
            count = len(check(CART, mutated, None, Benefit("provider"),
                              CART_DOMAIN, CATALOG, CFG).findings)
            assert count >= base_count, action.name

    def test_machine_lines_format(self):
        report = check(CART, load_app("sportsdirect.app"), None,
                       Benefit("provider"), CART_DOMAIN, CATALOG, CFG)
        line = report.lines()[0]
        assert line.startswith("DARK ImplementedVsExpected "
                               "InitiatorMismatch ShoppingCart.add ")


class TestCheckExtension:
    def test_quantity_form_with_surviving_core_path(self):
        ext = dict(load_extensions())["multiQuantityAdd"]
        report = check_extension(CART, ext, CART_DOMAIN, 2, CATALOG, CFG)
        assert report.compatible

    def test_account_gated_cart_conflicts_with_witness(self):
        ext = dict(load_extensions())["accountRequired"]
        report = check_extension(CART, ext, CART_DOMAIN, 2, CATALOG, CFG)
        assert not report.compatible
        assert report.violations[0].category == BEHAVIOR_MISMATCH
        assert "add" in report.violations[0].evidence

    def test_extension_equal_to_core(self):
        app = standard_app(CART, CATALOG, CART_DOMAIN)
        report = check_extension(CART, app, CART_DOMAIN, 2, CATALOG, CFG)
        assert report.compatible
        assert report.violations == ()


class TestBinding:
    def test_implements_clause_wins(self):
        app = load_app("groveco.app")
        renamed = replace(app, instances=(replace(
            app.instances[0], implements="ShoppingCart"),))
        assert resolve_binding(CART, renamed, None, default_registry(),
                               CFG) == "cart"

    def test_ui_evocation_binds_when_names_differ(self):
        app = load_app("groveco.app")
        assert resolve_binding(CART, app, None, default_registry(),
                               CFG) is None
        assert resolve_binding(CART, app, load_ui("grove.ui"),
                               default_registry(), CFG) == "cart"
