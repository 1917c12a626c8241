"""Declarative UI models, convention registry, and mapping standards.

A UI model is a set of screens holding elements. Each element carries an
authored prominence in [0, 1] and a steps-to-reach count; bindings tie the
element to the application (it triggers an action, displays a state value,
claims to display one while showing something else, or is static).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

BUTTON = "Button"
LABEL = "Label"
ICON = "Icon"
FIELD = "Field"
CHECKBOX = "Checkbox"
ELEMENT_KINDS = (BUTTON, LABEL, ICON, FIELD, CHECKBOX)


@dataclass(frozen=True)
class CallTemplate:
    """An action call with argument expressions; free names are template
    variables ranging over the domain."""

    instance: str
    action: str
    args: tuple  # of Expr


@dataclass(frozen=True)
class TriggersAction:
    call: CallTemplate
    guard: Optional[object] = None  # Expr the control enforces, if any
    default_on: bool = False


@dataclass(frozen=True)
class DisplaysState:
    ref: object  # Ref, instance-qualified


@dataclass(frozen=True)
class ClaimsState:
    """The element claims to show `ref` but actually renders `shown`."""

    ref: object
    shown: object


@dataclass(frozen=True)
class StaticBinding:
    pass


Binding = object


@dataclass(frozen=True)
class UIElement:
    id: str
    screen: str
    kind: str
    label: str
    style: str
    binding: Binding
    prominence: float
    steps: int
    visible: bool = True
    convention: Optional[str] = None
    paired: Optional[str] = None


@dataclass(frozen=True)
class Screen:
    name: str
    elements: tuple  # of UIElement


@dataclass(frozen=True)
class UIModel:
    screens: tuple  # of Screen

    def elements(self) -> tuple:
        return tuple(e for s in self.screens for e in s.elements)

    def visible_elements(self) -> tuple:
        return tuple(e for e in self.elements() if e.visible)

    def element(self, elem_id: str) -> Optional[UIElement]:
        for e in self.elements():
            if e.id == elem_id:
                return e
        return None


EMPTY_UI = UIModel(())


# ---------------------------------------------------------------------------
# Convention registry

MEANS_CONCEPT = "concept"
MEANS_ACTION = "action"
MEANS_STATE = "state"


@dataclass(frozen=True)
class Meaning:
    """What a convention token stands for: a whole concept, or a specific
    action or state, optionally pinned to a concept."""

    kind: str
    concept: Optional[str] = None
    member: Optional[str] = None

    def __str__(self) -> str:
        if self.kind == MEANS_CONCEPT:
            return self.concept or "?"
        if self.concept:
            return "%s.%s" % (self.concept, self.member)
        return self.member or "?"


@dataclass(frozen=True)
class ConventionRegistry:
    entries: tuple  # of (token, Meaning), tokens unique

    def lookup(self, token: str) -> Optional[Meaning]:
        for t, meaning in self.entries:
            if t == token:
                return meaning
        return None

    def with_entry(self, token: str, meaning: Meaning) -> "ConventionRegistry":
        if self.lookup(token) is not None:
            raise ValueError("convention token %r already registered" % token)
        return ConventionRegistry(self.entries + ((token, meaning),))


def default_registry() -> ConventionRegistry:
    """The shipped conventions: well-established idioms and what they mean."""
    return ConventionRegistry((
        ("shopping-cart-icon", Meaning(MEANS_CONCEPT, "ShoppingCart")),
        ("add-to-cart-button", Meaning(MEANS_ACTION, "ShoppingCart", "add")),
        ("quantity-stepper",
         Meaning(MEANS_ACTION, "ShoppingCart", "changeQuantity")),
        ("remove-from-cart", Meaning(MEANS_ACTION, "ShoppingCart", "remove")),
        ("checkout-button", Meaning(MEANS_ACTION, "ShoppingCart", "checkout")),
        ("download-button", Meaning(MEANS_ACTION, "FileDownload", "download")),
        ("x-close", Meaning(MEANS_ACTION, None, "cancel")),
        ("decline-button", Meaning(MEANS_ACTION, None, "decline")),
        ("subscribe-button",
         Meaning(MEANS_ACTION, "Subscription", "subscribe")),
        ("unsubscribe-link",
         Meaning(MEANS_ACTION, "Subscription", "unsubscribe")),
        ("bell-icon", Meaning(MEANS_CONCEPT, "Notification")),
    ))


# ---------------------------------------------------------------------------
# Mapping standards (carried by catalog entries)

SCOPE_GLOBAL = "global"
SCOPE_PER_ITEM = "perItem"


@dataclass(frozen=True)
class RequireControl:
    action: str
    scope: str = SCOPE_GLOBAL


@dataclass(frozen=True)
class RequireDisplay:
    component: str
    scope: str = SCOPE_GLOBAL


@dataclass(frozen=True)
class LabelReservation:
    """A display label reserved for one meaning: either a state expression
    (what an element so labeled must show) or an action name (what an
    element so labeled must trigger)."""

    label: str
    state_expr: Optional[object] = None
    action: Optional[str] = None


@dataclass(frozen=True)
class GuardedControl:
    """Controls for `action` must not offer argument tuples outside `guard`."""

    action: str
    guard: object  # Expr over the action's params and concept-qualified state


@dataclass(frozen=True)
class EqualProminence:
    action_a: str
    action_b: str


@dataclass(frozen=True)
class ReachParity:
    action_a: str
    action_b: str
    max_ratio: float


@dataclass(frozen=True)
class ConsistencyGroup:
    subject: str  # action or state name of the owning concept


MappingStandard = object
