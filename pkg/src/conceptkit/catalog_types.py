"""Catalog entries and scenario descriptions.

A catalog entry packages a standard concept with its required cross-concept
synchronizations, independence declarations, mapping standards, and named
extension variants. A scenario points a candidate app (and optionally a UI)
at a standard entry and records the deviations it is expected to produce.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import ConceptDef, SyncRule


@dataclass(frozen=True)
class VariantRef:
    """Named extension variant; the path is resolved against the entry's
    directory when the catalog is loaded."""

    name: str
    path: str
    app: Optional[object] = None  # AppModel once resolved

    def resolved(self, app) -> "VariantRef":
        return VariantRef(self.name, self.path, app)


@dataclass(frozen=True)
class CatalogEntry:
    concept: ConceptDef
    independent: tuple = ()  # actions that no foreign sync may couple
    required_syncs: tuple = ()  # of SyncRule over concept names
    standards: tuple = ()  # of MappingStandard
    variants: tuple = ()  # of VariantRef

    @property
    def name(self) -> str:
        return self.concept.name

    def peer_concepts(self) -> tuple:
        """Concept names referenced by required syncs, in first-use order."""
        seen = []
        for rule in self.required_syncs:
            for name in [rule.trigger.instance] + \
                    [r.instance for r in rule.reactions]:
                if name != self.concept.name and name not in seen:
                    seen.append(name)
        return tuple(seen)


@dataclass(frozen=True)
class DomainSpec:
    """Finite value universe: entity ids per sort plus optional numeric
    pools for Nat- and Money-sorted parameters."""

    entities: tuple  # of (sort name, tuple of ids)
    nat: Optional[tuple] = None
    money: Optional[tuple] = None

    def entity_ids(self, sort: str) -> Optional[tuple]:
        for name, ids in self.entities:
            if name == sort:
                return ids
        return None


@dataclass(frozen=True)
class Benefit:
    """Who a deviation serves: a scenario-wide default plus per-subject
    overrides. This is the declared, substantive input; it is never
    inferred."""

    default: str
    overrides: tuple = ()  # of (subject, beneficiary)

    def beneficiary(self, subject: str) -> str:
        for sub, who in self.overrides:
            if sub == subject:
                return who
        return self.default


@dataclass(frozen=True)
class ExpectedDeviation:
    category: str
    principle: Optional[str]
    subject: str
    dyad: str  # "observed" | "implemented" in scenario shorthand

    def category_label(self) -> str:
        if self.principle:
            return "%s(%s)" % (self.category, self.principle)
        return self.category


@dataclass(frozen=True)
class Scenario:
    name: str
    standard: str
    app_path: str
    ui_path: Optional[str]
    domain: DomainSpec
    depth: Optional[int]
    benefit: Benefit
    expected: tuple  # of ExpectedDeviation
    dark: bool
