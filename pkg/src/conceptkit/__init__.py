"""Concept-specification toolkit: define standard concepts, simulate
composed designs, and check candidates against catalog entries."""

__version__ = "0.1.0"

from .model import (
    ConceptDef, ActionDef, StateComponent, SyncRule, AppModel, Deviation,
    DarkFinding, ConceptState, eval_expr, validate_concept, MissingKey,
)
from .lang import (
    SourceFile, ParseError, LinkError,
    parse_concept, parse_app, parse_ui, parse_catalog, parse_scenario,
    parse_source, print_model,
)
from .engine import (
    Engine, Domain, ActionCall, Step, Trace, StepError, MissingDomain,
    BudgetExceeded, build_domain, state_digest,
)
from .config import Config, parse_config
from .catalog_types import Benefit, CatalogEntry, DomainSpec, Scenario
from .ui import ConventionRegistry, Meaning, UIElement, UIModel, \
    default_registry
from .ui_checks import ObservedConcept, derive_observed, identify_evoked
from .conformance import (
    CompatibilityReport, DeviationReport, UnboundConcept, check,
    check_extension, standard_app, structural_diff, trace_inclusion,
)
from .corpus import (
    catalog_by_name, load_builtin_catalog, load_extensions, run_corpus,
    standard_ui,
)

__all__ = [
    "ConceptDef", "ActionDef", "StateComponent", "SyncRule", "AppModel",
    "Deviation", "DarkFinding", "ConceptState", "eval_expr",
    "validate_concept", "MissingKey",
    "SourceFile", "ParseError", "LinkError",
    "parse_concept", "parse_app", "parse_ui", "parse_catalog",
    "parse_scenario", "parse_source", "print_model",
    "Engine", "Domain", "ActionCall", "Step", "Trace", "StepError",
    "MissingDomain", "BudgetExceeded", "build_domain", "state_digest",
    "Config", "parse_config",
    "Benefit", "CatalogEntry", "DomainSpec", "Scenario",
    "ConventionRegistry", "Meaning", "UIElement", "UIModel",
    "default_registry",
    "ObservedConcept", "derive_observed", "identify_evoked",
    "CompatibilityReport", "DeviationReport", "UnboundConcept", "check",
    "check_extension", "standard_app", "structural_diff", "trace_inclusion",
    "catalog_by_name", "load_builtin_catalog", "load_extensions",
    "run_corpus", "standard_ui",
]
