"""Textual formats: parsing and pretty-printing."""

from .parser import (
    SourceFile, ParseError, LinkError, kind_of,
    parse_concept, parse_app, parse_ui, parse_catalog, parse_scenario,
    parse_source,
    KIND_CONCEPT, KIND_APP, KIND_UI, KIND_CATALOG, KIND_SCENARIO,
)
from .printer import (
    print_expr, print_concept, print_app, print_ui, print_catalog,
    print_scenario, print_model,
)

__all__ = [
    "SourceFile", "ParseError", "LinkError", "kind_of",
    "parse_concept", "parse_app", "parse_ui", "parse_catalog",
    "parse_scenario", "parse_source",
    "KIND_CONCEPT", "KIND_APP", "KIND_UI", "KIND_CATALOG", "KIND_SCENARIO",
    "print_expr", "print_concept", "print_app", "print_ui", "print_catalog",
    "print_scenario", "print_model",
]
