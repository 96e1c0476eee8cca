"""Feature models of product lines, class ontologies derived from them, and
federation ontologies over their shared vocabulary."""

from .feature_model import (
    Configuration,
    FeatureModel,
    core_features,
    count_configurations,
    dead_features,
    enumerate_configurations,
    is_valid_configuration,
    to_formula,
    validate,
)
from .federation import (
    FederationOptions,
    FederationResult,
    build_federation,
    extend_federation,
    fm_to_ontology,
    remove_tool,
)
from .fm_text import parse, serialize
from .ontology import Ontology, classify, is_consistent, is_satisfiable, is_subsumed

__version__ = "0.1.0"

__all__ = [
    "Configuration", "FeatureModel", "FederationOptions", "FederationResult", "Ontology",
    "build_federation", "classify", "core_features", "count_configurations",
    "dead_features", "enumerate_configurations", "extend_federation", "fm_to_ontology",
    "is_consistent", "is_satisfiable", "is_subsumed", "is_valid_configuration", "parse",
    "remove_tool", "serialize", "to_formula", "validate",
]
