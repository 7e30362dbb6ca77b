"""Structural diff and formative feedback engine for UML class and ER diagrams."""

from .model import (
    Attribute,
    Diagram,
    DiagramKind,
    Multiplicity,
    Node,
    NodeKind,
    Operation,
    RelKind,
    Relationship,
    Visibility,
    canonical_multiplicity,
    canonical_name,
    canonicalize,
)
from .plantuml import (
    DiagnosticSeverity,
    ParseDiagnostic,
    detect_kind,
    parse_plantuml,
    print_plantuml,
)
from .matching import Matching, match_nodes, name_similarity
from .diffing import Category, ChangeKind, DiffReport, Difference, Severity, diff

__version__ = "0.1.0"

__all__ = [
    "Attribute",
    "Category",
    "ChangeKind",
    "DiagnosticSeverity",
    "Diagram",
    "DiagramKind",
    "DiffReport",
    "Difference",
    "Matching",
    "Multiplicity",
    "Node",
    "NodeKind",
    "Operation",
    "ParseDiagnostic",
    "RelKind",
    "Relationship",
    "Severity",
    "Visibility",
    "canonical_multiplicity",
    "canonical_name",
    "canonicalize",
    "detect_kind",
    "diff",
    "match_nodes",
    "name_similarity",
    "parse_plantuml",
    "print_plantuml",
    "__version__",
]
