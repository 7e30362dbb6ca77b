"""Rule-based classification of differences into common-mistake tags.

The rule table is closed and deterministic; each difference feeds at most
one tag and tags are grouped per code, which keeps occurrence counts
additive when aggregated over many submissions. Omitted or surplus nodes
carry no tag of their own: the taxonomy speaks about members, relationships,
multiplicities, and naming, and node-level gaps already surface through the
relationships they take with them.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import KindMismatchError
from .diffing import Category, ChangeKind, DiffReport
from .matching import match_names
from .model import Diagram, DiagramKind, canonical_name


class TagCode(str, Enum):
    ATTR_ERROR = "AttrError"
    INHERITANCE_CONFUSION = "InheritanceConfusion"
    SYMBOL_MISUSE = "SymbolMisuse"
    MISSING_RELATIONSHIP = "MissingRelationship"
    REDUNDANT_RELATIONSHIP = "RedundantRelationship"
    WRONG_MULTIPLICITY = "WrongMultiplicity"
    CROSS_MODEL_INCONSISTENCY = "CrossModelInconsistency"
    NAMING_DRIFT = "NamingDrift"


@dataclass(frozen=True)
class MisconceptionTag:
    code: TagCode
    difference_refs: tuple  # indices into DiffReport.differences; empty only
    # for cross-model tags, which reference no report
    explanation: str = ""

    def __post_init__(self):
        object.__setattr__(self, "difference_refs", tuple(self.difference_refs))

    def to_dict(self) -> dict:
        return {
            "code": self.code.value,
            "difference_refs": list(self.difference_refs),
            "explanation": self.explanation,
        }


def tag_from_dict(data: dict) -> MisconceptionTag:
    return MisconceptionTag(
        code=TagCode(data["code"]),
        difference_refs=tuple(data["difference_refs"]),
        explanation=data["explanation"],
    )


def _rule(category: Category, change: ChangeKind):
    if category in (Category.ATTRIBUTES, Category.VISIBILITY):
        return TagCode.ATTR_ERROR
    if category == Category.INHERITANCE:
        return TagCode.INHERITANCE_CONFUSION
    if category == Category.RELATIONSHIPS:
        if change == ChangeKind.MODIFIED:
            return TagCode.SYMBOL_MISUSE
        if change == ChangeKind.MISSING:
            return TagCode.MISSING_RELATIONSHIP
        return TagCode.REDUNDANT_RELATIONSHIP
    if category == Category.MULTIPLICITIES:
        return TagCode.WRONG_MULTIPLICITY
    if category in (Category.CLASSES, Category.ENTITIES):
        if change == ChangeKind.MODIFIED:
            return TagCode.NAMING_DRIFT
    return None


_EXPLANATIONS = {
    TagCode.ATTR_ERROR: "attribute or operation details deviate from the reference",
    TagCode.INHERITANCE_CONFUSION: "generalization structure deviates from the reference",
    TagCode.SYMBOL_MISUSE: "a relationship uses a different connector than the reference",
    TagCode.MISSING_RELATIONSHIP: "the reference contains relationships the submission lacks",
    TagCode.REDUNDANT_RELATIONSHIP: "the submission contains relationships the reference lacks",
    TagCode.WRONG_MULTIPLICITY: "relationship multiplicities deviate from the reference",
    TagCode.NAMING_DRIFT: "element names deviate in spelling from the reference",
}

_CODE_ORDER = {code: i for i, code in enumerate(TagCode)}


def classify(report: DiffReport) -> list:
    """Map every applicable difference onto a misconception tag.

    Returns one tag per code present, holding the indices of all
    contributing differences; codes are emitted in a fixed order.
    """
    grouped: dict = {}
    for index, difference in enumerate(report.differences):
        code = _rule(difference.category, difference.change)
        if code is None:
            continue
        grouped.setdefault(code, []).append(index)
    tags = []
    for code in sorted(grouped, key=_CODE_ORDER.get):
        tags.append(
            MisconceptionTag(
                code=code,
                difference_refs=tuple(grouped[code]),
                explanation=_EXPLANATIONS[code],
            )
        )
    return tags


def _degree(diagram: Diagram, node_name: str) -> int:
    canon = canonical_name(node_name)
    return sum(
        1
        for rel in diagram.relationships
        for end in (rel.end_a, rel.end_b)
        if canonical_name(end) == canon
    )


def cross_model_check(
    class_diagram: Diagram, er_diagram: Diagram, threshold: float = 0.6
) -> list:
    """Consistency check between a class diagram and an ER diagram.

    Classes without a matching entity (and vice versa) and matched pairs
    whose relationship participation counts differ produce tags. These tags
    carry no difference references; the explanation names the elements.
    """
    if class_diagram.kind != DiagramKind.CLASS or er_diagram.kind != DiagramKind.ER:
        raise KindMismatchError(
            "cross-model check expects a class diagram and an ER diagram"
        )
    matching = match_names(
        class_diagram.node_names(), er_diagram.node_names(), threshold
    )
    tags = []
    for name in matching.unmatched_reference:
        tags.append(
            MisconceptionTag(
                code=TagCode.CROSS_MODEL_INCONSISTENCY,
                difference_refs=(),
                explanation=f"class {name!r} has no corresponding entity",
            )
        )
    for name in matching.unmatched_student:
        tags.append(
            MisconceptionTag(
                code=TagCode.CROSS_MODEL_INCONSISTENCY,
                difference_refs=(),
                explanation=f"entity {name!r} has no corresponding class",
            )
        )
    for class_name, entity_name, _score in matching.pairs:
        class_degree = _degree(class_diagram, class_name)
        entity_degree = _degree(er_diagram, entity_name)
        if class_degree != entity_degree:
            tags.append(
                MisconceptionTag(
                    code=TagCode.CROSS_MODEL_INCONSISTENCY,
                    difference_refs=(),
                    explanation=(
                        f"{class_name!r} participates in {class_degree} "
                        f"relationship(s) as a class but {entity_degree} as "
                        f"entity {entity_name!r}"
                    ),
                )
            )
    return tags
