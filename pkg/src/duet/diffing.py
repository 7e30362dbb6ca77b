"""Structural difference report between a reference and a student diagram.

The report lists what is missing, extra, or modified; it carries no judgment
text. Subjects follow a fixed naming rule: missing and modified items are
named with reference-side names, extra items with student-side names, which
makes the report of the swapped comparison a mirror image.

Severity table (fixed):

    category              missing   extra   modified
    classes / entities    Major     Major   Minor (name spelling)
    attributes            Minor     Minor   Minor
    operations            Minor     Minor   Minor
    relationships         Major     Major   Minor
    multiplicities        -         -       Minor
    visibility            -         -       Minor
    inheritance           -         -       Major
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Optional

from .errors import InconsistentMatchingError
from .matching import (
    Matching,
    _as_fraction_threshold,
    assign_elements,
    match_names,
    similarity_fraction,
)
from .model import (
    Diagram,
    DiagramKind,
    INHERITANCE_KINDS,
    RelKind,
    Relationship,
    SYMMETRIC_KINDS,
    canonical_name,
    _canonical_text,
    _canonical_relationship,
)
from .plantuml import relationship_text


class Category(str, Enum):
    CLASSES = "classes"
    ENTITIES = "entities"
    ATTRIBUTES = "attributes"
    OPERATIONS = "operations"
    RELATIONSHIPS = "relationships"
    MULTIPLICITIES = "multiplicities"
    VISIBILITY = "visibility"
    INHERITANCE = "inheritance"


class ChangeKind(str, Enum):
    MISSING = "missing"
    EXTRA = "extra"
    MODIFIED = "modified"


class Severity(str, Enum):
    MAJOR = "major"
    MINOR = "minor"


_CATEGORY_ORDER = {c: i for i, c in enumerate(Category)}
_CHANGE_ORDER = {c: i for i, c in enumerate(ChangeKind)}

_MAJOR = {
    (Category.CLASSES, ChangeKind.MISSING),
    (Category.CLASSES, ChangeKind.EXTRA),
    (Category.ENTITIES, ChangeKind.MISSING),
    (Category.ENTITIES, ChangeKind.EXTRA),
    (Category.RELATIONSHIPS, ChangeKind.MISSING),
    (Category.RELATIONSHIPS, ChangeKind.EXTRA),
    (Category.INHERITANCE, ChangeKind.MISSING),
    (Category.INHERITANCE, ChangeKind.EXTRA),
    (Category.INHERITANCE, ChangeKind.MODIFIED),
}


def severity_for(category: Category, change: ChangeKind) -> Severity:
    return Severity.MAJOR if (category, change) in _MAJOR else Severity.MINOR


KIND_DISPLAY = {
    RelKind.ASSOCIATION: "Association",
    RelKind.DIRECTED_ASSOCIATION: "Directed Association",
    RelKind.AGGREGATION: "Aggregation",
    RelKind.COMPOSITION: "Composition",
    RelKind.INHERITANCE: "Inheritance",
    RelKind.REALIZATION: "Realization",
    RelKind.DEPENDENCY: "Dependency",
    RelKind.ER_RELATIONSHIP: "Relationship",
}

_VISIBILITY_DISPLAY = {
    "public": "public",
    "private": "private",
    "protected": "protected",
    "package": "package-private",
    "unspecified": "unspecified",
}


@dataclass(frozen=True)
class Difference:
    category: Category
    change: ChangeKind
    subject: str
    expected: Optional[str] = None
    found: Optional[str] = None
    severity: Severity = Severity.MINOR

    def sort_key(self):
        return (
            _CATEGORY_ORDER[self.category],
            _CHANGE_ORDER[self.change],
            self.subject,
            self.expected or "",
            self.found or "",
        )

    def to_dict(self) -> dict:
        return {
            "category": self.category.value,
            "change": self.change.value,
            "subject": self.subject,
            "detail": {"expected": self.expected, "found": self.found},
            "severity": self.severity.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Difference":
        return cls(
            category=Category(data["category"]),
            change=ChangeKind(data["change"]),
            subject=data["subject"],
            expected=data["detail"]["expected"],
            found=data["detail"]["found"],
            severity=Severity(data["severity"]),
        )


@dataclass(frozen=True)
class DiffReport:
    differences: tuple
    matching: Matching
    reference_name: str = ""
    student_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "differences", tuple(self.differences))

    @property
    def is_empty(self) -> bool:
        return not self.differences

    def to_dict(self) -> dict:
        return {
            "reference_name": self.reference_name,
            "student_name": self.student_name,
            "differences": [d.to_dict() for d in self.differences],
            "matching": self.matching.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiffReport":
        return cls(
            differences=tuple(
                Difference.from_dict(d) for d in data["differences"]
            ),
            matching=Matching.from_dict(data["matching"]),
            reference_name=data.get("reference_name", ""),
            student_name=data.get("student_name", ""),
        )


def _make(category, change, subject, expected=None, found=None) -> Difference:
    return Difference(
        category=category,
        change=change,
        subject=subject,
        expected=expected,
        found=found,
        severity=severity_for(category, change),
    )


def _node_category(kind: DiagramKind) -> Category:
    return Category.ENTITIES if kind == DiagramKind.ER else Category.CLASSES


def _diff_attributes(out, ref_node, stu_node, threshold):
    ref_attrs = list(ref_node.attributes)
    stu_attrs = list(stu_node.attributes)
    matched = match_names(
        [a.name for a in ref_attrs], [a.name for a in stu_attrs], threshold
    )
    by_name_ref = {a.name: a for a in ref_attrs}
    by_name_stu = {a.name: a for a in stu_attrs}
    for name in matched.unmatched_reference:
        attr = by_name_ref[name]
        out.append(
            _make(
                Category.ATTRIBUTES,
                ChangeKind.MISSING,
                f"{ref_node.name}.{name}",
                expected=attr.render(),
            )
        )
    for name in matched.unmatched_student:
        attr = by_name_stu[name]
        out.append(
            _make(
                Category.ATTRIBUTES,
                ChangeKind.EXTRA,
                f"{stu_node.name}.{name}",
                found=attr.render(),
            )
        )
    for ref_name, stu_name, _score in matched.pairs:
        ra, sa = by_name_ref[ref_name], by_name_stu[stu_name]
        subject = f"{ref_node.name}.{ra.name}"
        if _canonical_text(ra.type_text) != _canonical_text(sa.type_text):
            out.append(
                _make(
                    Category.ATTRIBUTES,
                    ChangeKind.MODIFIED,
                    subject,
                    expected=ra.type_text or "untyped",
                    found=sa.type_text or "untyped",
                )
            )
        if ra.visibility != sa.visibility:
            out.append(
                _make(
                    Category.VISIBILITY,
                    ChangeKind.MODIFIED,
                    subject,
                    expected=_VISIBILITY_DISPLAY[ra.visibility.value],
                    found=_VISIBILITY_DISPLAY[sa.visibility.value],
                )
            )
        if ra.is_key != sa.is_key:
            out.append(
                _make(
                    Category.ATTRIBUTES,
                    ChangeKind.MODIFIED,
                    subject,
                    expected="part of the primary key" if ra.is_key else "not part of the primary key",
                    found="part of the primary key" if sa.is_key else "not part of the primary key",
                )
            )
        if ra.is_mandatory != sa.is_mandatory:
            out.append(
                _make(
                    Category.ATTRIBUTES,
                    ChangeKind.MODIFIED,
                    subject,
                    expected="mandatory" if ra.is_mandatory else "optional",
                    found="mandatory" if sa.is_mandatory else "optional",
                )
            )


def _diff_operations(out, ref_node, stu_node, threshold):
    ref_ops = list(ref_node.operations)
    stu_ops = list(stu_node.operations)
    # Operations match by name similarity, but only across equal arities.
    limit = _as_fraction_threshold(threshold)

    def score(r, s) -> Optional[Fraction]:
        if len(r.parameters) != len(s.parameters):
            return None
        sc = similarity_fraction(r.name, s.name)
        return sc if sc >= limit else None

    pairs, un_ref, un_stu = assign_elements(
        ref_ops, stu_ops, score, lambda o: (o.canonical, o.signature)
    )
    for i in un_ref:
        op = ref_ops[i]
        out.append(
            _make(
                Category.OPERATIONS,
                ChangeKind.MISSING,
                f"{ref_node.name}.{op.name}",
                expected=op.render(),
            )
        )
    for j in un_stu:
        op = stu_ops[j]
        out.append(
            _make(
                Category.OPERATIONS,
                ChangeKind.EXTRA,
                f"{stu_node.name}.{op.name}",
                found=op.render(),
            )
        )
    for i, j, _sc in pairs:
        ro, so = ref_ops[i], stu_ops[j]
        subject = f"{ref_node.name}.{ro.name}"
        ref_types = tuple(_canonical_text(t) for _, t in ro.parameters)
        stu_types = tuple(_canonical_text(t) for _, t in so.parameters)
        signature_changed = (
            ref_types != stu_types
            or _canonical_text(ro.return_type) != _canonical_text(so.return_type)
        )
        if signature_changed:
            out.append(
                _make(
                    Category.OPERATIONS,
                    ChangeKind.MODIFIED,
                    subject,
                    expected=ro.render(),
                    found=so.render(),
                )
            )
        if ro.visibility != so.visibility:
            out.append(
                _make(
                    Category.VISIBILITY,
                    ChangeKind.MODIFIED,
                    subject,
                    expected=_VISIBILITY_DISPLAY[ro.visibility.value],
                    found=_VISIBILITY_DISPLAY[so.visibility.value],
                )
            )


_KIND_CLASS = {
    RelKind.ASSOCIATION: "association",
    RelKind.DIRECTED_ASSOCIATION: "association",
    RelKind.AGGREGATION: "aggregation",
    RelKind.COMPOSITION: "composition",
    RelKind.INHERITANCE: "inheritance",
    RelKind.REALIZATION: "inheritance",
    RelKind.DEPENDENCY: "dependency",
    RelKind.ER_RELATIONSHIP: "er",
}


def _rel_subject(rel: Relationship) -> str:
    return f"{rel.end_a}--{rel.end_b}"


def _direction_text(rel: Relationship) -> str:
    return relationship_text(replace(rel, multiplicity_a=None, multiplicity_b=None, label=None))


def _rel_category(*kinds) -> Category:
    if any(k in INHERITANCE_KINDS for k in kinds):
        return Category.INHERITANCE
    return Category.RELATIONSHIPS


def _compare_matched_rels(out, ref_rel: Relationship, stu_rel: Relationship):
    """Emit differences between one reference and one student relationship."""
    subject = _rel_subject(ref_rel)
    if ref_rel.rel_kind != stu_rel.rel_kind:
        out.append(
            _make(
                _rel_category(ref_rel.rel_kind, stu_rel.rel_kind),
                ChangeKind.MODIFIED,
                subject,
                expected=KIND_DISPLAY[ref_rel.rel_kind],
                found=KIND_DISPLAY[stu_rel.rel_kind],
            )
        )
    elif ref_rel.rel_kind not in SYMMETRIC_KINDS and (
        canonical_name(ref_rel.end_a) != canonical_name(stu_rel.end_a)
    ):
        out.append(
            _make(
                _rel_category(ref_rel.rel_kind),
                ChangeKind.MODIFIED,
                subject,
                expected=_direction_text(ref_rel),
                found=_direction_text(stu_rel),
            )
        )

    # Align multiplicities per endpoint by canonical node name; positional
    # alignment for self-loops.
    ends = [
        (ref_rel.end_a, ref_rel.multiplicity_a, stu_rel.multiplicity_a),
        (ref_rel.end_b, ref_rel.multiplicity_b, stu_rel.multiplicity_b),
    ]
    if canonical_name(ref_rel.end_a) != canonical_name(ref_rel.end_b) and (
        canonical_name(ref_rel.end_a) == canonical_name(stu_rel.end_b)
    ):
        ends = [
            (ref_rel.end_a, ref_rel.multiplicity_a, stu_rel.multiplicity_b),
            (ref_rel.end_b, ref_rel.multiplicity_b, stu_rel.multiplicity_a),
        ]
    for _end, ref_mult, stu_mult in ends:
        if ref_mult != stu_mult:
            out.append(
                _make(
                    Category.MULTIPLICITIES,
                    ChangeKind.MODIFIED,
                    subject,
                    expected=ref_mult.text if ref_mult else "unspecified",
                    found=stu_mult.text if stu_mult else "unspecified",
                )
            )


def _project_student_rel(rel: Relationship, stu_to_ref: dict):
    a = stu_to_ref.get(canonical_name(rel.end_a))
    b = stu_to_ref.get(canonical_name(rel.end_b))
    if a is None or b is None:
        return None
    return _canonical_relationship(replace(rel, end_a=a, end_b=b))


def _rel_sort_key(rel: Relationship):
    return (
        canonical_name(rel.end_a),
        canonical_name(rel.end_b),
        rel.rel_kind.value,
        rel.multiplicity_a.text if rel.multiplicity_a else "",
        rel.multiplicity_b.text if rel.multiplicity_b else "",
        rel.label or "",
    )


def _diff_relationships(out, reference: Diagram, student: Diagram, matching: Matching):
    stu_to_ref = {
        canonical_name(stu): ref for ref, stu, _ in matching.pairs
    }
    ref_rels = list(reference.relationships)
    # (projected, original) for matchable student relationships
    projected = []
    for rel in student.relationships:
        proj = _project_student_rel(rel, stu_to_ref)
        if proj is None:
            out.append(
                _make(
                    Category.RELATIONSHIPS,
                    ChangeKind.EXTRA,
                    _rel_subject(rel),
                    found=relationship_text(replace(rel, label=None)),
                )
            )
        else:
            projected.append((proj, rel))

    def bucket(items, key):
        groups: dict = {}
        for item in items:
            groups.setdefault(key(item), []).append(item)
        return groups

    # Round 1 pairs relationships agreeing on endpoints and kind family;
    # round 2 re-pairs the leftovers by endpoints alone, so for example a
    # composition drawn as an aggregation comes back as one modification.
    rounds = [
        lambda rel: (rel.canonical_pair(), _KIND_CLASS[rel.rel_kind]),
        lambda rel: rel.canonical_pair(),
    ]
    remaining_ref = ref_rels
    remaining_stu = projected
    for key in rounds:
        ref_groups = bucket(remaining_ref, key)
        stu_groups = bucket(remaining_stu, lambda pair, k=key: k(pair[0]))
        next_ref, next_stu = [], []
        for group_key in sorted(
            set(ref_groups) | set(stu_groups),
            key=lambda k: (str(k),),
        ):
            refs = sorted(ref_groups.get(group_key, []), key=_rel_sort_key)
            stus = sorted(
                stu_groups.get(group_key, []), key=lambda p: _rel_sort_key(p[0])
            )
            for ref_rel, (stu_rel, _original) in zip(refs, stus):
                _compare_matched_rels(out, ref_rel, stu_rel)
            next_ref.extend(refs[len(stus):])
            next_stu.extend(stus[len(refs):])
        remaining_ref, remaining_stu = next_ref, next_stu

    for rel in remaining_ref:
        out.append(
            _make(
                Category.RELATIONSHIPS,
                ChangeKind.MISSING,
                _rel_subject(rel),
                expected=relationship_text(replace(rel, label=None)),
            )
        )
    for _proj, original in remaining_stu:
        out.append(
            _make(
                Category.RELATIONSHIPS,
                ChangeKind.EXTRA,
                _rel_subject(original),
                found=relationship_text(replace(original, label=None)),
            )
        )


def diff(reference: Diagram, student: Diagram, matching: Matching) -> DiffReport:
    """Compare two diagrams of the same kind through a node matching.

    Raises InconsistentMatchingError if the matching names nodes that do not
    exist in the given diagrams.
    """
    node_cat = _node_category(reference.kind)
    ref_names = {canonical_name(n) for n in reference.node_names()}
    stu_names = {canonical_name(n) for n in student.node_names()}
    mentioned_ref = {r for r, _, _ in matching.pairs} | set(matching.unmatched_reference)
    mentioned_stu = {s for _, s, _ in matching.pairs} | set(matching.unmatched_student)
    for name in mentioned_ref:
        if canonical_name(name) not in ref_names:
            raise InconsistentMatchingError(
                f"matching references unknown reference node {name!r}"
            )
    for name in mentioned_stu:
        if canonical_name(name) not in stu_names:
            raise InconsistentMatchingError(
                f"matching references unknown student node {name!r}"
            )

    out: list = []
    for name in matching.unmatched_reference:
        out.append(_make(node_cat, ChangeKind.MISSING, name, expected=name))
    for name in matching.unmatched_student:
        out.append(_make(node_cat, ChangeKind.EXTRA, name, found=name))

    for ref_name, stu_name, score in matching.pairs:
        ref_node = reference.node(ref_name)
        stu_node = student.node(stu_name)
        if score < 1.0:
            out.append(
                _make(
                    node_cat,
                    ChangeKind.MODIFIED,
                    ref_name,
                    expected=ref_name,
                    found=stu_name,
                )
            )
        _diff_attributes(out, ref_node, stu_node, matching.threshold)
        _diff_operations(out, ref_node, stu_node, matching.threshold)

    _diff_relationships(out, reference, student, matching)

    out.sort(key=Difference.sort_key)
    return DiffReport(
        differences=tuple(out),
        matching=matching,
        reference_name=reference.source_name,
        student_name=student.source_name,
    )
