"""Mutation operators for the detection-rate harness.

Each operator takes a canonical diagram and returns (mutant, Expectation) or
None when it does not apply. Operators are deterministic: they always touch
the first applicable element in canonical order, so the expected difference
is known by construction.
"""
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from duet.diffing import Category, ChangeKind
from duet.matching import similarity_fraction
from duet.misconceptions import TagCode
from duet.model import (
    Diagram,
    DiagramKind,
    Multiplicity,
    Node,
    NodeKind,
    RelKind,
    Relationship,
    Visibility,
    canonical_name,
    canonicalize,
)

INHERITANCE_LIKE = (RelKind.INHERITANCE, RelKind.REALIZATION)

# Names used by the add-node operator; checked against the diagram for
# dissimilarity so the new node can never be mistaken for a rename.
FRESH_NODE_NAMES = ["Sidecar", "Annex", "Kiosk", "Beacon", "Pergola", "Zeppelin"]

_MATCH_THRESHOLD = Fraction(3, 5)


@dataclass(frozen=True)
class Expectation:
    operator: str
    category: Category
    change: ChangeKind
    subject: Optional[str] = None
    tag: Optional[TagCode] = None
    forbidden_name: Optional[str] = None  # must not leak into the student doc


def _node_category(diagram: Diagram) -> Category:
    return Category.ENTITIES if diagram.kind == DiagramKind.ER else Category.CLASSES


def delete_node(diagram: Diagram):
    if len(diagram.nodes) < 2:
        return None
    victim = diagram.nodes[0]
    canon = victim.canonical
    nodes = tuple(n for n in diagram.nodes if n.canonical != canon)
    rels = tuple(
        r
        for r in diagram.relationships
        if canonical_name(r.end_a) != canon and canonical_name(r.end_b) != canon
    )
    had_rels = len(rels) != len(diagram.relationships)
    mutant = canonicalize(replace(diagram, nodes=nodes, relationships=rels))
    return mutant, Expectation(
        operator="delete_node",
        category=_node_category(diagram),
        change=ChangeKind.MISSING,
        subject=victim.name,
        tag=TagCode.MISSING_RELATIONSHIP if had_rels else None,
        forbidden_name=victim.name,
    )


def add_node(diagram: Diagram):
    fresh = None
    for candidate in FRESH_NODE_NAMES:
        if all(
            similarity_fraction(candidate, node.name) < _MATCH_THRESHOLD
            for node in diagram.nodes
        ):
            fresh = candidate
            break
    if fresh is None:
        return None
    kind = NodeKind.ENTITY if diagram.kind == DiagramKind.ER else NodeKind.CLASS
    mutant = canonicalize(
        replace(diagram, nodes=diagram.nodes + (Node(name=fresh, node_kind=kind),))
    )
    return mutant, Expectation(
        operator="add_node",
        category=_node_category(diagram),
        change=ChangeKind.EXTRA,
        subject=fresh,
    )


def delete_attribute(diagram: Diagram):
    for index, node in enumerate(diagram.nodes):
        if node.attributes:
            attr = node.attributes[0]
            new_node = replace(node, attributes=node.attributes[1:])
            nodes = diagram.nodes[:index] + (new_node,) + diagram.nodes[index + 1:]
            mutant = canonicalize(replace(diagram, nodes=nodes))
            return mutant, Expectation(
                operator="delete_attribute",
                category=Category.ATTRIBUTES,
                change=ChangeKind.MISSING,
                subject=f"{node.name}.{attr.name}",
                tag=TagCode.ATTR_ERROR,
            )
    return None


def change_attribute_type(diagram: Diagram):
    for index, node in enumerate(diagram.nodes):
        if node.attributes:
            attr = node.attributes[0]
            new_type = "Blob" if (attr.type_text or "").lower() != "blob" else "Binary"
            new_attrs = (replace(attr, type_text=new_type),) + node.attributes[1:]
            nodes = (
                diagram.nodes[:index]
                + (replace(node, attributes=new_attrs),)
                + diagram.nodes[index + 1:]
            )
            mutant = canonicalize(replace(diagram, nodes=nodes))
            return mutant, Expectation(
                operator="change_attribute_type",
                category=Category.ATTRIBUTES,
                change=ChangeKind.MODIFIED,
                subject=f"{node.name}.{attr.name}",
                tag=TagCode.ATTR_ERROR,
            )
    return None


def change_visibility(diagram: Diagram):
    if diagram.kind != DiagramKind.CLASS:
        return None
    for index, node in enumerate(diagram.nodes):
        if node.attributes:
            attr = node.attributes[0]
            new_vis = (
                Visibility.PRIVATE
                if attr.visibility == Visibility.PUBLIC
                else Visibility.PUBLIC
            )
            new_attrs = (replace(attr, visibility=new_vis),) + node.attributes[1:]
            nodes = (
                diagram.nodes[:index]
                + (replace(node, attributes=new_attrs),)
                + diagram.nodes[index + 1:]
            )
            mutant = canonicalize(replace(diagram, nodes=nodes))
            return mutant, Expectation(
                operator="change_visibility",
                category=Category.VISIBILITY,
                change=ChangeKind.MODIFIED,
                subject=f"{node.name}.{attr.name}",
                tag=TagCode.ATTR_ERROR,
            )
    return None


_KIND_SWAP = {
    RelKind.ASSOCIATION: RelKind.AGGREGATION,
    RelKind.DIRECTED_ASSOCIATION: RelKind.ASSOCIATION,
    RelKind.AGGREGATION: RelKind.COMPOSITION,
    RelKind.COMPOSITION: RelKind.AGGREGATION,
    RelKind.DEPENDENCY: RelKind.ASSOCIATION,
}


def change_relationship_kind(diagram: Diagram):
    if diagram.kind != DiagramKind.CLASS:
        return None
    for index, rel in enumerate(diagram.relationships):
        if rel.rel_kind in _KIND_SWAP:
            new_rel = replace(rel, rel_kind=_KIND_SWAP[rel.rel_kind])
            rels = (
                diagram.relationships[:index]
                + (new_rel,)
                + diagram.relationships[index + 1:]
            )
            mutant = canonicalize(replace(diagram, relationships=rels))
            return mutant, Expectation(
                operator="change_relationship_kind",
                category=Category.RELATIONSHIPS,
                change=ChangeKind.MODIFIED,
                subject=f"{rel.end_a}--{rel.end_b}",
                tag=TagCode.SYMBOL_MISUSE,
            )
    return None


def reverse_inheritance(diagram: Diagram):
    if diagram.kind != DiagramKind.CLASS:
        return None
    for index, rel in enumerate(diagram.relationships):
        if rel.rel_kind in INHERITANCE_LIKE:
            new_rel = replace(rel, end_a=rel.end_b, end_b=rel.end_a)
            rels = (
                diagram.relationships[:index]
                + (new_rel,)
                + diagram.relationships[index + 1:]
            )
            mutant = canonicalize(replace(diagram, relationships=rels))
            return mutant, Expectation(
                operator="reverse_inheritance",
                category=Category.INHERITANCE,
                change=ChangeKind.MODIFIED,
                subject=f"{rel.end_a}--{rel.end_b}",
                tag=TagCode.INHERITANCE_CONFUSION,
            )
    return None


def _swap_class_multiplicity(mult: Multiplicity) -> Multiplicity:
    return Multiplicity(0, 1) if mult == Multiplicity(1, 1) else Multiplicity(1, 1)


def _swap_crow_multiplicity(mult: Multiplicity) -> Multiplicity:
    return (
        Multiplicity(1, 1) if mult == Multiplicity(0, None) else Multiplicity(0, None)
    )


def change_multiplicity(diagram: Diagram):
    swap = (
        _swap_crow_multiplicity
        if diagram.kind == DiagramKind.ER
        else _swap_class_multiplicity
    )
    for index, rel in enumerate(diagram.relationships):
        if rel.multiplicity_a is not None:
            new_rel = replace(rel, multiplicity_a=swap(rel.multiplicity_a))
        elif rel.multiplicity_b is not None:
            new_rel = replace(rel, multiplicity_b=swap(rel.multiplicity_b))
        else:
            continue
        rels = (
            diagram.relationships[:index]
            + (new_rel,)
            + diagram.relationships[index + 1:]
        )
        mutant = canonicalize(replace(diagram, relationships=rels))
        return mutant, Expectation(
            operator="change_multiplicity",
            category=Category.MULTIPLICITIES,
            change=ChangeKind.MODIFIED,
            subject=f"{rel.end_a}--{rel.end_b}",
            tag=TagCode.WRONG_MULTIPLICITY,
        )
    return None


OPERATORS = (
    delete_node,
    add_node,
    delete_attribute,
    change_attribute_type,
    change_visibility,
    change_relationship_kind,
    reverse_inheritance,
    change_multiplicity,
)


def mutants_for(diagram: Diagram):
    """Every applicable (mutant, expectation) for one diagram."""
    results = []
    for operator in OPERATORS:
        outcome = operator(diagram)
        if outcome is not None:
            results.append(outcome)
    return results
