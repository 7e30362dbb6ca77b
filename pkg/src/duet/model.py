"""Diagram intermediate representation and canonical forms.

Every diagram, regardless of how it entered the system, is normalized into
the immutable types defined here. Canonicalization makes structural
comparison order-insensitive: node, attribute, and operation lists are
sorted by canonical name, and symmetric relationships are endpoint-ordered.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .errors import (
    DuplicateMemberError,
    DuplicateNodeError,
    EmptyNameError,
    InvalidDiagramError,
    MalformedMultiplicityError,
)


class DiagramKind(str, Enum):
    CLASS = "class"
    ER = "er"


class NodeKind(str, Enum):
    CLASS = "class"
    ABSTRACT_CLASS = "abstract_class"
    INTERFACE = "interface"
    ENUM = "enum"
    ENTITY = "entity"


class Visibility(str, Enum):
    PUBLIC = "public"
    PRIVATE = "private"
    PROTECTED = "protected"
    PACKAGE = "package"
    UNSPECIFIED = "unspecified"


class RelKind(str, Enum):
    ASSOCIATION = "association"
    DIRECTED_ASSOCIATION = "directed_association"
    AGGREGATION = "aggregation"
    COMPOSITION = "composition"
    INHERITANCE = "inheritance"
    REALIZATION = "realization"
    DEPENDENCY = "dependency"
    ER_RELATIONSHIP = "er_relationship"


# Symmetric kinds get their endpoints ordered lexicographically by canonical
# node name; all other kinds are directional and keep their endpoint order.
SYMMETRIC_KINDS = frozenset({RelKind.ASSOCIATION, RelKind.ER_RELATIONSHIP})

# Inheritance-like kinds never carry multiplicities.
INHERITANCE_KINDS = frozenset({RelKind.INHERITANCE, RelKind.REALIZATION})

_SEPARATORS = re.compile(r"[\s_\-]+")
_MULTIPLICITY = re.compile(r"^(\d+)(?:\.\.(\d+|\*))?$|^\*$")


def canonical_name(raw: str) -> str:
    """Lowercase `raw` and drop whitespace, underscores, and hyphens.

    Raises EmptyNameError if nothing remains.
    """
    result = _SEPARATORS.sub("", raw.strip()).lower()
    if not result:
        raise EmptyNameError(f"name {raw!r} is empty after canonicalization")
    return result


def _canonical_text(raw: Optional[str]) -> str:
    """Like canonical_name but total: None or blank input gives ''."""
    if raw is None:
        return ""
    return _SEPARATORS.sub("", raw.strip()).lower()


@dataclass(frozen=True)
class Multiplicity:
    """Count range on a relationship end; max=None means unbounded."""

    min: int
    max: Optional[int] = None

    def __post_init__(self):
        if self.min < 0:
            raise MalformedMultiplicityError(f"negative lower bound {self.min}")
        if self.max is not None and self.max < self.min:
            raise MalformedMultiplicityError(
                f"upper bound {self.max} below lower bound {self.min}"
            )

    def __lt__(self, other):  # unbounded sorts after any bound
        if not isinstance(other, Multiplicity):
            return NotImplemented
        return self._sort_key() < other._sort_key()

    def _sort_key(self):
        return (self.min, self.max is None, self.max if self.max is not None else 0)

    @property
    def text(self) -> str:
        """Canonical textual form: '1', '2..5', '0..*', '1..*'."""
        if self.max is None:
            return f"{self.min}..*"
        if self.max == self.min:
            return str(self.min)
        return f"{self.min}..{self.max}"


def canonical_multiplicity(raw: str) -> Multiplicity:
    """Parse 'N', 'N..M', 'N..*', or '*' into a Multiplicity.

    '*' and '0..*' denote the same value, as do 'N' and 'N..N'.
    """
    text = raw.strip()
    m = _MULTIPLICITY.match(text)
    if not m:
        raise MalformedMultiplicityError(f"unsupported multiplicity {raw!r}")
    if text == "*":
        return Multiplicity(0, None)
    low = int(m.group(1))
    high = m.group(2)
    if high is None:
        return Multiplicity(low, low)
    if high == "*":
        return Multiplicity(low, None)
    return Multiplicity(low, int(high))


@dataclass(frozen=True)
class Attribute:
    name: str
    type_text: Optional[str] = None
    visibility: Visibility = Visibility.UNSPECIFIED
    is_key: bool = False
    is_mandatory: bool = False

    @property
    def canonical(self) -> str:
        return canonical_name(self.name)

    def render(self) -> str:
        """Readable one-line form, e.g. 'gpa : Float'."""
        return f"{self.name} : {self.type_text}" if self.type_text else self.name


@dataclass(frozen=True)
class Operation:
    name: str
    parameters: tuple = ()  # tuple of (name, type_text-or-None)
    return_type: Optional[str] = None
    visibility: Visibility = Visibility.UNSPECIFIED

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(tuple(p) for p in self.parameters))

    @property
    def canonical(self) -> str:
        return canonical_name(self.name)

    @property
    def signature(self) -> tuple:
        """(canonical name, canonical parameter type list); unique per node."""
        return (self.canonical, tuple(_canonical_text(t) for _, t in self.parameters))

    def render(self) -> str:
        params = ", ".join(
            f"{p} : {t}" if t else str(p) for p, t in self.parameters
        )
        text = f"{self.name}({params})"
        if self.return_type:
            text += f" : {self.return_type}"
        return text


@dataclass(frozen=True)
class Node:
    name: str
    node_kind: NodeKind = NodeKind.CLASS
    attributes: tuple = ()
    operations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "operations", tuple(self.operations))

    @property
    def canonical(self) -> str:
        return canonical_name(self.name)


@dataclass(frozen=True)
class Relationship:
    rel_kind: RelKind
    end_a: str
    end_b: str
    multiplicity_a: Optional[Multiplicity] = None
    multiplicity_b: Optional[Multiplicity] = None
    label: Optional[str] = None

    def canonical_pair(self) -> tuple:
        """Unordered endpoint identity: canonical names, sorted."""
        return tuple(sorted((canonical_name(self.end_a), canonical_name(self.end_b))))


@dataclass(frozen=True)
class Diagram:
    kind: DiagramKind
    nodes: tuple = ()
    relationships: tuple = ()
    # Provenance label only: excluded from equality so that printing and
    # reparsing a diagram yields an equal value.
    source_name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "relationships", tuple(self.relationships))

    def node(self, name: str) -> Node:
        canon = canonical_name(name)
        for n in self.nodes:
            if n.canonical == canon:
                return n
        raise KeyError(name)

    def node_names(self) -> list:
        return [n.name for n in self.nodes]


_ENTITY_ONLY = frozenset({NodeKind.ENTITY})
_CLASS_KINDS = frozenset(
    {NodeKind.CLASS, NodeKind.ABSTRACT_CLASS, NodeKind.INTERFACE, NodeKind.ENUM}
)


def _canonical_attributes(node: Node, diagram_kind: DiagramKind) -> tuple:
    attrs = list(node.attributes)
    if diagram_kind == DiagramKind.ER:
        # Primary-key attributes come first; within each group the sort is
        # stable, so equal canonical names keep their source order.
        attrs.sort(key=lambda a: (not a.is_key, a.canonical))
    else:
        attrs.sort(key=lambda a: a.canonical)
    seen = {}
    for a in attrs:
        if a.canonical in seen:
            raise DuplicateMemberError(
                f"attributes {seen[a.canonical]!r} and {a.name!r} collide "
                f"in node {node.name!r}"
            )
        seen[a.canonical] = a.name
    return tuple(attrs)


def _canonical_operations(node: Node) -> tuple:
    ops = sorted(node.operations, key=lambda o: (o.canonical, o.signature))
    seen = set()
    for o in ops:
        if o.signature in seen:
            raise DuplicateMemberError(
                f"duplicate operation signature {o.render()!r} in node {node.name!r}"
            )
        seen.add(o.signature)
    return tuple(ops)


def _canonical_relationship(rel: Relationship) -> Relationship:
    if rel.rel_kind in SYMMETRIC_KINDS:
        if canonical_name(rel.end_a) > canonical_name(rel.end_b):
            return replace(
                rel,
                end_a=rel.end_b,
                end_b=rel.end_a,
                multiplicity_a=rel.multiplicity_b,
                multiplicity_b=rel.multiplicity_a,
            )
    return rel


_REL_ORDER = {kind: i for i, kind in enumerate(RelKind)}


def _relationship_sort_key(rel: Relationship):
    return (
        _REL_ORDER[rel.rel_kind],
        canonical_name(rel.end_a),
        canonical_name(rel.end_b),
        rel.multiplicity_a is not None,
        rel.multiplicity_a or Multiplicity(0, 0),
        rel.multiplicity_b is not None,
        rel.multiplicity_b or Multiplicity(0, 0),
        rel.label or "",
    )


def canonicalize(diagram: Diagram) -> Diagram:
    """Return the canonical form of `diagram`; idempotent.

    Nodes are sorted by canonical name, members are sorted within each node,
    and symmetric relationships are endpoint-ordered. Raises
    DuplicateNodeError when two nodes collide after name canonicalization and
    InvalidDiagramError for dangling relationship endpoints or node kinds
    that do not fit the diagram kind.
    """
    allowed = _ENTITY_ONLY if diagram.kind == DiagramKind.ER else _CLASS_KINDS
    by_canon = {}
    for node in diagram.nodes:
        if node.node_kind not in allowed:
            raise InvalidDiagramError(
                f"node {node.name!r} of kind {node.node_kind.value} not allowed "
                f"in a {diagram.kind.value} diagram"
            )
        canon = node.canonical
        if canon in by_canon:
            raise DuplicateNodeError(
                f"nodes {by_canon[canon].name!r} and {node.name!r} collide on "
                f"canonical name {canon!r}"
            )
        by_canon[canon] = node

    nodes = tuple(
        replace(
            node,
            attributes=_canonical_attributes(node, diagram.kind),
            operations=_canonical_operations(node),
        )
        for node in sorted(diagram.nodes, key=lambda n: n.canonical)
    )

    rels = []
    for rel in diagram.relationships:
        for end in (rel.end_a, rel.end_b):
            if canonical_name(end) not in by_canon:
                raise InvalidDiagramError(
                    f"relationship endpoint {end!r} names no node in the diagram"
                )
        # Endpoints always store the declared node name.
        rel = replace(
            rel,
            end_a=by_canon[canonical_name(rel.end_a)].name,
            end_b=by_canon[canonical_name(rel.end_b)].name,
        )
        rels.append(_canonical_relationship(rel))
    rels.sort(key=_relationship_sort_key)

    return replace(diagram, nodes=nodes, relationships=tuple(rels))


# --- JSON serialization -----------------------------------------------------
# Stable field names; consumed by the store, the HTTP API, and the web UI.


def multiplicity_to_dict(m: Optional[Multiplicity]):
    if m is None:
        return None
    return {"min": m.min, "max": m.max}


def multiplicity_from_dict(d) -> Optional[Multiplicity]:
    if d is None:
        return None
    return Multiplicity(d["min"], d["max"])


def diagram_to_dict(diagram: Diagram) -> dict:
    return {
        "kind": diagram.kind.value,
        "source_name": diagram.source_name,
        "nodes": [
            {
                "name": n.name,
                "node_kind": n.node_kind.value,
                "attributes": [
                    {
                        "name": a.name,
                        "type_text": a.type_text,
                        "visibility": a.visibility.value,
                        "is_key": a.is_key,
                        "is_mandatory": a.is_mandatory,
                    }
                    for a in n.attributes
                ],
                "operations": [
                    {
                        "name": o.name,
                        "parameters": [
                            {"name": p, "type_text": t} for p, t in o.parameters
                        ],
                        "return_type": o.return_type,
                        "visibility": o.visibility.value,
                    }
                    for o in n.operations
                ],
            }
            for n in diagram.nodes
        ],
        "relationships": [
            {
                "rel_kind": r.rel_kind.value,
                "end_a": r.end_a,
                "end_b": r.end_b,
                "multiplicity_a": multiplicity_to_dict(r.multiplicity_a),
                "multiplicity_b": multiplicity_to_dict(r.multiplicity_b),
                "label": r.label,
            }
            for r in diagram.relationships
        ],
    }


def diagram_from_dict(data: dict) -> Diagram:
    nodes = tuple(
        Node(
            name=n["name"],
            node_kind=NodeKind(n["node_kind"]),
            attributes=tuple(
                Attribute(
                    name=a["name"],
                    type_text=a["type_text"],
                    visibility=Visibility(a["visibility"]),
                    is_key=a["is_key"],
                    is_mandatory=a["is_mandatory"],
                )
                for a in n["attributes"]
            ),
            operations=tuple(
                Operation(
                    name=o["name"],
                    parameters=tuple(
                        (p["name"], p["type_text"]) for p in o["parameters"]
                    ),
                    return_type=o["return_type"],
                    visibility=Visibility(o["visibility"]),
                )
                for o in n["operations"]
            ),
        )
        for n in data["nodes"]
    )
    rels = tuple(
        Relationship(
            rel_kind=RelKind(r["rel_kind"]),
            end_a=r["end_a"],
            end_b=r["end_b"],
            multiplicity_a=multiplicity_from_dict(r["multiplicity_a"]),
            multiplicity_b=multiplicity_from_dict(r["multiplicity_b"]),
            label=r["label"],
        )
        for r in data["relationships"]
    )
    return Diagram(
        kind=DiagramKind(data["kind"]),
        nodes=nodes,
        relationships=rels,
        source_name=data.get("source_name", ""),
    )
