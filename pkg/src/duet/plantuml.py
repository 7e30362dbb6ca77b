"""Parser and canonical printer for the supported PlantUML subset.

The subset covers class diagrams (class / abstract class / interface / enum
declarations, members with visibility prefixes, the seven arrow forms) and
ER diagrams (entity blocks with a primary-key separator and crow's-foot
relationship lines). Unsupported but recognized directives such as skinparam
or notes are skipped with a warning; anything else is a syntax error with a
line and column.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import (
    EmptyNameError,
    InvalidDiagramError,
    KindMismatchError,
    MissingEnclosureError,
    MixedKindsError,
    PlantUmlSyntaxError,
)
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


class DiagnosticSeverity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int  # 1-based into the original source text
    column: int  # 1-based
    message: str
    severity: DiagnosticSeverity = DiagnosticSeverity.ERROR

    def to_dict(self) -> dict:
        return {
            "line": self.line,
            "column": self.column,
            "message": self.message,
            "severity": self.severity.value,
        }


_VIS_BY_SYMBOL = {
    "+": Visibility.PUBLIC,
    "-": Visibility.PRIVATE,
    "#": Visibility.PROTECTED,
    "~": Visibility.PACKAGE,
}
_SYMBOL_BY_VIS = {v: k for k, v in _VIS_BY_SYMBOL.items()}
_SYMBOL_BY_VIS[Visibility.UNSPECIFIED] = ""

_DECL_RE = re.compile(
    r"^(abstract\s+class|class|interface|enum|entity)\s+(\w+)\s*(\{)?\s*$"
)
_DECL_KIND = {
    "class": NodeKind.CLASS,
    "abstract class": NodeKind.ABSTRACT_CLASS,
    "interface": NodeKind.INTERFACE,
    "enum": NodeKind.ENUM,
    "entity": NodeKind.ENTITY,
}

_ARROW_KIND = {
    "--|>": RelKind.INHERITANCE,
    "..|>": RelKind.REALIZATION,
    "-->": RelKind.DIRECTED_ASSOCIATION,
    "o--": RelKind.AGGREGATION,
    "*--": RelKind.COMPOSITION,
    "..>": RelKind.DEPENDENCY,
    "--": RelKind.ASSOCIATION,
}
_ARROW_BY_KIND = {v: k for k, v in _ARROW_KIND.items()}

# Kinds that may carry quoted multiplicities on their ends.
_MULT_KINDS = frozenset(
    {
        RelKind.ASSOCIATION,
        RelKind.DIRECTED_ASSOCIATION,
        RelKind.AGGREGATION,
        RelKind.COMPOSITION,
    }
)

_CLASS_REL_RE = re.compile(
    r"^(\w+)\s*(?:\"([^\"]+)\"\s*)?"
    r"(--\|>|\.\.\|>|-->|o--|\*--|\.\.>|--)"
    r"\s*(?:\"([^\"]+)\"\s*)?(\w+)\s*(?::\s*(.+))?$"
)

_CROW_TOKENS = {
    "||": Multiplicity(1, 1),
    "|o": Multiplicity(0, 1),
    "o|": Multiplicity(0, 1),
    "}|": Multiplicity(1, None),
    "|{": Multiplicity(1, None),
    "}o": Multiplicity(0, None),
    "o{": Multiplicity(0, None),
}
_CROW_RE = re.compile(
    r"^(\w+)\s*(\|\||\}o|o\{|\}\||\|\{|\|o|o\|)--(\|\||\}o|o\{|\}\||\|\{|\|o|o\|)"
    r"\s*(\w+)\s*(?::\s*(.+))?$"
)

_CLASS_MEMBER_RE = re.compile(r"^([+\-#~])?\s*(\w+)\s*(.*)$")
_ENTITY_MEMBER_RE = re.compile(r"^([+\-#~])?\s*(\*)?\s*(\w+)\s*(.*)$")
_PARAM_RE = re.compile(r"^(\w+)\s*(?::\s*(.+))?$")

# Recognized directives: skipped with a warning instead of failing, because
# machine-converted diagrams often carry styling the comparison cannot use.
_DIRECTIVE_PREFIXES = (
    "skinparam",
    "title",
    "caption",
    "header",
    "footer",
    "scale",
    "hide",
    "show",
    "left to right direction",
    "top to bottom direction",
)


@dataclass
class _RawRel:
    line: int
    column: int
    end_a: str
    end_b: str
    rel_kind: RelKind
    mult_a: Optional[Multiplicity] = None
    mult_b: Optional[Multiplicity] = None
    label: Optional[str] = None
    crow: bool = False


@dataclass
class _RawDecl:
    line: int
    column: int
    node_kind: NodeKind
    name: str
    attributes: list = field(default_factory=list)
    operations: list = field(default_factory=list)


@dataclass
class _Scan:
    decls: list = field(default_factory=list)
    rels: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    def error(self, line: int, column: int, message: str) -> None:
        self.diagnostics.append(
            ParseDiagnostic(line, column, message, DiagnosticSeverity.ERROR)
        )

    def warn(self, line: int, column: int, message: str) -> None:
        self.diagnostics.append(
            ParseDiagnostic(line, column, message, DiagnosticSeverity.WARNING)
        )

    @property
    def has_errors(self) -> bool:
        return any(d.severity == DiagnosticSeverity.ERROR for d in self.diagnostics)


def _split_params(text: str) -> list:
    """Split a parameter list on commas outside angle brackets."""
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth = max(0, depth - 1)
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts


def _parse_class_member(scan: _Scan, line_no: int, text: str):
    """Parse one member line of a class-like block into Attribute/Operation."""
    m = _CLASS_MEMBER_RE.match(text)
    if not m:
        scan.error(line_no, 1, f"malformed member line: {text!r}")
        return None
    vis_symbol, name, rest = m.groups()
    visibility = _VIS_BY_SYMBOL.get(vis_symbol, Visibility.UNSPECIFIED)
    rest = rest.strip()
    if not rest:
        return Attribute(name=name, visibility=visibility)
    if rest.startswith(":"):
        type_text = rest[1:].strip()
        if not type_text:
            scan.error(line_no, 1, f"missing type after ':' in member {name!r}")
            return None
        return Attribute(name=name, type_text=type_text, visibility=visibility)
    if rest.startswith("("):
        close = rest.rfind(")")
        if close < 0:
            scan.error(line_no, 1, f"unbalanced parentheses in operation {name!r}")
            return None
        params = []
        inner = rest[1:close].strip()
        if inner:
            for raw in _split_params(inner):
                pm = _PARAM_RE.match(raw.strip())
                if not pm:
                    scan.error(
                        line_no, 1, f"malformed parameter {raw.strip()!r} in {name!r}"
                    )
                    return None
                params.append((pm.group(1), pm.group(2)))
        tail = rest[close + 1 :].strip()
        return_type = None
        if tail:
            if not tail.startswith(":") or not tail[1:].strip():
                scan.error(
                    line_no, 1, f"expected ': ReturnType' after ')' in {name!r}"
                )
                return None
            return_type = tail[1:].strip()
        return Operation(
            name=name,
            parameters=tuple(params),
            return_type=return_type,
            visibility=visibility,
        )
    scan.error(
        line_no,
        1,
        f"expected ':', '(', or end of line after member name {name!r}",
    )
    return None


def _parse_entity_member(scan: _Scan, line_no: int, text: str, above_separator: bool):
    m = _ENTITY_MEMBER_RE.match(text)
    if not m:
        scan.error(line_no, 1, f"malformed entity attribute: {text!r}")
        return None
    vis_symbol, star, name, rest = m.groups()
    if vis_symbol:
        scan.warn(
            line_no, 1, f"visibility marker ignored on entity attribute {name!r}"
        )
    rest = rest.strip()
    type_text = None
    if rest.startswith("("):
        scan.error(line_no, 1, f"operations are not allowed in entities: {name!r}")
        return None
    if rest.startswith(":"):
        type_text = rest[1:].strip()
        if not type_text:
            scan.error(line_no, 1, f"missing type after ':' in attribute {name!r}")
            return None
    elif rest:
        scan.error(
            line_no, 1, f"expected ':' or end of line after attribute name {name!r}"
        )
        return None
    return Attribute(
        name=name,
        type_text=type_text,
        visibility=Visibility.UNSPECIFIED,
        is_key=above_separator,
        is_mandatory=star is not None,
    )


def _try_directive(scan: _Scan, lines, idx: int, stripped: str):
    """Skip recognized non-structural lines; returns the next index or None."""
    line_no = idx + 1
    lowered = stripped.lower()
    if stripped.startswith("'"):
        scan.warn(line_no, 1, "comment skipped")
        return idx + 1
    if stripped.startswith("!"):
        scan.warn(line_no, 1, "preprocessor directive skipped")
        return idx + 1
    if lowered.startswith("note"):
        if ":" in stripped:
            scan.warn(line_no, 1, "note skipped")
            return idx + 1
        scan.warn(line_no, 1, "note block skipped")
        j = idx + 1
        while j < len(lines) and lines[j].strip().lower() not in ("end note", "endnote"):
            j += 1
        if j >= len(lines):
            scan.error(line_no, 1, "unterminated note block")
            return len(lines)
        return j + 1
    if lowered.startswith("legend"):
        scan.warn(line_no, 1, "legend block skipped")
        j = idx + 1
        while j < len(lines) and lines[j].strip().lower() not in ("end legend", "endlegend"):
            j += 1
        if j >= len(lines):
            scan.error(line_no, 1, "unterminated legend block")
            return len(lines)
        return j + 1
    for prefix in _DIRECTIVE_PREFIXES:
        if lowered == prefix or lowered.startswith(prefix + " "):
            scan.warn(line_no, 1, f"directive '{prefix}' skipped")
            return idx + 1
    return None


def _scan_source(source: str) -> _Scan:
    """First pass: raw declarations, members, and relationship lines."""
    scan = _Scan()
    lines = source.splitlines()
    start = end = None
    for i, line in enumerate(lines):
        stripped = line.strip()
        if start is None and stripped.split(" ")[0] == "@startuml":
            start = i
        elif stripped == "@enduml":
            end = i
            break
    if start is None or end is None or end <= start:
        raise MissingEnclosureError("missing @startuml/@enduml enclosure")

    idx = start + 1
    open_decl: Optional[_RawDecl] = None
    entity_members: list = []  # (line_no, text) collected until the block closes
    while idx < end:
        raw_line = lines[idx]
        stripped = raw_line.strip()
        line_no = idx + 1
        if not stripped:
            idx += 1
            continue

        if open_decl is not None:
            if stripped == "}":
                if open_decl.node_kind == NodeKind.ENTITY:
                    _finish_entity_block(scan, open_decl, entity_members)
                open_decl = None
                entity_members = []
                idx += 1
                continue
            if open_decl.node_kind == NodeKind.ENTITY:
                entity_members.append((line_no, stripped))
            elif stripped == "--" or set(stripped) == {"-"} and len(stripped) >= 2:
                scan.warn(line_no, 1, "member group separator skipped")
            else:
                member = _parse_class_member(scan, line_no, stripped)
                if isinstance(member, Attribute):
                    open_decl.attributes.append((line_no, member))
                elif isinstance(member, Operation):
                    open_decl.operations.append((line_no, member))
            idx += 1
            continue

        decl = _DECL_RE.match(stripped)
        if decl:
            keyword = " ".join(decl.group(1).split())
            column = raw_line.index(stripped[0]) + 1
            raw = _RawDecl(line_no, column, _DECL_KIND[keyword], decl.group(2))
            scan.decls.append(raw)
            if decl.group(3):
                open_decl = raw
                entity_members = []
            idx += 1
            continue

        skipped_to = _try_directive(scan, lines, idx, stripped)
        if skipped_to is not None:
            idx = min(skipped_to, end)
            continue

        crow = _CROW_RE.match(stripped)
        if crow:
            end_a, tok_a, tok_b, end_b, label = crow.groups()
            scan.rels.append(
                _RawRel(
                    line_no,
                    raw_line.index(stripped[0]) + 1,
                    end_a,
                    end_b,
                    RelKind.ER_RELATIONSHIP,
                    _CROW_TOKENS[tok_a],
                    _CROW_TOKENS[tok_b],
                    label.strip() if label else None,
                    crow=True,
                )
            )
            idx += 1
            continue

        rel = _CLASS_REL_RE.match(stripped)
        if rel:
            end_a, mult_a, arrow, mult_b, end_b, label = rel.groups()
            kind = _ARROW_KIND[arrow]
            if (mult_a or mult_b) and kind not in _MULT_KINDS:
                scan.error(
                    line_no,
                    1,
                    f"multiplicities are not allowed on '{arrow}' relationships",
                )
                idx += 1
                continue
            try:
                parsed_a = _parse_mult(mult_a)
                parsed_b = _parse_mult(mult_b)
            except Exception as exc:
                scan.error(line_no, 1, str(exc))
                idx += 1
                continue
            scan.rels.append(
                _RawRel(
                    line_no,
                    raw_line.index(stripped[0]) + 1,
                    end_a,
                    end_b,
                    kind,
                    parsed_a,
                    parsed_b,
                    label.strip() if label else None,
                )
            )
            idx += 1
            continue

        scan.error(line_no, raw_line.index(stripped[0]) + 1,
                   f"unrecognized statement: {stripped!r}")
        idx += 1

    if open_decl is not None:
        scan.error(open_decl.line, open_decl.column,
                   f"unterminated block for {open_decl.name!r}")
    return scan


def _parse_mult(raw: Optional[str]) -> Optional[Multiplicity]:
    return canonical_multiplicity(raw) if raw else None


def _finish_entity_block(scan: _Scan, decl: _RawDecl, members: list) -> None:
    # Attributes above the first `--` separator form the primary key.
    separator_at = None
    for pos, (line_no, text) in enumerate(members):
        if text == "--":
            separator_at = pos
            break
    for pos, (line_no, text) in enumerate(members):
        if pos == separator_at:
            continue
        if text == "--":
            scan.warn(line_no, 1, "extra separator in entity block skipped")
            continue
        above = separator_at is not None and pos < separator_at
        attr = _parse_entity_member(scan, line_no, text, above)
        if attr is not None:
            decl.attributes.append((line_no, attr))


def _detect_kind(scan: _Scan) -> DiagramKind:
    er_decls = [d for d in scan.decls if d.node_kind == NodeKind.ENTITY]
    class_decls = [d for d in scan.decls if d.node_kind != NodeKind.ENTITY]
    crow_rels = [r for r in scan.rels if r.crow]
    if er_decls and class_decls:
        raise MixedKindsError(
            f"entity declaration at line {er_decls[0].line} conflicts with "
            f"class-style declaration at line {class_decls[0].line}"
        )
    if (er_decls or crow_rels) and not class_decls:
        return DiagramKind.ER
    return DiagramKind.CLASS


def detect_kind(source: str) -> DiagramKind:
    """Classify a source as a class diagram or an ER diagram.

    ER wins when entity declarations or crow's-foot relationships occur and
    no class-style declaration does; mixing both declaration families raises
    MixedKindsError.
    """
    return _detect_kind(_scan_source(source))


def parse_plantuml(source: str, expected_kind: Optional[DiagramKind] = None):
    """Parse `source` into a canonical Diagram plus diagnostics.

    Returns (diagram, diagnostics) on success, where diagnostics are all
    warnings. Raises PlantUmlSyntaxError (carrying every diagnostic),
    MissingEnclosureError, MixedKindsError, or KindMismatchError.
    """
    scan = _scan_source(source)
    kind = _detect_kind(scan)
    if expected_kind is not None and kind != expected_kind:
        raise KindMismatchError(
            f"expected a {expected_kind.value} diagram but detected {kind.value}"
        )

    default_node_kind = NodeKind.ENTITY if kind == DiagramKind.ER else NodeKind.CLASS
    nodes: dict = {}  # canonical name -> Node
    decl_lines: dict = {}
    for decl in scan.decls:
        try:
            canon = canonical_name(decl.name)
        except EmptyNameError:
            scan.error(decl.line, decl.column,
                       f"name {decl.name!r} is empty after canonicalization")
            continue
        if canon in nodes:
            scan.error(
                decl.line,
                decl.column,
                f"node {decl.name!r} collides with {nodes[canon].name!r} "
                f"(line {decl_lines[canon]}) after name canonicalization",
            )
            continue
        attributes = _unique_attributes(scan, decl)
        operations = _unique_operations(scan, decl)
        nodes[canon] = Node(
            name=decl.name,
            node_kind=decl.node_kind,
            attributes=attributes,
            operations=operations,
        )
        decl_lines[canon] = decl.line

    relationships = []
    for rel in scan.rels:
        if rel.crow and kind == DiagramKind.CLASS:
            scan.error(
                rel.line,
                rel.column,
                "crow's-foot relationships belong to ER diagrams",
            )
            continue
        if not rel.crow and kind == DiagramKind.ER:
            scan.error(
                rel.line,
                rel.column,
                "ER diagrams must use crow's-foot relationship syntax",
            )
            continue
        for endpoint in (rel.end_a, rel.end_b):
            try:
                canon = canonical_name(endpoint)
            except EmptyNameError:
                scan.error(rel.line, rel.column,
                           f"name {endpoint!r} is empty after canonicalization")
                continue
            if canon not in nodes:
                nodes[canon] = Node(name=endpoint, node_kind=default_node_kind)
                decl_lines[canon] = rel.line
                scan.warn(
                    rel.line,
                    rel.column,
                    f"implicit declaration of {endpoint!r} from relationship",
                )
        relationships.append(
            Relationship(
                rel_kind=rel.rel_kind,
                end_a=rel.end_a,
                end_b=rel.end_b,
                multiplicity_a=rel.mult_a,
                multiplicity_b=rel.mult_b,
                label=rel.label,
            )
        )

    if scan.has_errors:
        first = next(d for d in scan.diagnostics if d.severity == DiagnosticSeverity.ERROR)
        raise PlantUmlSyntaxError(
            f"line {first.line}: {first.message}", scan.diagnostics
        )

    diagram = canonicalize(
        Diagram(kind=kind, nodes=tuple(nodes.values()), relationships=tuple(relationships))
    )
    return diagram, scan.diagnostics


def _unique_attributes(scan: _Scan, decl: _RawDecl) -> tuple:
    seen: dict = {}
    kept = []
    for line_no, attr in decl.attributes:
        try:
            attr.canonical
        except EmptyNameError:
            scan.error(line_no, 1,
                       f"name {attr.name!r} is empty after canonicalization")
            continue
        if attr.canonical in seen:
            scan.error(
                line_no,
                1,
                f"attribute {attr.name!r} collides with {seen[attr.canonical]!r} "
                f"in {decl.name!r}",
            )
            continue
        seen[attr.canonical] = attr.name
        kept.append(attr)
    return tuple(kept)


def _unique_operations(scan: _Scan, decl: _RawDecl) -> tuple:
    seen: set = set()
    kept = []
    for line_no, op in decl.operations:
        try:
            op.signature
        except EmptyNameError:
            scan.error(line_no, 1,
                       f"name {op.name!r} is empty after canonicalization")
            continue
        if op.signature in seen:
            scan.error(
                line_no,
                1,
                f"duplicate operation signature {op.render()!r} in {decl.name!r}",
            )
            continue
        seen.add(op.signature)
        kept.append(op)
    return tuple(kept)


# --- canonical printing ------------------------------------------------------

_LEFT_CROW = {
    Multiplicity(1, 1): "||",
    Multiplicity(0, 1): "|o",
    Multiplicity(1, None): "}|",
    Multiplicity(0, None): "}o",
}
_RIGHT_CROW = {
    Multiplicity(1, 1): "||",
    Multiplicity(0, 1): "o|",
    Multiplicity(1, None): "|{",
    Multiplicity(0, None): "o{",
}

_DECL_KEYWORD = {
    NodeKind.CLASS: "class",
    NodeKind.ABSTRACT_CLASS: "abstract class",
    NodeKind.INTERFACE: "interface",
    NodeKind.ENUM: "enum",
    NodeKind.ENTITY: "entity",
}


def _print_class_member(member) -> str:
    symbol = _SYMBOL_BY_VIS[member.visibility]
    return f"  {symbol}{member.render()}"


def _print_entity_attribute(attr: Attribute) -> str:
    star = "*" if attr.is_mandatory else ""
    return f"  {star}{attr.render()}"


def _print_node(node: Node) -> list:
    header = f"{_DECL_KEYWORD[node.node_kind]} {node.name}"
    if not node.attributes and not node.operations:
        return [header]
    lines = [header + " {"]
    if node.node_kind == NodeKind.ENTITY:
        keys = [a for a in node.attributes if a.is_key]
        rest = [a for a in node.attributes if not a.is_key]
        lines += [_print_entity_attribute(a) for a in keys]
        if keys:
            lines.append("  --")
        lines += [_print_entity_attribute(a) for a in rest]
    else:
        lines += [_print_class_member(a) for a in node.attributes]
        lines += [_print_class_member(o) for o in node.operations]
    lines.append("}")
    return lines


def relationship_text(rel: Relationship) -> str:
    """Canonical one-line rendering of a relationship, label included."""
    if rel.rel_kind == RelKind.ER_RELATIONSHIP:
        try:
            left = _LEFT_CROW[rel.multiplicity_a]
            right = _RIGHT_CROW[rel.multiplicity_b]
        except KeyError:
            raise InvalidDiagramError(
                f"ER multiplicity {rel.multiplicity_a}/{rel.multiplicity_b} is not "
                "expressible in the crow's-foot subset"
            ) from None
        text = f"{rel.end_a} {left}--{right} {rel.end_b}"
    else:
        arrow = _ARROW_BY_KIND[rel.rel_kind]
        left = f'"{rel.multiplicity_a.text}" ' if rel.multiplicity_a else ""
        right = f'"{rel.multiplicity_b.text}" ' if rel.multiplicity_b else ""
        text = f"{rel.end_a} {left}{arrow} {right}{rel.end_b}"
    if rel.label:
        text += f" : {rel.label}"
    return text


def print_plantuml(diagram: Diagram) -> str:
    """Emit deterministic canonical PlantUML for a diagram.

    Reparsing the output yields a Diagram equal to canonicalize(diagram)
    with no error diagnostics. Two equal diagrams print byte-identically.
    """
    d = canonicalize(diagram)
    lines = ["@startuml"]
    for node in d.nodes:
        lines += _print_node(node)
    for rel in d.relationships:
        lines.append(relationship_text(rel))
    lines.append("@enduml")
    return "\n".join(lines)
