"""Rendering of difference reports into audience-specific Markdown feedback.

Two documents come out of every report: reflective hints for the student and
a complete account for the educator. Student hints never judge and never
reveal what a missing element is called; the educator document names
everything and closes with a misconception summary.

Hint templates live in external files, one per (audience, category, change)
key, so instructors can re-word feedback without touching code.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional

from .diffing import Category, ChangeKind, DiffReport, Difference
from .errors import MissingTemplateError
from .resources import templates_root

DEFAULT_LEXICON = ("wrong", "incorrect", "mistake", "error", "bad", "fail", "failed")

STUDENT_TITLE = "# Feedback on your diagram"
EDUCATOR_TITLE = "# Educator insights"
NO_DIFFERENCES_STUDENT = (
    "No structural differences were found between your diagram and the "
    "reference solution."
)
NO_DIFFERENCES_EDUCATOR = (
    "No structural differences were found between the submission and the "
    "reference solution."
)
MISCONCEPTIONS_SECTION = "misconceptions"
REDACTED_NODE = "another concept"

_HEADINGS = {
    Category.CLASSES: "Classes",
    Category.ENTITIES: "Entities",
    Category.ATTRIBUTES: "Attributes",
    Category.OPERATIONS: "Operations",
    Category.RELATIONSHIPS: "Relationships",
    Category.MULTIPLICITIES: "Multiplicities",
    Category.VISIBILITY: "Visibility",
    Category.INHERITANCE: "Inheritance",
}
# Fixed display order of the feedback sections.
CATEGORY_ORDER = (
    Category.CLASSES,
    Category.ENTITIES,
    Category.ATTRIBUTES,
    Category.OPERATIONS,
    Category.RELATIONSHIPS,
    Category.MULTIPLICITIES,
    Category.VISIBILITY,
    Category.INHERITANCE,
)

_NODE_CATEGORIES = (Category.CLASSES, Category.ENTITIES)
_RELATIONAL_CATEGORIES = (
    Category.RELATIONSHIPS,
    Category.MULTIPLICITIES,
    Category.INHERITANCE,
)

_PLACEHOLDER = re.compile(r"\{(\w+)\}")
_ALLOWED_PLACEHOLDERS = frozenset({"subject", "expected", "found"})


class Audience(str, Enum):
    STUDENT = "student"
    EDUCATOR = "educator"


@dataclass(frozen=True)
class Section:
    category: str  # Category value, or "misconceptions" for the tag summary
    audience: Audience
    hints: tuple

    def __post_init__(self):
        object.__setattr__(self, "hints", tuple(self.hints))

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "audience": self.audience.value,
            "hints": list(self.hints),
        }


@dataclass(frozen=True)
class FeedbackBundle:
    student_markdown: str
    educator_markdown: str
    sections: tuple
    warnings: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "sections", tuple(self.sections))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def to_dict(self) -> dict:
        return {
            "student_markdown": self.student_markdown,
            "educator_markdown": self.educator_markdown,
            "sections": [s.to_dict() for s in self.sections],
            "warnings": list(self.warnings),
        }


def bundle_from_dict(data: dict) -> FeedbackBundle:
    return FeedbackBundle(
        student_markdown=data["student_markdown"],
        educator_markdown=data["educator_markdown"],
        sections=tuple(
            Section(
                category=s["category"],
                audience=Audience(s["audience"]),
                hints=tuple(s["hints"]),
            )
            for s in data["sections"]
        ),
        warnings=tuple(data.get("warnings", ())),
    )


class TemplateSet:
    """Hint templates keyed by (audience, category, change) plus the lexicon."""

    def __init__(self, patterns: dict, lexicon=DEFAULT_LEXICON):
        self._patterns = dict(patterns)
        self.lexicon = tuple(lexicon)

    @classmethod
    def from_directory(cls, directory, lexicon=DEFAULT_LEXICON) -> "TemplateSet":
        """Load `<audience>.<category>.<change>.tmpl` files from a directory."""
        directory = Path(directory)
        patterns: dict = {}
        for path in sorted(directory.glob("*.tmpl")):
            parts = path.name[: -len(".tmpl")].split(".")
            if len(parts) != 3:
                continue
            audience, category, change = parts
            try:
                key = (Audience(audience), Category(category), ChangeKind(change))
            except ValueError:
                continue
            pattern = path.read_text(encoding="utf-8").strip()
            for placeholder in _PLACEHOLDER.findall(pattern):
                if placeholder not in _ALLOWED_PLACEHOLDERS:
                    raise ValueError(
                        f"template {path.name} uses unknown placeholder "
                        f"{{{placeholder}}}"
                    )
            patterns[key] = pattern
        return cls(patterns, lexicon)

    def pattern(self, audience: Audience, category: Category, change: ChangeKind) -> str:
        key = (audience, category, change)
        if key not in self._patterns:
            raise MissingTemplateError(
                f"no template for {audience.value}.{category.value}.{change.value}"
            )
        return self._patterns[key]


_default_templates: Optional[TemplateSet] = None

ENV_LEXICON_FILE = "DUET_LEXICON_FILE"


def default_templates() -> TemplateSet:
    """Template set shipped with the package, honoring the DUET_TEMPLATES_DIR
    and DUET_LEXICON_FILE overrides."""
    global _default_templates
    if _default_templates is None:
        lexicon_file = os.environ.get(ENV_LEXICON_FILE)
        lexicon = load_lexicon(lexicon_file) if lexicon_file else DEFAULT_LEXICON
        _default_templates = TemplateSet.from_directory(
            templates_root() / "feedback", lexicon
        )
    return _default_templates


def load_lexicon(path) -> tuple:
    """Read a judgment lexicon file: one token per line, blanks skipped."""
    tokens = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        token = line.strip()
        if token:
            tokens.append(token)
    return tuple(tokens)


def check_neutrality(markdown: str, lexicon=DEFAULT_LEXICON) -> list:
    """Whole-word, case-insensitive scan for judgment tokens.

    Returns (token, character offset) pairs; empty means compliant.
    """
    violations = []
    for token in lexicon:
        for hit in re.finditer(rf"\b{re.escape(token)}\b", markdown, re.IGNORECASE):
            violations.append((token, hit.start()))
    violations.sort(key=lambda pair: (pair[1], pair[0]))
    return violations


def _student_subject(difference: Difference, report: DiffReport) -> str:
    """Student-facing subject: reference names mapped to the student's own
    spellings, and names the student has never seen redacted."""
    category = difference.category
    subject = difference.subject

    def student_name(ref_name: str, redact: bool) -> str:
        mapped = report.matching.student_for(ref_name)
        if mapped is not None:
            return mapped
        if ref_name in {s for _, s, _ in report.matching.pairs} or (
            ref_name in report.matching.unmatched_student
        ):
            return ref_name  # already a student-side name
        return REDACTED_NODE if redact else ref_name

    if category in _RELATIONAL_CATEGORIES and "--" in subject:
        redact = difference.change == ChangeKind.MISSING
        a, _, b = subject.partition("--")
        return f"{student_name(a, redact)} and {student_name(b, redact)}"
    if category in (Category.ATTRIBUTES, Category.OPERATIONS, Category.VISIBILITY):
        node, dot, member = subject.partition(".")
        if difference.change == ChangeKind.MISSING:
            return student_name(node, redact=False)
        return f"{student_name(node, redact=False)}{dot}{member}"
    if category in _NODE_CATEGORIES and difference.change == ChangeKind.MODIFIED:
        return student_name(subject, redact=False)
    return subject


def _fill(pattern: str, subject: str, expected, found) -> str:
    return pattern.format(
        subject=subject, expected=expected or "", found=found or ""
    )


def _render_hint(
    templates: TemplateSet,
    audience: Audience,
    difference: Difference,
    report: DiffReport,
) -> str:
    pattern = templates.pattern(audience, difference.category, difference.change)
    if audience == Audience.STUDENT:
        # Students get their own spellings and never the reference values.
        subject = _student_subject(difference, report)
        return _fill(pattern, subject, "", difference.found)
    return _fill(pattern, difference.subject, difference.expected, difference.found)


def _compose(title: str, empty_text: str, sections: list) -> str:
    if not sections:
        return f"{title}\n\n{empty_text}"
    parts = [title]
    for heading, body in sections:
        parts.append(f"## {heading}")
        parts.append(body)
    return "\n\n".join(parts)


def _misconception_lines(tags) -> list:
    lines = []
    for tag in tags:
        count = max(len(tag.difference_refs), 1)
        lines.append(f"- {tag.code.value} x{count}: {tag.explanation}")
    return lines


def render_feedback(report: DiffReport, tags, templates: Optional[TemplateSet] = None) -> FeedbackBundle:
    """Render a difference report into the two Markdown documents.

    Deterministic: identical inputs produce byte-identical Markdown. Raises
    MissingTemplateError when the template set lacks a needed key.
    """
    templates = templates or default_templates()
    by_category: dict = {}
    for difference in report.differences:
        by_category.setdefault(difference.category, []).append(difference)

    sections: list = []
    student_parts: list = []
    educator_parts: list = []
    for category in CATEGORY_ORDER:
        differences = by_category.get(category)
        if not differences:
            continue
        heading = _HEADINGS[category]
        student_hints = [
            _render_hint(templates, Audience.STUDENT, d, report) for d in differences
        ]
        educator_hints = [
            _render_hint(templates, Audience.EDUCATOR, d, report) for d in differences
        ]
        sections.append(Section(category.value, Audience.STUDENT, tuple(student_hints)))
        sections.append(
            Section(category.value, Audience.EDUCATOR, tuple(educator_hints))
        )
        student_parts.append((heading, "\n".join(f"- {h}" for h in student_hints)))
        educator_parts.append((heading, "\n".join(f"- {h}" for h in educator_hints)))

    tag_lines = _misconception_lines(tags)
    if tag_lines:
        sections.append(
            Section(MISCONCEPTIONS_SECTION, Audience.EDUCATOR, tuple(tag_lines))
        )
        educator_parts.append(("Misconceptions", "\n".join(tag_lines)))

    return FeedbackBundle(
        student_markdown=_compose(STUDENT_TITLE, NO_DIFFERENCES_STUDENT, student_parts),
        educator_markdown=_compose(
            EDUCATOR_TITLE, NO_DIFFERENCES_EDUCATOR, educator_parts
        ),
        sections=tuple(sections),
        warnings=(),
    )


def _section_heading(section: Section) -> str:
    if section.category == MISCONCEPTIONS_SECTION:
        return "Misconceptions"
    return _HEADINGS[Category(section.category)]


def _recompose(bundle: FeedbackBundle, bodies: dict) -> FeedbackBundle:
    """Rebuild both documents from (possibly replaced) section bodies."""
    student_parts = []
    educator_parts = []
    for section in bundle.sections:
        key = (section.category, section.audience)
        body = bodies.get(key, "\n".join(f"- {h}" for h in section.hints))
        part = (_section_heading(section), body)
        if section.audience == Audience.STUDENT:
            student_parts.append(part)
        else:
            educator_parts.append(part)
    return replace(
        bundle,
        student_markdown=_compose(
            STUDENT_TITLE, NO_DIFFERENCES_STUDENT, student_parts
        ),
        educator_markdown=_compose(
            EDUCATOR_TITLE, NO_DIFFERENCES_EDUCATOR, educator_parts
        ),
    )


def paraphrase_feedback(bundle: FeedbackBundle, gateway, templates: Optional[TemplateSet] = None) -> FeedbackBundle:
    """Re-word each hint section through the text-generation gateway.

    Offline gateways pass the bundle through unchanged. A paraphrase that
    violates the neutrality lexicon is dropped in favor of the deterministic
    original, with a warning recorded on the returned bundle. Transport
    failures propagate, naming the section that was being processed; the
    input bundle is never modified.
    """
    if gateway.config.offline:
        return bundle
    templates = templates or default_templates()
    lexicon = templates.lexicon
    bodies: dict = {}
    warnings = list(bundle.warnings)
    new_sections = []
    for section in bundle.sections:
        if section.category == MISCONCEPTIONS_SECTION:
            new_sections.append(section)
            continue
        original_body = "\n".join(f"- {h}" for h in section.hints)
        prompt_key = f"paraphrase.{section.audience.value}"
        prompt = gateway.load_prompt_template(prompt_key)
        try:
            rewritten = gateway.generate_text(f"{prompt}\n\n{original_body}")
        except Exception as exc:
            raise type(exc)(
                f"section {section.audience.value}/{section.category}: {exc}"
            ) from exc
        violations = check_neutrality(rewritten, lexicon)
        if violations:
            tokens = ", ".join(sorted({t for t, _ in violations}))
            warnings.append(
                f"paraphrase for {section.audience.value}/{section.category} "
                f"discarded: judgment token(s) {tokens}"
            )
            new_sections.append(section)
            continue
        bodies[(section.category, section.audience)] = rewritten
        new_sections.append(replace(section, hints=(rewritten,)))
    result = replace(bundle, sections=tuple(new_sections), warnings=tuple(warnings))
    return _recompose(result, bodies)
