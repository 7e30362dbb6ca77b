"""End-to-end comparison pipeline shared by the HTTP API and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .diffing import DiffReport, diff
from .feedback import FeedbackBundle, TemplateSet, render_feedback
from .matching import DEFAULT_THRESHOLD, match_nodes
from .misconceptions import classify
from .model import Diagram, DiagramKind
from .plantuml import parse_plantuml


@dataclass(frozen=True)
class CompareResult:
    reference: Diagram
    student: Diagram
    report: DiffReport
    tags: tuple
    feedback: FeedbackBundle

    def to_dict(self) -> dict:
        return {
            "diff_report": self.report.to_dict(),
            "tags": [t.to_dict() for t in self.tags],
            "feedback": self.feedback.to_dict(),
        }


def compare_diagrams(
    reference: Diagram,
    student: Diagram,
    threshold: float = DEFAULT_THRESHOLD,
    templates: Optional[TemplateSet] = None,
) -> CompareResult:
    """Match, diff, classify, and render feedback for two parsed diagrams."""
    matching = match_nodes(reference, student, threshold)
    report = diff(reference, student, matching)
    tags = classify(report)
    feedback = render_feedback(report, tags, templates)
    return CompareResult(
        reference=reference,
        student=student,
        report=report,
        tags=tuple(tags),
        feedback=feedback,
    )


def compare_sources(
    reference_source: str,
    student_source: str,
    reference_name: str = "reference",
    student_name: str = "student",
    expected_kind: Optional[DiagramKind] = None,
    threshold: float = DEFAULT_THRESHOLD,
    templates: Optional[TemplateSet] = None,
) -> CompareResult:
    """Parse two PlantUML sources and run the comparison pipeline.

    The student source must be of the same kind as the reference; a
    mismatch raises KindMismatchError before any comparison happens.
    """
    reference, _ = parse_plantuml(reference_source, expected_kind)
    student, _ = parse_plantuml(student_source, expected_kind=reference.kind)
    reference = replace(reference, source_name=reference_name)
    student = replace(student, source_name=student_name)
    return compare_diagrams(reference, student, threshold, templates)
