import json
import random

import pytest

from duet.diffing import Category, diff
from duet.errors import CorruptRecordError, PlantUmlSyntaxError, UnknownReferenceError
from duet.feedback import render_feedback
from duet.matching import match_nodes
from duet.misconceptions import classify
from duet.model import DiagramKind
from duet.plantuml import parse_plantuml, print_plantuml
from duet.store import (
    MisconceptionStats,
    ReferenceRecord,
    Store,
    SubmissionRecord,
    UlidFactory,
    tag_occurrences,
)

from diagram_gen import generate_diagram

REF_SOURCE = "@startuml\nclass A {\n +x : int\n}\nclass B\nA -- B\n@enduml"


def _submission_record(reference_id, stu_source):
    reference, _ = parse_plantuml(REF_SOURCE)
    student, _ = parse_plantuml(stu_source)
    report = diff(reference, student, match_nodes(reference, student))
    tags = classify(report)
    return SubmissionRecord(
        id="",
        reference_id=reference_id,
        student_plantuml=stu_source,
        diff_report=report,
        tags=tuple(tags),
        feedback=render_feedback(report, tags),
    )


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "store")


class TestUlids:
    def test_sortable_and_unique(self):
        factory = UlidFactory()
        ids = [factory() for _ in range(500)]
        assert ids == sorted(ids)
        assert len(set(ids)) == 500
        assert all(len(i) == 26 for i in ids)

    def test_deterministic_with_fixed_clock_and_rng(self):
        make = lambda: UlidFactory(clock=lambda: 0.0, rng=random.Random(7))
        assert [make()() for _ in range(3)] == [make()() for _ in range(3)]


class TestReferences:
    def test_put_then_get_round_trip(self, store):
        record = ReferenceRecord(
            id="", name="demo", kind=DiagramKind.CLASS, plantuml=REF_SOURCE
        )
        reference_id = store.put_reference(record)
        loaded = store.get_reference(reference_id)
        assert loaded.plantuml == REF_SOURCE
        assert loaded.name == "demo"
        assert loaded.created_at

    def test_get_unknown(self, store):
        with pytest.raises(UnknownReferenceError):
            store.get_reference("nope")

    def test_invalid_plantuml_rejected(self, store):
        record = ReferenceRecord(
            id="", name="broken", kind=DiagramKind.CLASS, plantuml="@startuml\nclass A {\n x y\n}\n@enduml"
        )
        with pytest.raises(PlantUmlSyntaxError):
            store.put_reference(record)


class TestSubmissions:
    def test_round_trip_equality(self, store):
        reference_id = store.put_reference(
            ReferenceRecord(id="", name="r", kind=DiagramKind.CLASS, plantuml=REF_SOURCE)
        )
        record = _submission_record(
            reference_id, "@startuml\nclass A {\n +x : Float\n}\nclass B\nA -- B\n@enduml"
        )
        submission_id = store.put_submission(record)
        loaded = store.get_submission(submission_id)
        assert loaded.diff_report == record.diff_report
        assert loaded.tags == record.tags
        assert loaded.feedback == record.feedback
        assert loaded.student_plantuml == record.student_plantuml

    def test_unknown_reference_rejected(self, store):
        record = _submission_record("missing-ref", REF_SOURCE)
        with pytest.raises(UnknownReferenceError):
            store.put_submission(record)

    def test_list_in_id_order(self, store):
        reference_id = store.put_reference(
            ReferenceRecord(id="", name="r", kind=DiagramKind.CLASS, plantuml=REF_SOURCE)
        )
        for _ in range(3):
            store.put_submission(_submission_record(reference_id, REF_SOURCE))
        records = store.list_submissions(reference_id)
        assert len(records) == 3
        assert [r.id for r in records] == sorted(r.id for r in records)


class TestCrashSafety:
    def test_truncated_final_line_skipped_with_warning(self, store, caplog):
        reference_id = store.put_reference(
            ReferenceRecord(id="", name="r", kind=DiagramKind.CLASS, plantuml=REF_SOURCE)
        )
        path = store.directory / "references.jsonl"
        with open(path, "a", encoding="utf-8") as handle:
            handle.write('{"id": "half-writ')
        with caplog.at_level("WARNING", logger="duet.store"):
            records = store.list_references()
        assert [r.id for r in records] == [reference_id]
        assert any("truncated" in r.getMessage() for r in caplog.records)

    def test_tampered_middle_line_raises(self, store):
        for name in ("one", "two"):
            store.put_reference(
                ReferenceRecord(id="", name=name, kind=DiagramKind.CLASS, plantuml=REF_SOURCE)
            )
        path = store.directory / "references.jsonl"
        lines = path.read_text().splitlines()
        doctored = json.loads(lines[0])
        doctored["name"] = "altered"
        lines[0] = json.dumps(doctored, separators=(",", ":"))
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorruptRecordError):
            store.list_references()


class TestAggregate:
    def test_zero_submissions(self, store):
        reference_id = store.put_reference(
            ReferenceRecord(id="", name="r", kind=DiagramKind.CLASS, plantuml=REF_SOURCE)
        )
        stats = store.aggregate(reference_id)
        assert stats.total_submissions == 0
        assert all(v == 0 for v in stats.counts.values())
        assert all(v == 0 for v in stats.per_category.values())

    def test_additivity(self, store):
        reference_id = store.put_reference(
            ReferenceRecord(id="", name="r", kind=DiagramKind.CLASS, plantuml=REF_SOURCE)
        )
        mutated = "@startuml\nclass A {\n +x : Float\n}\nclass B\nA -- B\n@enduml"
        for _ in range(2):
            store.put_submission(_submission_record(reference_id, mutated))
        stats = store.aggregate(reference_id)
        assert stats.total_submissions == 2
        assert stats.counts["AttrError"] == 2
        assert stats.per_category[Category.ATTRIBUTES.value] == 2

    def test_matches_brute_force_recount(self, store):
        reference_id = store.put_reference(
            ReferenceRecord(id="", name="r", kind=DiagramKind.CLASS, plantuml=REF_SOURCE)
        )
        sources = [
            REF_SOURCE,
            "@startuml\nclass A {\n +x : Float\n}\nclass B\nA -- B\n@enduml",
            "@startuml\nclass A {\n -x : int\n}\nclass B\n@enduml",
            "@startuml\nclass A {\n +x : int\n}\nclass B\nclass C\nA o-- B\n@enduml",
        ]
        for source in sources:
            store.put_submission(_submission_record(reference_id, source))
        stats = store.aggregate(reference_id)

        # independent recount straight from the JSONL file
        raw_lines = (store.directory / "submissions.jsonl").read_text().splitlines()
        counts: dict = {}
        per_category: dict = {}
        total = 0
        for line in raw_lines:
            payload = json.loads(line)
            if payload["reference_id"] != reference_id:
                continue
            total += 1
            for tag in payload["tags"]:
                occurrences = max(len(tag["difference_refs"]), 1)
                counts[tag["code"]] = counts.get(tag["code"], 0) + occurrences
            for difference in payload["diff_report"]["differences"]:
                per_category[difference["category"]] = (
                    per_category.get(difference["category"], 0) + 1
                )
        assert stats.total_submissions == total
        for code, value in stats.counts.items():
            assert value == counts.get(code, 0)
        for category, value in stats.per_category.items():
            assert value == per_category.get(category, 0)

    def test_unknown_reference(self, store):
        with pytest.raises(UnknownReferenceError):
            store.aggregate("ghost")


def test_purge_removes_files(store):
    reference_id = store.put_reference(
        ReferenceRecord(id="", name="r", kind=DiagramKind.CLASS, plantuml=REF_SOURCE)
    )
    assert store.purge()
    with pytest.raises(UnknownReferenceError):
        store.get_reference(reference_id)
    assert store.purge() == []
