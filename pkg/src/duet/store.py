"""Append-only persistence for references and submissions, plus aggregation.

Records live in two JSON Lines files, one object per line with a trailing
crc32 field computed over the canonical serialization of the rest of the
object. A truncated or garbled final line (the typical crash artifact) is
skipped with a warning; corruption anywhere else raises, because it means
the file was damaged after the fact. Writes go through one lock: the store
follows a single-writer, many-readers contract.
"""
from __future__ import annotations

import json
import logging
import random
import threading
import time
import zlib
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .diffing import Category, DiffReport
from .errors import CorruptRecordError, UnknownReferenceError
from .feedback import FeedbackBundle, bundle_from_dict
from .misconceptions import MisconceptionTag, TagCode, tag_from_dict
from .model import DiagramKind
from .plantuml import parse_plantuml

log = logging.getLogger("duet.store")

_CROCKFORD = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"


def _base32(value: int, length: int) -> str:
    chars = []
    for _ in range(length):
        chars.append(_CROCKFORD[value & 31])
        value >>= 5
    return "".join(reversed(chars))


class UlidFactory:
    """Sortable 26-character ids: 48-bit millisecond timestamp + 80 random bits.

    Ids are strictly increasing per factory instance; a deterministic clock
    and rng give a reproducible sequence.
    """

    def __init__(self, clock=time.time, rng: Optional[random.Random] = None):
        self._clock = clock
        self._rng = rng or random.SystemRandom()
        self._lock = threading.Lock()
        self._last = (0, 0)  # (milliseconds, randomness)

    def __call__(self) -> str:
        with self._lock:
            ms = int(self._clock() * 1000) & ((1 << 48) - 1)
            last_ms, last_rand = self._last
            if ms <= last_ms:
                ms = last_ms
                rand = last_rand + 1  # same tick: bump to stay monotonic
            else:
                rand = self._rng.getrandbits(80)
            self._last = (ms, rand)
        return _base32(ms, 10) + _base32(rand, 16)


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class ReferenceRecord:
    id: str
    name: str
    kind: DiagramKind
    plantuml: str
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "kind": self.kind.value,
            "plantuml": self.plantuml,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReferenceRecord":
        return cls(
            id=data["id"],
            name=data["name"],
            kind=DiagramKind(data["kind"]),
            plantuml=data["plantuml"],
            created_at=data["created_at"],
        )


@dataclass(frozen=True)
class SubmissionRecord:
    id: str
    reference_id: str
    student_plantuml: str
    diff_report: DiffReport
    tags: tuple
    feedback: FeedbackBundle
    created_at: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(self.tags))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "reference_id": self.reference_id,
            "student_plantuml": self.student_plantuml,
            "diff_report": self.diff_report.to_dict(),
            "tags": [t.to_dict() for t in self.tags],
            "feedback": self.feedback.to_dict(),
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SubmissionRecord":
        return cls(
            id=data["id"],
            reference_id=data["reference_id"],
            student_plantuml=data["student_plantuml"],
            diff_report=DiffReport.from_dict(data["diff_report"]),
            tags=tuple(tag_from_dict(t) for t in data["tags"]),
            feedback=bundle_from_dict(data["feedback"]),
            created_at=data["created_at"],
        )


@dataclass(frozen=True)
class MisconceptionStats:
    reference_id: str
    total_submissions: int
    counts: dict  # TagCode value -> occurrences
    per_category: dict  # Category value -> differences

    def to_dict(self) -> dict:
        return {
            "reference_id": self.reference_id,
            "total_submissions": self.total_submissions,
            "counts": dict(self.counts),
            "per_category": dict(self.per_category),
        }


def tag_occurrences(tag: MisconceptionTag) -> int:
    """Additive unit for analytics: one per contributing difference, with a
    floor of one for tags that reference no report (cross-model checks)."""
    return max(len(tag.difference_refs), 1)


def _checksum(payload: dict) -> int:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return zlib.crc32(canonical.encode("utf-8"))


class Store:
    """JSONL-backed store for reference and submission records."""

    def __init__(self, directory, id_factory=None, clock=None):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._references_path = self.directory / "references.jsonl"
        self._submissions_path = self.directory / "submissions.jsonl"
        self._new_id = id_factory or UlidFactory()
        self._clock = clock or utc_now
        self._write_lock = threading.Lock()

    # -- low-level lines -------------------------------------------------

    def _append(self, path: Path, payload: dict) -> None:
        line_object = dict(payload)
        line_object["crc32"] = _checksum(payload)
        with self._write_lock:
            with open(path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(line_object, separators=(",", ":")) + "\n")
                handle.flush()

    @staticmethod
    def _iter_payloads(path: Path):
        if not path.exists():
            return
        lines = path.read_text(encoding="utf-8").splitlines()
        last_index = len(lines) - 1
        for index, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                stored_crc = obj.pop("crc32")
                if stored_crc != _checksum(obj):
                    raise ValueError("checksum mismatch")
            except (ValueError, KeyError) as exc:
                if index == last_index:
                    log.warning(
                        "skipping truncated or garbled final line in %s: %s",
                        path.name,
                        exc,
                    )
                    continue
                raise CorruptRecordError(
                    f"{path.name} line {index + 1}: {exc}"
                ) from exc
            yield obj

    # -- references -------------------------------------------------------

    def put_reference(self, record: ReferenceRecord) -> str:
        """Validate, stamp, and append a reference; returns the assigned id."""
        parse_plantuml(record.plantuml, expected_kind=record.kind)
        record = replace(
            record,
            id=record.id or self._new_id(),
            created_at=record.created_at or self._clock(),
        )
        self._append(self._references_path, record.to_dict())
        return record.id

    def get_reference(self, reference_id: str) -> ReferenceRecord:
        for payload in self._iter_payloads(self._references_path):
            if payload["id"] == reference_id:
                return ReferenceRecord.from_dict(payload)
        raise UnknownReferenceError(f"no reference with id {reference_id!r}")

    def list_references(self) -> list:
        return [
            ReferenceRecord.from_dict(p)
            for p in self._iter_payloads(self._references_path)
        ]

    # -- submissions ------------------------------------------------------

    def put_submission(self, record: SubmissionRecord) -> str:
        self.get_reference(record.reference_id)  # raises UnknownReferenceError
        record = replace(
            record,
            id=record.id or self._new_id(),
            created_at=record.created_at or self._clock(),
        )
        self._append(self._submissions_path, record.to_dict())
        return record.id

    def get_submission(self, submission_id: str) -> SubmissionRecord:
        for payload in self._iter_payloads(self._submissions_path):
            if payload["id"] == submission_id:
                return SubmissionRecord.from_dict(payload)
        raise UnknownReferenceError(f"no submission with id {submission_id!r}")

    def list_submissions(self, reference_id: str) -> list:
        self.get_reference(reference_id)
        records = [
            SubmissionRecord.from_dict(p)
            for p in self._iter_payloads(self._submissions_path)
            if p["reference_id"] == reference_id
        ]
        records.sort(key=lambda r: r.id)
        return records

    # -- analytics ----------------------------------------------------------

    def aggregate(self, reference_id: str) -> MisconceptionStats:
        """Tag and category counts summed over all submissions for a reference."""
        submissions = self.list_submissions(reference_id)
        counts = {code.value: 0 for code in TagCode}
        per_category = {category.value: 0 for category in Category}
        for submission in submissions:
            for tag in submission.tags:
                counts[tag.code.value] += tag_occurrences(tag)
            for difference in submission.diff_report.differences:
                per_category[difference.category.value] += 1
        return MisconceptionStats(
            reference_id=reference_id,
            total_submissions=len(submissions),
            counts=counts,
            per_category=per_category,
        )

    def purge(self) -> list:
        """Delete both record files; returns the paths that existed."""
        removed = []
        with self._write_lock:
            for path in (self._references_path, self._submissions_path):
                if path.exists():
                    path.unlink()
                    removed.append(str(path))
        return removed
