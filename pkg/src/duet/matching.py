"""Name similarity and optimal element matching between two diagrams.

Similarity is normalized Levenshtein distance over canonical names, carried
as exact fractions so that assignment totals compare without rounding. The
matcher solves a maximum-total assignment restricted to pairs at or above
the threshold; ties between equal-total assignments are broken toward the
lexicographically smallest (reference name, student name) pair list, which
makes every matching reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .errors import KindMismatchError
from .model import Diagram, canonical_name

DEFAULT_THRESHOLD = 0.6


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit insert/delete/substitute costs."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    current[j - 1] + 1,
                    previous[j] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def similarity_fraction(a: str, b: str) -> Fraction:
    """Exact similarity of two raw names: 1 - distance / max canonical length."""
    ca, cb = canonical_name(a), canonical_name(b)
    longest = max(len(ca), len(cb))
    return 1 - Fraction(levenshtein(ca, cb), longest)


def name_similarity(a: str, b: str) -> float:
    """Similarity in [0, 1]; equals 1 exactly when canonical names are equal."""
    return float(similarity_fraction(a, b))


@dataclass(frozen=True)
class Matching:
    """Injective pairing of reference names to student names with scores."""

    pairs: tuple  # tuple of (reference name, student name, float score)
    unmatched_reference: tuple
    unmatched_student: tuple
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        object.__setattr__(
            self, "unmatched_reference", tuple(self.unmatched_reference)
        )
        object.__setattr__(self, "unmatched_student", tuple(self.unmatched_student))

    def student_for(self, reference: str) -> Optional[str]:
        for ref, stu, _ in self.pairs:
            if ref == reference:
                return stu
        return None

    def reference_for(self, student: str) -> Optional[str]:
        for ref, stu, _ in self.pairs:
            if stu == student:
                return ref
        return None

    def to_dict(self) -> dict:
        return {
            "pairs": [
                {"reference": r, "student": s, "score": score}
                for r, s, score in self.pairs
            ],
            "unmatched_reference": list(self.unmatched_reference),
            "unmatched_student": list(self.unmatched_student),
            "threshold": self.threshold,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Matching":
        return cls(
            pairs=tuple(
                (p["reference"], p["student"], p["score"]) for p in data["pairs"]
            ),
            unmatched_reference=tuple(data["unmatched_reference"]),
            unmatched_student=tuple(data["unmatched_student"]),
            threshold=data.get("threshold", DEFAULT_THRESHOLD),
        )


def _assignment_value(scores: dict, n_rows: int, n_cols: int) -> Fraction:
    """Maximum total of an assignment where absent pairs contribute zero.

    Kuhn-Munkres over exact fractions on a zero-padded square matrix; pairs
    not present in `scores` count as zero, which models leaving the element
    unmatched.
    """
    n = max(n_rows, n_cols)
    if n == 0:
        return Fraction(0)
    zero = Fraction(0)
    cost = [
        [-(scores.get((i, j), zero)) for j in range(n)] for i in range(n)
    ]
    INF = float("inf")
    u = [zero] * (n + 1)
    v = [zero] * (n + 1)
    assigned = [0] * (n + 1)  # assigned[j] = row matched to column j (1-based)
    for i in range(1, n + 1):
        assigned[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        way = [0] * (n + 1)
        while True:
            used[j0] = True
            i0 = assigned[j0]
            delta = INF
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[assigned[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if assigned[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            assigned[j0] = assigned[j1]
            j0 = j1
    total = Fraction(0)
    for j in range(1, n + 1):
        i = assigned[j]
        total -= cost[i - 1][j - 1]
    return total


def assign_elements(
    reference: list,
    student: list,
    score: Callable[[object, object], Optional[Fraction]],
    sort_key: Callable[[object], object],
):
    """Deterministic maximum-similarity assignment between two element lists.

    `score` returns the exact similarity for an admissible pair or None for
    an inadmissible one. Returns (pairs, unmatched_reference_indices,
    unmatched_student_indices) where pairs are (ref_index, stu_index, score)
    triples. Among maximum-total assignments the lexicographically smallest
    list of (reference, student) sort keys is chosen.
    """
    scores: dict = {}
    for i, r in enumerate(reference):
        for j, s in enumerate(student):
            sc = score(r, s)
            if sc is not None:
                scores[(i, j)] = sc

    def best(fixed_rows: set, fixed_cols: set) -> Fraction:
        rows = [i for i in range(len(reference)) if i not in fixed_rows]
        cols = [j for j in range(len(student)) if j not in fixed_cols]
        sub = {
            (ri, ci): scores[(i, j)]
            for ri, i in enumerate(rows)
            for ci, j in enumerate(cols)
            if (i, j) in scores
        }
        return _assignment_value(sub, len(rows), len(cols))

    target = best(set(), set())
    candidates = sorted(
        scores, key=lambda ij: (sort_key(reference[ij[0]]), sort_key(student[ij[1]]))
    )
    chosen = []
    used_rows: set = set()
    used_cols: set = set()
    fixed_total = Fraction(0)
    for i, j in candidates:
        if i in used_rows or j in used_cols:
            continue
        candidate_total = fixed_total + scores[(i, j)]
        rest = best(used_rows | {i}, used_cols | {j})
        if candidate_total + rest == target:
            chosen.append((i, j, scores[(i, j)]))
            used_rows.add(i)
            used_cols.add(j)
            fixed_total = candidate_total
    unmatched_ref = [i for i in range(len(reference)) if i not in used_rows]
    unmatched_stu = [j for j in range(len(student)) if j not in used_cols]
    return chosen, unmatched_ref, unmatched_stu


def _as_fraction_threshold(threshold: float) -> Fraction:
    # Decimal-string round trip keeps 0.6 meaning exactly 3/5.
    return Fraction(str(threshold))


def match_names(
    reference_names: list,
    student_names: list,
    threshold: float = DEFAULT_THRESHOLD,
) -> Matching:
    """Match two name lists by similarity; used for nodes and for members."""
    limit = _as_fraction_threshold(threshold)

    def score(r: str, s: str) -> Optional[Fraction]:
        sc = similarity_fraction(r, s)
        return sc if sc >= limit else None

    pairs, un_ref, un_stu = assign_elements(
        reference_names, student_names, score, canonical_name
    )
    return Matching(
        pairs=tuple(
            (reference_names[i], student_names[j], float(sc)) for i, j, sc in pairs
        ),
        unmatched_reference=tuple(reference_names[i] for i in un_ref),
        unmatched_student=tuple(student_names[j] for j in un_stu),
        threshold=threshold,
    )


def match_nodes(
    reference: Diagram, student: Diagram, threshold: float = DEFAULT_THRESHOLD
) -> Matching:
    """Optimal node pairing between two diagrams of the same kind."""
    if reference.kind != student.kind:
        raise KindMismatchError(
            f"cannot match a {reference.kind.value} diagram against a "
            f"{student.kind.value} diagram"
        )
    return match_names(reference.node_names(), student.node_names(), threshold)
