import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from duet.errors import KindMismatchError
from duet.matching import (
    levenshtein,
    match_names,
    match_nodes,
    name_similarity,
    similarity_fraction,
)
from duet.model import Diagram, DiagramKind, Node, canonical_name

from diagram_gen import generate_diagram
from oracles import dp_levenshtein, lex_min_assignment, oracle_similarity


class TestNameSimilarity:
    def test_canonical_equality_gives_one(self):
        assert name_similarity("Student", "student") == 1.0
        assert name_similarity("Order Line", "order_line") == 1.0

    def test_costumer_customer(self):
        # edit distance 2 over length 8
        assert similarity_fraction("Costumer", "Customer") == Fraction(3, 4)
        assert name_similarity("Costumer", "Customer") == 0.75

    def test_person_persons(self):
        assert similarity_fraction("Person", "Persons") == Fraction(6, 7)
        assert name_similarity("Person", "Persons") == pytest.approx(6 / 7)

    def test_symmetry(self):
        assert name_similarity("Reader", "Readers") == name_similarity(
            "Readers", "Reader"
        )

    def test_one_iff_canonical_equal(self):
        assert name_similarity("abc", "abd") < 1.0


def _random_word(rng):
    alphabet = "abcdefghij _-XYZ"
    word = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 14)))
    try:
        canonical_name(word)
    except Exception:
        return None
    return word


def test_levenshtein_agrees_with_dp_oracle():
    rng = random.Random(20)
    for _ in range(2000):
        a = _random_word(rng)
        b = _random_word(rng)
        if a is None or b is None:
            continue
        ca, cb = canonical_name(a), canonical_name(b)
        assert levenshtein(ca, cb) == dp_levenshtein(ca, cb)
        assert similarity_fraction(a, b) == oracle_similarity(ca, cb)


class TestMatchNodes:
    def _class_diagram(self, *names):
        return Diagram(
            kind=DiagramKind.CLASS, nodes=tuple(Node(name=n) for n in names)
        )

    def test_spec_example(self):
        reference = self._class_diagram("Student", "Course", "Enrollment")
        student = self._class_diagram("student", "Corse", "Teacher")
        matching = match_nodes(reference, student)
        pairs = {(r, s): score for r, s, score in matching.pairs}
        assert set(pairs) == {("Student", "student"), ("Course", "Corse")}
        assert pairs[("Student", "student")] == 1.0
        assert pairs[("Course", "Corse")] == pytest.approx(5 / 6)
        assert matching.unmatched_reference == ("Enrollment",)
        assert matching.unmatched_student == ("Teacher",)

    def test_identity(self):
        diagram = generate_diagram(42)
        matching = match_nodes(diagram, diagram)
        assert matching.unmatched_reference == ()
        assert matching.unmatched_student == ()
        assert all(score == 1.0 for _, _, score in matching.pairs)

    def test_empty_student(self):
        reference = self._class_diagram("A")
        student = self._class_diagram()
        matching = match_nodes(reference, student)
        assert matching.pairs == ()
        assert matching.unmatched_reference == ("A",)

    def test_kind_mismatch(self):
        reference = generate_diagram(0, DiagramKind.CLASS)
        student = generate_diagram(1, DiagramKind.ER)
        with pytest.raises(KindMismatchError):
            match_nodes(reference, student)

    def test_injective_and_above_threshold(self):
        reference = generate_diagram(10)
        student = generate_diagram(11, reference.kind)
        matching = match_nodes(reference, student)
        refs = [r for r, _, _ in matching.pairs]
        stus = [s for _, s, _ in matching.pairs]
        assert len(refs) == len(set(refs))
        assert len(stus) == len(set(stus))
        assert all(score >= 0.6 for _, _, score in matching.pairs)
        covered_ref = set(refs) | set(matching.unmatched_reference)
        assert covered_ref == set(reference.node_names())
        covered_stu = set(stus) | set(matching.unmatched_student)
        assert covered_stu == set(student.node_names())


def _oracle_matching(ref_names, stu_names, threshold=Fraction(3, 5)):
    scores = {}
    for i, r in enumerate(ref_names):
        for j, s in enumerate(stu_names):
            similarity = similarity_fraction(r, s)
            if similarity >= threshold:
                scores[(i, j)] = similarity
    best = lex_min_assignment(ref_names, stu_names, scores, canonical_name)
    return {(ref_names[i], stu_names[j]) for i, j in best}


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_matching_agrees_with_enumeration_oracle(data):
    pool = [
        "Order", "Orders", "Ordre", "Customer", "Costumer", "Custom",
        "Line", "Lines", "Item", "Reader", "Readers", "Course",
    ]
    ref_names = data.draw(
        st.lists(st.sampled_from(pool), min_size=0, max_size=4, unique=True)
    )
    stu_names = data.draw(
        st.lists(st.sampled_from(pool), min_size=0, max_size=4, unique=True)
    )
    matching = match_names(ref_names, stu_names)
    got = {(r, s) for r, s, _ in matching.pairs}
    assert got == _oracle_matching(ref_names, stu_names)
