import pytest
from hypothesis import given, settings, strategies as st

from duet.errors import (
    DuplicateNodeError,
    EmptyNameError,
    MalformedMultiplicityError,
)
from duet.model import (
    Attribute,
    Diagram,
    DiagramKind,
    Multiplicity,
    Node,
    NodeKind,
    canonical_multiplicity,
    canonical_name,
    canonicalize,
    diagram_from_dict,
    diagram_to_dict,
)

from diagram_gen import generate_diagram


class TestCanonicalName:
    def test_case_folding(self):
        assert canonical_name("Student") == "student"

    def test_separator_removal(self):
        assert canonical_name("order_line Item") == "orderlineitem"

    def test_trim(self):
        assert canonical_name("  Course ") == "course"

    def test_hyphens(self):
        assert canonical_name("order-line") == "orderline"

    def test_empty_after_canonicalization(self):
        with pytest.raises(EmptyNameError):
            canonical_name("  _ - ")


class TestCanonicalMultiplicity:
    def test_star_equals_zero_to_unbounded(self):
        assert canonical_multiplicity("*") == Multiplicity(0, None)
        assert canonical_multiplicity("0..*") == canonical_multiplicity("*")

    def test_single_number_equals_n_to_n(self):
        assert canonical_multiplicity("1") == Multiplicity(1, 1)
        assert canonical_multiplicity("1") == canonical_multiplicity("1..1")

    def test_range(self):
        assert canonical_multiplicity("2..5") == Multiplicity(2, 5)

    def test_open_range(self):
        assert canonical_multiplicity("3..*") == Multiplicity(3, None)

    @pytest.mark.parametrize("raw", ["", "a", "1,3", "5..2", "-1", "1..", "..*", "1...2"])
    def test_rejects_other_forms(self, raw):
        with pytest.raises(MalformedMultiplicityError):
            canonical_multiplicity(raw)

    def test_inverted_range_rejected(self):
        with pytest.raises(MalformedMultiplicityError):
            canonical_multiplicity("5..2")


class TestCanonicalize:
    def test_sorts_nodes(self):
        d = Diagram(
            kind=DiagramKind.CLASS,
            nodes=(Node(name="B"), Node(name="A")),
        )
        assert [n.name for n in canonicalize(d).nodes] == ["A", "B"]

    def test_idempotent_on_example(self):
        d = canonicalize(
            Diagram(kind=DiagramKind.CLASS, nodes=(Node(name="B"), Node(name="A")))
        )
        assert canonicalize(d) == d

    def test_duplicate_nodes_rejected(self):
        d = Diagram(
            kind=DiagramKind.CLASS,
            nodes=(Node(name="Order_Line"), Node(name="orderline")),
        )
        with pytest.raises(DuplicateNodeError):
            canonicalize(d)

    def test_er_keys_sort_before_non_keys(self):
        node = Node(
            name="Order",
            node_kind=NodeKind.ENTITY,
            attributes=(
                Attribute(name="zz"),
                Attribute(name="aa", is_key=True),
            ),
        )
        d = canonicalize(Diagram(kind=DiagramKind.ER, nodes=(node,)))
        assert [a.name for a in d.nodes[0].attributes] == ["aa", "zz"]


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=5000))
def test_canonicalize_is_idempotent(seed):
    diagram = generate_diagram(seed)
    assert canonicalize(diagram) == diagram  # generator output is canonical


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=5000))
def test_json_round_trip(seed):
    diagram = generate_diagram(seed)
    assert diagram_from_dict(diagram_to_dict(diagram)) == diagram
