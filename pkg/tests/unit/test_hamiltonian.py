"""
Unit tests: Hamiltonian text format and the example generators.

How to test:
Run "python -m pytest tests/unit/test_hamiltonian.py -v"
"""

from collections import Counter

import numpy as np
import pytest

from core.errors import HamiltonianFormatError
from core.models import HamiltonianSpec, PauliLetter, PauliTerm, TermEncoding
from simulation_compiler.hamiltonian import (
    drop_zero_terms,
    make_honeycomb,
    make_pairing,
    parse_hamiltonian,
    sample_random_twobody,
    serialize_hamiltonian,
)
from tests.conftest import random_term


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------
class TestParseHamiltonian:
    def test_worked_example_encoding(self, pairs_text):
        spec = parse_hamiltonian(pairs_text)

        assert spec.n == 3
        assert spec.m == 3
        assert [t.coefficient for t in spec.terms] == [1.0, 2.0, 4.0]
        assert spec.terms[0].encoding == TermEncoding(counts=(2, 0, 0), s_x=(1, 2))
        assert spec.terms[1].encoding == TermEncoding(counts=(0, 2, 0), s_y=(1, 2))
        assert spec.terms[2].encoding == TermEncoding(counts=(0, 1, 1), s_y=(1,), s_z=(3,))

    def test_single_z_term(self):
        spec = parse_hamiltonian("n=1\n1.5 Z1")
        assert spec.m == 1
        assert spec.terms[0].encoding == TermEncoding(counts=(0, 0, 1), s_z=(1,))
        assert spec.terms[0].coefficient == 1.5

    def test_comments_blank_lines_and_k(self):
        text = "# header comment\nn=4\nk=2\n\n0.5 X1 Z4   # trailing\n-1e-3 Y2\n"
        spec = parse_hamiltonian(text)
        assert spec.k == 2
        assert spec.m == 2
        assert spec.terms[1].coefficient == -1e-3
        assert spec.group_boundaries is None

    def test_group_markers_set_boundaries(self):
        spec = parse_hamiltonian("n=3\n# group\n1 Z1\n1 Z2\n# group\n1 X3")
        assert spec.group_boundaries == [(0, 2), (2, 3)]

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("n=2\n1 X1 X1", "duplicate qubit"),
            ("n=2\n1 X1 Z3", "outside [1, 2]"),
            ("n=2\nabc X1", "unparsable coefficient"),
            ("n=2\n1.0", "all-identity"),
            ("n=2\n1 I1 X2", "identity factor"),
            ("n=2\n1 Q1", "malformed Pauli factor"),
            ("1 X1", "missing 'n=<int>'"),
            ("n=2\n# nothing here", "no terms"),
            ("n=0\n1 X1", "must be positive"),
        ],
    )
    def test_malformed_input(self, text, fragment):
        with pytest.raises(HamiltonianFormatError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
            parse_hamiltonian(text)

    def test_error_carries_line_number(self):
        with pytest.raises(HamiltonianFormatError) as excinfo:
            parse_hamiltonian("n=2\n1 X1\n1 X1 X1")
        assert excinfo.value.line == 3
        assert isinstance(excinfo.value, ValueError)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------
class TestSerializeHamiltonian:
    def test_worked_example_is_byte_stable(self, pairs_text):
        assert serialize_hamiltonian(parse_hamiltonian(pairs_text)) == pairs_text

    def test_single_term(self):
        spec = HamiltonianSpec(n=1, terms=[PauliTerm(coefficient=1.5, support={1: PauliLetter.Z})])
        assert serialize_hamiltonian(spec) == "n=1\n1.5 Z1"

    def test_group_markers_emitted_at_boundaries(self):
        text = "n=3\n# group\n1 Z1\n1 Z2\n# group\n1 X3"
        spec = parse_hamiltonian(text)
        assert serialize_hamiltonian(spec) == text

    def test_round_trip_random_specs(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 7))
            terms = [random_term(rng, n) for _ in range(int(rng.integers(1, 12)))]
            spec = HamiltonianSpec(n=n, terms=terms)
            assert parse_hamiltonian(serialize_hamiltonian(spec)) == spec

    def test_round_trip_keeps_awkward_floats(self):
        spec = HamiltonianSpec(
            n=2,
            k=2,
            terms=[
                PauliTerm(coefficient=0.1 + 0.2, support={1: PauliLetter.X}),
                PauliTerm(coefficient=-1.2345678901234567e-17, support={1: PauliLetter.Y, 2: PauliLetter.Y}),
                PauliTerm(coefficient=3.0, support={2: PauliLetter.Z}),
            ],
        )
        assert parse_hamiltonian(serialize_hamiltonian(spec)) == spec


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------
def _letter_degrees(spec: HamiltonianSpec) -> dict[int, Counter]:
    degrees: dict[int, Counter] = {q: Counter() for q in range(1, spec.n + 1)}
    for term in spec.terms:
        letters = set(term.support.values())
        assert len(letters) == 1, f"link term {term.label} mixes letters"
        letter = letters.pop()
        for q in term.qubits:
            degrees[q][letter] += 1
    return degrees


class TestHoneycomb:
    def test_smallest_cell(self):
        spec = make_honeycomb(1, 1, 1.0, 1.0, 1.0)
        assert spec.n == 2
        assert spec.m == 3
        assert {t.label for t in spec.terms} == {"X1 X2", "Y1 Y2", "Z1 Z2"}

    def test_one_by_two_cell(self):
        spec = make_honeycomb(1, 2, 1.0, 1.0, 1.0)
        assert spec.n == 4
        assert spec.m == 6
        kinds = Counter(next(iter(t.support.values())) for t in spec.terms)
        assert kinds == {PauliLetter.X: 2, PauliLetter.Y: 2, PauliLetter.Z: 2}

    @pytest.mark.parametrize("rows, cols", [(1, 2), (2, 2), (2, 3), (3, 3)])
    def test_every_qubit_has_one_link_of_each_type(self, rows, cols):
        spec = make_honeycomb(rows, cols, 0.3, 0.7, 1.1)
        for qubit, degree in _letter_degrees(spec).items():
            assert degree == {PauliLetter.X: 1, PauliLetter.Y: 1, PauliLetter.Z: 1}, (
                f"qubit {qubit} has links {dict(degree)}"
            )

    def test_coefficients_are_negated_couplings(self):
        spec = make_honeycomb(2, 2, 0.3, 0.7, 1.1)
        by_letter = {next(iter(t.support.values())): t.coefficient for t in spec.terms}
        assert by_letter == {PauliLetter.X: -0.3, PauliLetter.Y: -0.7, PauliLetter.Z: -1.1}
        assert spec.k == 2

    def test_zero_coupling_dropped_unless_allowed(self):
        assert make_honeycomb(2, 2, 0.0, 1.0, 1.0).m == 8
        assert make_honeycomb(2, 2, 0.0, 1.0, 1.0, allow_zero=True).m == 12

    def test_rejects_non_positive_dimensions(self):
        with pytest.raises(ValueError):
            make_honeycomb(0, 2, 1.0, 1.0, 1.0)


class TestPairing:
    def test_two_site_bcs(self):
        spec = make_pairing(2, [1.0, 1.0], [[0.0, 1.0], [0.0, 0.0]])
        assert [(t.coefficient, t.label) for t in spec.terms] == [
            (0.5, "Z1"),
            (0.5, "Z2"),
            (1.0, "X1 X2"),
            (1.0, "Y1 Y2"),
        ]

    def test_minus_channel_flips_yy_sign(self):
        spec = make_pairing(2, [0.0, 0.0], np.zeros((2, 2)), [[0.0, 0.25], [0.0, 0.0]])
        assert [(t.coefficient, t.label) for t in spec.terms] == [(0.25, "X1 X2"), (-0.25, "Y1 Y2")]

    def test_single_site(self):
        spec = make_pairing(1, [3.0], [[0.0]])
        assert spec.m == 1
        assert spec.terms[0].coefficient == 1.5

    def test_term_count_with_both_channels(self):
        n = 4
        couplings = np.triu(np.full((n, n), 0.5), 1)
        spec = make_pairing(n, np.ones(n), couplings, couplings)
        assert spec.m == n + 2 * 2 * (n * (n - 1) // 2)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="gamma"):
            make_pairing(3, [1.0, 1.0], np.zeros((3, 3)))
        with pytest.raises(ValueError, match="v_plus"):
            make_pairing(2, [1.0, 1.0], np.zeros((3, 3)))


class TestRandomTwoBody:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_term_count(self, n):
        assert sample_random_twobody(n, seed=n).m == 9 * n * (n - 1) // 2

    def test_every_term_is_two_body(self):
        spec = sample_random_twobody(4, seed=1)
        assert all(t.weight == 2 for t in spec.terms)
        assert len({t.label for t in spec.terms}) == spec.m

    def test_same_seed_same_coefficients(self):
        a = sample_random_twobody(5, seed=7)
        b = sample_random_twobody(5, seed=7)
        c = sample_random_twobody(5, seed=8)
        assert a == b
        assert a != c

    def test_rejects_single_qubit(self):
        with pytest.raises(ValueError):
            sample_random_twobody(1, seed=0)


class TestDropZeroTerms:
    def test_drops_and_reports(self):
        spec = parse_hamiltonian("n=2\n0 X1\n1 Z2\n0.0 Y1 Y2")
        kept, dropped = drop_zero_terms(spec)
        assert dropped == 2
        assert [t.label for t in kept.terms] == ["Z2"]

    def test_nothing_to_drop_returns_same_spec(self, pairs_text):
        spec = parse_hamiltonian(pairs_text)
        assert drop_zero_terms(spec) == (spec, 0)
