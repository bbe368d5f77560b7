"""
Unit tests: Solovay-Kitaev decomposition over {H, T}.

The session-scoped base_net fixture builds the default net once (a few
seconds); the mechanics tests use a small net.

How to test:
Run "python -m pytest tests/unit/test_solovay_kitaev.py -v"
"""

import numpy as np
import pytest

from core.errors import ToleranceUnreachable
from simulation_compiler.experiments import sk_length_scaling
from simulation_compiler.solovay_kitaev import (
    HADAMARD,
    T_GATE,
    BaseNet,
    group_commutator,
    inverse_word,
    projective_distance,
    quaternion_to_su2,
    rz_matrix,
    rz_word,
    simplify_word,
    sk_decompose,
    sk_tolerance,
    su2_to_quaternion,
    to_su2,
    word_matrix,
)


def _haar_su2(rng: np.random.Generator) -> np.ndarray:
    q = rng.standard_normal(4)
    return quaternion_to_su2(q / np.linalg.norm(q))


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------
class TestQuaternions:
    def test_round_trip(self, rng):
        for _ in range(50):
            u = _haar_su2(rng)
            assert projective_distance(quaternion_to_su2(su2_to_quaternion(u)), u) < 1e-6

    def test_distance_ignores_global_phase(self, rng):
        u = _haar_su2(rng)
        assert projective_distance(u, np.exp(0.83j) * u) < 1e-6

    def test_distance_matches_spectral_norm(self, rng):
        for _ in range(20):
            u, v = _haar_su2(rng), _haar_su2(rng)
            phases = np.exp(1j * np.linspace(0, 2 * np.pi, 20_001))
            brute = min(np.linalg.norm(u - p * v, ord=2) for p in phases)
            assert projective_distance(u, v) == pytest.approx(brute, abs=1e-3)

    def test_t_to_the_sixth_is_rz_minus_half_pi(self):
        t6 = np.linalg.matrix_power(T_GATE, 6)
        assert projective_distance(t6, rz_matrix(-np.pi / 2)) < 1e-6


class TestWords:
    def test_simplify_cancels(self):
        assert simplify_word("HH") == ""
        assert simplify_word("T" * 8) == ""
        assert simplify_word("THHT") == "TT"
        assert simplify_word("HT" + "T" * 7 + "H") == ""

    def test_simplify_rejects_other_letters(self):
        with pytest.raises(ValueError):
            simplify_word("HX")

    def test_word_matrix_is_time_ordered(self):
        assert projective_distance(word_matrix("HT"), T_GATE @ HADAMARD) < 1e-6

    def test_inverse(self, rng):
        for _ in range(30):
            word = "".join(rng.choice(["H", "T"], size=int(rng.integers(0, 25))))
            product = word_matrix(word + inverse_word(word))
            assert projective_distance(product, np.eye(2)) < 1e-6


class TestGroupCommutator:
    def test_reproduces_target(self, rng):
        for _ in range(30):
            axis = rng.standard_normal(3)
            axis /= np.linalg.norm(axis)
            angle = float(rng.uniform(0, 0.5))
            q = np.concatenate([[np.cos(angle / 2)], np.sin(angle / 2) * axis])
            u = quaternion_to_su2(q)
            v, w = group_commutator(u)
            commutator = v @ w @ v.conj().T @ w.conj().T
            assert projective_distance(commutator, u) < 1e-6

    def test_identity(self):
        v, w = group_commutator(np.eye(2))
        assert projective_distance(v, np.eye(2)) < 1e-6


# ---------------------------------------------------------------------------
# Base net
# ---------------------------------------------------------------------------
class TestBaseNet:
    def test_contains_generators(self, small_net):
        assert small_net.words[0] == ""
        assert {"H", "T"} <= set(small_net.words)
        assert len(set(small_net.words)) == len(small_net)

    def test_elements_are_distinct(self, small_net):
        keys = {tuple(np.round(q, 9) + 0.0) for q in small_net.quaternions}
        assert len(keys) == len(small_net)

    def test_words_match_quaternions(self, small_net, rng):
        for index in rng.integers(0, len(small_net), 50):
            word = small_net.words[int(index)]
            assert projective_distance(word_matrix(word), quaternion_to_su2(small_net.quaternions[int(index)])) < 1e-6

    def test_size_cap(self):
        net = BaseNet.build(max_length=30, max_size=500)
        assert len(net) == 500

    def test_nearest_of_member(self, small_net):
        word, distance = small_net.nearest(to_su2(T_GATE @ HADAMARD))
        assert distance < 1e-6
        assert projective_distance(word_matrix(word), T_GATE @ HADAMARD) < 1e-6

    def test_spacing_shrinks_with_size(self, small_net):
        coarse = BaseNet.build(max_length=10, max_size=500)
        assert small_net.spacing(500, seed=1) < coarse.spacing(500, seed=1)

    def test_save_and_load(self, small_net, tmp_path):
        path = tmp_path / "net.npz"
        small_net.save(path)
        loaded = BaseNet.load(path)
        assert loaded.words == small_net.words
        assert np.allclose(loaded.quaternions, small_net.quaternions)
        assert BaseNet.load_or_build(path, small_net.max_length, small_net.max_size).words == small_net.words

    def test_load_rejects_other_version(self, tmp_path):
        path = tmp_path / "old.npz"
        np.savez(path, version=0, max_length=1, max_size=1, words=np.array([""]), quaternions=np.zeros((1, 4)))
        with pytest.raises(ValueError, match="version"):
            BaseNet.load(path)


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------
class TestSkDecompose:
    def test_t_is_its_own_word(self, base_net):
        assert sk_decompose(T_GATE, 1e-3, base_net) == "T"

    def test_rz_minus_half_pi(self, base_net):
        word = sk_decompose(rz_matrix(-np.pi / 2), 1e-3, base_net)
        assert projective_distance(word_matrix(word), rz_matrix(-np.pi / 2)) <= 1e-3

    def test_random_angles_within_tolerance(self, base_net, rng):
        for theta in rng.uniform(0, 2 * np.pi, 100):
            word = sk_decompose(rz_matrix(theta), 1e-2, base_net)
            assert set(word) <= {"H", "T"}
            assert projective_distance(word_matrix(word), rz_matrix(theta)) <= 1e-2

    def test_random_unitaries_tighter_tolerance(self, base_net, rng):
        for _ in range(10):
            u = _haar_su2(rng)
            word = sk_decompose(u, 1e-3, base_net)
            assert projective_distance(word_matrix(word), u) <= 1e-3

    def test_unreachable_tolerance_reports_best(self, small_net, rng):
        target = _haar_su2(rng)
        with pytest.raises(ToleranceUnreachable) as excinfo:
            sk_decompose(target, 1e-15, small_net, max_depth=1)
        assert excinfo.value.achieved > 1e-15
        assert excinfo.value.depth == 1

    def test_rejects_non_positive_delta(self, small_net):
        with pytest.raises(ValueError):
            sk_decompose(T_GATE, 0.0, small_net)

    def test_rz_word_is_cached(self):
        theta, delta = 0.123, 1e-2
        assert rz_word(theta, delta) is rz_word(theta, delta)
        assert projective_distance(word_matrix(rz_word(theta, delta)), rz_matrix(theta)) <= delta


class TestLengthScaling:
    def test_deeper_recursion_for_tighter_tolerance(self, base_net):
        """Median lengths grow with 1/delta but stay inside the 5^depth recursion envelope."""
        deltas = [1e-2, 1e-3, 1e-4]
        report = sk_length_scaling(deltas, samples=10, seed=3, net=base_net)
        assert report.median_lengths == sorted(report.median_lengths)
        envelope = base_net.max_length * 5**5
        assert all(length <= envelope for length in report.median_lengths)
        # The exponent is reported, not bounded: a finite BFS net skews it at loose tolerances.
        assert np.isfinite(report.exponent)


class TestSkTolerance:
    def test_worked_value(self):
        assert sk_tolerance(0.01, 3, 1, 10) == pytest.approx(0.01 / 120)

    def test_higher_order_divides_by_five(self):
        assert sk_tolerance(0.01, 3, 2, 10) == pytest.approx(sk_tolerance(0.01, 3, 1, 10) / 5)

    def test_budget_adds_up_to_half_epsilon(self):
        eps, m, chi, r = 0.2, 7, 3, 11
        rotations = 2 * m * 5 ** (chi - 1) * r
        assert sk_tolerance(eps, m, chi, r) * rotations == pytest.approx(eps / 2)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            sk_tolerance(0.0, 3, 1, 1)
