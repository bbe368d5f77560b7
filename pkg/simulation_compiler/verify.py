"""
Dense-matrix oracle for Hamiltonians, product formulas and circuits.

Qubit 1 is the leftmost Kronecker factor, i.e. the most significant bit of
the basis-state index. Every routine refuses n above DENSE_QUBIT_CAP.
"""

import logging
import os

import numpy as np

from core.errors import DimensionCapExceeded
from core.models import (
    ExponentialSeq,
    GateIR,
    GateKind,
    HamiltonianSpec,
    PauliLetter,
    PauliTerm,
    VerificationResult,
)
from simulation_compiler.circuitgen import validate_sequence
from simulation_compiler.solovay_kitaev import HADAMARD, T_GATE, rz_matrix

logger = logging.getLogger(__name__)

_SINGLE_QUBIT = {GateKind.H: HADAMARD, GateKind.T: T_GATE}


def dense_cap() -> int:
    return int(os.getenv("DENSE_QUBIT_CAP", "8"))


def _check_cap(n: int) -> None:
    cap = dense_cap()
    if n > cap:
        raise DimensionCapExceeded(n, cap)


def _bit(n: int, qubit: int) -> int:
    return 1 << (n - qubit)


# ---------------------------------------------------------------------------
# Pauli strings
# ---------------------------------------------------------------------------
def pauli_action(term: PauliTerm, n: int) -> tuple[np.ndarray, np.ndarray]:
    """
    (perm, phase) with (P @ M) == phase[:, None] * M[perm] for the unit-coefficient
    Pauli string P of term.
    """
    _check_cap(n)
    index = np.arange(2**n)
    flip = 0
    for qubit, letter in term.support.items():
        if letter is not PauliLetter.Z:
            flip |= _bit(n, qubit)
    perm = index ^ flip

    phase = np.ones(2**n, dtype=complex)
    for qubit, letter in term.support.items():
        source_bit = (perm & _bit(n, qubit)) != 0
        if letter is PauliLetter.Y:
            phase *= np.where(source_bit, -1j, 1j)
        elif letter is PauliLetter.Z:
            phase *= np.where(source_bit, -1.0, 1.0)
    return perm, phase


def term_matrix(term: PauliTerm, n: int) -> np.ndarray:
    perm, phase = pauli_action(term, n)
    return term.coefficient * phase[:, None] * np.eye(2**n, dtype=complex)[perm]


def hamiltonian_matrix(spec: HamiltonianSpec) -> np.ndarray:
    _check_cap(spec.n)
    return sum(term_matrix(term, spec.n) for term in spec.terms)


def hamiltonian_norm(spec: HamiltonianSpec) -> float:
    """Spectral norm ||H||_2 (largest absolute eigenvalue of the Hermitian matrix)."""
    return float(np.max(np.abs(np.linalg.eigvalsh(hamiltonian_matrix(spec)))))


# ---------------------------------------------------------------------------
# Unitaries
# ---------------------------------------------------------------------------
def unitary_from_eigh(eigenvalues: np.ndarray, vectors: np.ndarray, t: float) -> np.ndarray:
    return (vectors * np.exp(-1j * eigenvalues * t)) @ vectors.conj().T


def exact_unitary(spec: HamiltonianSpec, t: float) -> np.ndarray:
    eigenvalues, vectors = np.linalg.eigh(hamiltonian_matrix(spec))
    return unitary_from_eigh(eigenvalues, vectors, t)


def apply_pauli_exponential(term: PauliTerm, duration: float, u: np.ndarray, n: int) -> np.ndarray:
    """exp(-i a P duration) @ u via cos/sin of the involutory P."""
    perm, phase = pauli_action(term, n)
    angle = term.coefficient * duration
    return np.cos(angle) * u - 1j * np.sin(angle) * (phase[:, None] * u[perm])


def sequence_unitary(spec: HamiltonianSpec, seq: ExponentialSeq) -> np.ndarray:
    """One step of the product formula; entries are applied in list order."""
    _check_cap(spec.n)
    validate_sequence(spec, seq)
    actions = {j: pauli_action(spec.terms[j], spec.n) for j in set(j for j, _ in seq.entries)}
    u = np.eye(2**spec.n, dtype=complex)
    for j, duration in seq.entries:
        perm, phase = actions[j]
        angle = spec.terms[j].coefficient * duration
        u = np.cos(angle) * u - 1j * np.sin(angle) * (phase[:, None] * u[perm])
    return u


def evolution_unitary(spec: HamiltonianSpec, seq: ExponentialSeq) -> np.ndarray:
    return np.linalg.matrix_power(sequence_unitary(spec, seq), seq.r)


def _apply_gates(gates, n: int, u: np.ndarray) -> np.ndarray:
    dim = 2**n
    index = np.arange(dim)
    for gate in gates:
        if gate.kind is GateKind.CNOT:
            control, target = gate.qubits
            # Row y of the result is row y ^ target_bit of u whenever the control bit is set.
            perm = np.where(index & _bit(n, control), index ^ _bit(n, target), index)
            u = u[perm]
            continue
        matrix = rz_matrix(gate.angle) if gate.kind is GateKind.RZ else _SINGLE_QUBIT[gate.kind]
        q = gate.qubits[0]
        view = u.reshape(2 ** (q - 1), 2, 2 ** (n - q), dim)
        u = np.einsum("ab,ibjk->iajk", matrix, view).reshape(dim, dim)
    return u


def _repeat_period(ir: GateIR) -> int:
    r = ir.metadata.r if ir.metadata is not None else 1
    if r <= 1 or len(ir.gates) % r:
        return 1
    block = len(ir.gates) // r
    head = ir.gates[:block]
    if all(ir.gates[k * block : (k + 1) * block] == head for k in range(1, r)):
        return r
    return 1


def circuit_unitary(ir: GateIR) -> np.ndarray:
    """Product of the gate matrices, first gate applied first."""
    _check_cap(ir.n)
    dim = 2**ir.n
    r = _repeat_period(ir)
    block = ir.gates[: len(ir.gates) // r] if r > 1 else ir.gates
    u = _apply_gates(block, ir.n, np.eye(dim, dtype=complex))
    return np.linalg.matrix_power(u, r) if r > 1 else u


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------
def spectral_distance(a: np.ndarray, b: np.ndarray, phase_invariant: bool = False) -> float:
    """
    ||a - b||_2, or its minimum over a global phase on b.

    The phase-invariant form assumes unitary inputs: with e^{i alpha_k} the
    eigenvalues of b^dag a, the optimum is 2 sin(arc / 4) where arc is the
    shortest circular arc holding every alpha_k.
    """
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    if not phase_invariant:
        return float(np.linalg.norm(a - b, ord=2))
    phases = np.sort(np.angle(np.linalg.eigvals(b.conj().T @ a)))
    gaps = np.diff(np.concatenate([phases, [phases[0] + 2 * np.pi]]))
    arc = 2 * np.pi - gaps.max()
    return float(2 * np.sin(max(arc, 0.0) / 4))


def unitarity_defect(u: np.ndarray) -> float:
    return float(np.linalg.norm(u.conj().T @ u - np.eye(len(u)), ord=2))


def state_distance(a: np.ndarray, b: np.ndarray, phase_invariant: bool = False) -> float:
    """||a - b|| for state vectors, or its minimum over a global phase on b."""
    if not phase_invariant:
        return float(np.linalg.norm(a - b))
    overlap = abs(np.vdot(a, b))
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * overlap)))


def random_state(n: int, seed: int) -> np.ndarray:
    """Haar-random n-qubit state drawn from a seeded generator."""
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return psi / np.linalg.norm(psi)


def verify_circuit(
    spec: HamiltonianSpec,
    ir: GateIR,
    t: float,
    tolerance: float,
    phase_invariant: bool = False,
    seed: int = 0,
) -> VerificationResult:
    """
    Compare the circuit against exp(-iHt); skipped with a note above the dense cap.

    Besides the operator distance, the two unitaries are applied to one random
    input state drawn from `seed`; that state error never exceeds the operator
    distance.
    """
    cap = dense_cap()
    if spec.n > cap:
        note = f"verification skipped: n={spec.n} exceeds dense cap {cap}"
        logger.warning("verify_skipped n=%s cap=%s", spec.n, cap)
        return VerificationResult(performed=False, tolerance=tolerance, phase_invariant=phase_invariant, note=note)

    circuit, exact = circuit_unitary(ir), exact_unitary(spec, t)
    measured = spectral_distance(circuit, exact, phase_invariant)
    psi = random_state(spec.n, seed)
    state_error = state_distance(circuit @ psi, exact @ psi, phase_invariant)
    passed = measured <= tolerance
    logger.info(
        "verify_circuit n=%s measured=%.3e state_error=%.3e seed=%s tolerance=%.3e passed=%s",
        spec.n, measured, state_error, seed, tolerance, passed,
    )
    return VerificationResult(
        performed=True,
        tolerance=tolerance,
        phase_invariant=phase_invariant,
        measured_error=measured,
        state_error=state_error,
        seed=seed,
        passed=passed,
    )
