"""
Circuit synthesis for Pauli exponentials, circuit text I/O and depth scheduling.

Gate conventions: H is the Hadamard gate, T = diag(1, e^{i pi/4}),
RZ(theta) = exp(-i theta Z / 2), CNOT(c, t) flips t when c is set. With these,
each fragment below equals exp(-i a P d) exactly, with no global phase.
"""

import logging
import re
from collections import Counter

from core.errors import CircuitFormatError, InconsistentSequenceError
from core.models import (
    CircuitMetadata,
    ExponentialSeq,
    Gate,
    GateCounts,
    GateIR,
    GateKind,
    Gateset,
    HamiltonianSpec,
    PauliLetter,
    PauliTerm,
    Schedule,
    TSParams,
    format_real,
)
from simulation_compiler.solovay_kitaev import DEFAULT_MAX_LENGTH, rz_word, sk_tolerance

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"^(?:(H|T)(\d+)|CNOT(\d+),(\d+)|RZ([^,]+),(\d+))$")


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------
def _rotation(
    angle: float, qubit: int, gateset: Gateset, delta: float | None, sk_max_length: int | None
) -> list[Gate]:
    if gateset is Gateset.CONTINUOUS:
        return [Gate.rz(angle, qubit)]
    if delta is None:
        raise ValueError("discrete gateset needs a Solovay-Kitaev tolerance")
    word = rz_word(angle, delta, sk_max_length or DEFAULT_MAX_LENGTH)
    return [Gate.h(qubit) if letter == "H" else Gate.t(qubit) for letter in word]


def fragment_gates(
    term: PauliTerm,
    duration: float,
    gateset: Gateset = Gateset.CONTINUOUS,
    delta: float | None = None,
    sk_max_length: int | None = None,
) -> list[Gate]:
    if not term.support:
        raise ValueError("cannot synthesize an exponential of the identity")
    qubits = term.qubits
    parity = qubits[-1]
    x_qubits = [q for q in qubits if term.support[q] is PauliLetter.X]
    y_qubits = [q for q in qubits if term.support[q] is PauliLetter.Y]

    basis_in: list[Gate] = [Gate.h(q) for q in x_qubits]
    for q in y_qubits:
        basis_in.extend([Gate.t(q)] * 6)
        basis_in.append(Gate.h(q))
    basis_out: list[Gate] = []
    for q in y_qubits:
        basis_out.append(Gate.h(q))
        basis_out.extend([Gate.t(q)] * 2)
    basis_out.extend(Gate.h(q) for q in x_qubits)

    ladder = [Gate.cnot(q, parity) for q in qubits[:-1]]
    rotation = _rotation(2 * term.coefficient * duration, parity, gateset, delta, sk_max_length)
    return basis_in + ladder + rotation + ladder + basis_out


def pcircuit(
    term: PauliTerm,
    duration: float,
    gateset: Gateset = Gateset.CONTINUOUS,
    delta: float | None = None,
    n: int | None = None,
    sk_max_length: int | None = None,
) -> GateIR:
    """Circuit for exp(-i a P duration): basis change, CNOT ladder onto the highest qubit, RZ, undo."""
    gates = fragment_gates(term, duration, gateset, delta, sk_max_length)
    return GateIR(n=n or term.qubits[-1], gates=gates)


def validate_sequence(spec: HamiltonianSpec, seq: ExponentialSeq) -> None:
    if seq.m != spec.m:
        raise InconsistentSequenceError(f"sequence built for m={seq.m}, spec has m={spec.m}")
    bad = [j for j, _ in seq.entries if not 0 <= j < spec.m]
    if bad:
        raise InconsistentSequenceError(f"sequence references unknown term indices {sorted(set(bad))[:5]}")


def assemble_circuit(
    spec: HamiltonianSpec,
    seq: ExponentialSeq,
    params: TSParams,
    gateset: Gateset = Gateset.CONTINUOUS,
    delta: float | None = None,
    sk_max_length: int | None = None,
) -> GateIR:
    """One step of fragments in sequence order, repeated params.r times."""
    validate_sequence(spec, seq)
    if gateset is Gateset.DISCRETE and delta is None:
        delta = sk_tolerance(params.epsilon, spec.m, params.chi, params.r)

    step: list[Gate] = []
    step_sources: list[int | None] = []
    for j, duration in seq.entries:
        fragment = fragment_gates(spec.terms[j], duration, gateset, delta, sk_max_length)
        step.extend(fragment)
        step_sources.extend([j] * len(fragment))

    metadata = CircuitMetadata(
        chi=params.chi,
        r=params.r,
        gateset=gateset,
        epsilon=params.epsilon,
        sk_tolerance=delta if gateset is Gateset.DISCRETE else None,
    )
    ir = GateIR(n=spec.n, gates=step * params.r, sources=step_sources * params.r, metadata=metadata)
    logger.info(
        "assemble_circuit n=%s step_gates=%s r=%s total=%s gateset=%s",
        spec.n, len(step), params.r, len(ir), gateset.value,
    )
    return ir


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------
def gate_token(gate: Gate) -> str:
    if gate.kind is GateKind.CNOT:
        return f"CNOT{gate.qubits[0]},{gate.qubits[1]}"
    if gate.kind is GateKind.RZ:
        return f"RZ{format_real(gate.angle)},{gate.qubits[0]}"
    return f"{gate.kind.value}{gate.qubits[0]}"


def emit_string(ir: GateIR) -> str:
    return " ".join(gate_token(gate) for gate in ir.gates)


def emit_layers(ir: GateIR, schedule: Schedule) -> str:
    return ";\n".join(" ".join(gate_token(ir.gates[i]) for i in layer) for layer in schedule.layers)


def _parse_token(token: str) -> Gate:
    match = _TOKEN_RE.match(token)
    if match is None:
        raise CircuitFormatError("malformed gate", token)
    letter, q, control, target, angle, rz_qubit = match.groups()
    try:
        if letter:
            return Gate(GateKind(letter), (int(q),))
        if control:
            return Gate.cnot(int(control), int(target))
        return Gate.rz(float(angle), int(rz_qubit))
    except ValueError as exc:
        raise CircuitFormatError(str(exc), token) from exc


def parse_circuit(text: str, n: int | None = None) -> GateIR:
    """Inverse of emit_string; ';' layer separators are accepted as whitespace."""
    gates = [_parse_token(token) for token in text.replace(";", " ").split()]
    widest = max((max(g.qubits) for g in gates), default=1)
    if n is not None and widest > n:
        raise CircuitFormatError(f"gate acts on qubit {widest} > n={n}")
    return GateIR(n=n or widest, gates=gates)


# ---------------------------------------------------------------------------
# Scheduling and counting
# ---------------------------------------------------------------------------
def schedule_layers(ir: GateIR) -> Schedule:
    """As-soon-as-possible layering on qubit disjointness."""
    next_free: dict[int, int] = {}
    layers: list[list[int]] = []
    for index, gate in enumerate(ir.gates):
        layer = max(next_free.get(q, 0) for q in gate.qubits)
        if layer == len(layers):
            layers.append([])
        layers[layer].append(index)
        for q in gate.qubits:
            next_free[q] = layer + 1
    return Schedule(layers=layers)


def gate_counts(ir: GateIR) -> GateCounts:
    tally = Counter(gate.kind for gate in ir.gates)
    return GateCounts(
        h=tally[GateKind.H],
        t=tally[GateKind.T],
        rz=tally[GateKind.RZ],
        cnot=tally[GateKind.CNOT],
    )


def fragment_counts(term: PauliTerm) -> GateCounts:
    letters = Counter(term.support.values())
    x, y = letters[PauliLetter.X], letters[PauliLetter.Y]
    return GateCounts(h=2 * (x + y), t=8 * y, rz=1, cnot=2 * (term.weight - 1))


def predicted_counts(spec: HamiltonianSpec, chi: int, r: int) -> GateCounts:
    """Closed-form continuous-gateset counts; every term appears 2 * 5^(chi-1) times per step."""
    per_step = GateCounts()
    for term in spec.terms:
        c = fragment_counts(term)
        per_step = GateCounts(
            h=per_step.h + c.h, t=per_step.t + c.t, rz=per_step.rz + c.rz, cnot=per_step.cnot + c.cnot
        )
    return per_step.scaled(2 * 5 ** (chi - 1) * r)


def expected_model_counts(model: str, n: int, chi: int, r: int) -> GateCounts:
    """Closed-form counts for the honeycomb and (all couplings non-zero) pairing models."""
    if model == "honeycomb":
        base = GateCounts(h=8 * n, t=16 * n, rz=3 * n, cnot=6 * n)
    elif model == "pairing":
        base = GateCounts(h=16 * n * (n - 1), t=32 * n * (n - 1), rz=2 * n * (2 * n - 1), cnot=8 * n * (n - 1))
    else:
        raise ValueError(f"no closed-form gate counts for model {model!r}")
    return base.scaled(5 ** (chi - 1) * r)
