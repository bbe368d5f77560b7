from __future__ import annotations

import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ---------------------------------------------------------------------------
# Hamiltonian data model
# ---------------------------------------------------------------------------
class PauliLetter(str, Enum):
    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"


# Non-identity letters in encoding order (l_X, l_Y, l_Z).
PAULI_AXES: tuple[PauliLetter, ...] = (PauliLetter.X, PauliLetter.Y, PauliLetter.Z)


class PauliTerm(BaseModel):
    """One weighted Pauli string a_j * h_j; qubits are 1-based, identity is implicit."""

    model_config = ConfigDict(frozen=True)

    coefficient: float
    support: dict[int, PauliLetter] = Field(default_factory=dict)

    @field_validator("coefficient")
    @classmethod
    def _finite_coefficient(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("coefficient must be finite")
        return value

    @field_validator("support")
    @classmethod
    def _normalize_support(cls, support: dict[int, PauliLetter]) -> dict[int, PauliLetter]:
        for qubit, letter in support.items():
            if qubit < 1:
                raise ValueError(f"qubit indices are 1-based, got {qubit}")
            if letter is PauliLetter.I:
                raise ValueError("identity letters are implicit and must not be listed")
        return dict(sorted(support.items()))

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(self.support)

    @property
    def weight(self) -> int:
        return len(self.support)

    def positions(self, letter: PauliLetter) -> frozenset[int]:
        return frozenset(q for q, v in self.support.items() if v is letter)

    @property
    def encoding(self) -> TermEncoding:
        return TermEncoding.from_support(self.support)

    @property
    def label(self) -> str:
        return " ".join(f"{letter.value}{qubit}" for qubit, letter in self.support.items())

    @classmethod
    def from_encoding(cls, coefficient: float, encoding: TermEncoding) -> PauliTerm:
        return cls(coefficient=coefficient, support=encoding.to_support())


class TermEncoding(BaseModel):
    """The (l, S) pair of a term: letter counts and sorted qubit positions per letter."""

    model_config = ConfigDict(frozen=True)

    counts: tuple[int, int, int]
    s_x: tuple[int, ...] = ()
    s_y: tuple[int, ...] = ()
    s_z: tuple[int, ...] = ()

    @model_validator(mode="after")
    def _check_consistency(self) -> TermEncoding:
        lists = (self.s_x, self.s_y, self.s_z)
        if tuple(len(s) for s in lists) != self.counts:
            raise ValueError(f"counts {self.counts} do not match position lists")
        for s in lists:
            if list(s) != sorted(set(s)):
                raise ValueError("position lists must be strictly increasing")
        seen = [q for s in lists for q in s]
        if len(seen) != len(set(seen)):
            raise ValueError("position lists must be pairwise disjoint")
        return self

    @classmethod
    def from_support(cls, support: dict[int, PauliLetter]) -> TermEncoding:
        s = {axis: tuple(sorted(q for q, v in support.items() if v is axis)) for axis in PAULI_AXES}
        return cls(
            counts=(len(s[PauliLetter.X]), len(s[PauliLetter.Y]), len(s[PauliLetter.Z])),
            s_x=s[PauliLetter.X],
            s_y=s[PauliLetter.Y],
            s_z=s[PauliLetter.Z],
        )

    def to_support(self) -> dict[int, PauliLetter]:
        support: dict[int, PauliLetter] = {}
        for axis, positions in zip(PAULI_AXES, (self.s_x, self.s_y, self.s_z)):
            for q in positions:
                support[q] = axis
        return dict(sorted(support.items()))


class HamiltonianSpec(BaseModel):
    """
    Ordered list of Pauli terms on n qubits.

    group_boundaries, when present, are half-open (start, stop) ranges over term
    positions, set by the sorting stage.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    k: int | None = Field(default=None, ge=1)
    terms: list[PauliTerm]
    group_boundaries: list[tuple[int, int]] | None = None

    @model_validator(mode="after")
    def _check_terms(self) -> HamiltonianSpec:
        if not self.terms:
            raise ValueError("a Hamiltonian needs at least one term")
        for j, term in enumerate(self.terms):
            if not term.support:
                raise ValueError(f"term {j} is the identity")
            if term.qubits[-1] > self.n:
                raise ValueError(f"term {j} acts on qubit {term.qubits[-1]} > n={self.n}")
            if self.k is not None and term.weight > self.k:
                raise ValueError(f"term {j} has weight {term.weight} > k={self.k}")
        if self.group_boundaries is not None:
            expected = 0
            for start, stop in self.group_boundaries:
                if start != expected or stop <= start:
                    raise ValueError(f"group boundaries {self.group_boundaries} are not a partition")
                expected = stop
            if expected != len(self.terms):
                raise ValueError("group boundaries must cover every term")
        return self

    @property
    def m(self) -> int:
        return len(self.terms)

    @property
    def a_max(self) -> float:
        return max(abs(term.coefficient) for term in self.terms)

    def groups(self) -> list[list[PauliTerm]]:
        if self.group_boundaries is None:
            return [[term] for term in self.terms]
        return [self.terms[start:stop] for start, stop in self.group_boundaries]


class GroupMode(str, Enum):
    COMMUTING = "commuting"
    DISJOINT = "disjoint"
    NONE = "none"


class GroupPartition(BaseModel):
    """Groups of 0-based term indices (into the unsorted spec) in creation order."""

    model_config = ConfigDict(frozen=True)

    groups: list[list[int]]
    mode: GroupMode

    @model_validator(mode="after")
    def _check_partition(self) -> GroupPartition:
        flat = sorted(i for group in self.groups for i in group)
        if flat != list(range(len(flat))) or any(not group for group in self.groups):
            raise ValueError("groups must partition the term indices")
        return self

    @property
    def m_bar(self) -> int:
        return len(self.groups)


class GroupStats(BaseModel):
    m: int
    m_bar: int
    max_size: int
    mean_size: float


# ---------------------------------------------------------------------------
# Trotter-Suzuki data model
# ---------------------------------------------------------------------------
class ExponentialSeq(BaseModel):
    """
    One Trotter-Suzuki step as (term_index, duration) pairs in execution order.

    term_index is the 0-based position of the term in the spec the sequence was
    built from.
    """

    entries: list[tuple[int, float]]
    dt: float
    chi: int = Field(ge=1)
    r: int = Field(default=1, ge=1)
    m: int = Field(ge=1)

    def to_text(self) -> str:
        lines = [f"chi={self.chi} r={self.r} dt={format_real(self.dt)}"]
        lines.extend(f"{j} {format_real(d)}" for j, d in self.entries)
        return "\n".join(lines)

    def durations_by_term(self) -> list[float]:
        totals = [0.0] * self.m
        for j, d in self.entries:
            totals[j] += d
        return totals


class RMode(str, Enum):
    RIGOROUS = "rigorous"
    HEURISTIC = "heuristic"


class ChiMode(str, Enum):
    DEFAULT = "default"
    MIN_GATES = "min-gates"


class TSParams(BaseModel):
    t: float = Field(gt=0)
    chi: int = Field(ge=1)
    r: int = Field(ge=1)
    epsilon: float = Field(gt=0)
    epsilon_requested: float = Field(gt=0)
    a_max: float
    m: int = Field(ge=1)
    auto_chi: bool = True
    auto_r: bool = True
    rigorous: bool = True
    doubled_r: bool = False
    norm_h: float | None = None

    @property
    def dt(self) -> float:
        return self.t / self.r

    @property
    def exponentials_per_step(self) -> int:
        return 2 * self.m * 5 ** (self.chi - 1)


# ---------------------------------------------------------------------------
# Circuit IR
# ---------------------------------------------------------------------------
class GateKind(str, Enum):
    H = "H"
    T = "T"
    CNOT = "CNOT"
    RZ = "RZ"


class Gateset(str, Enum):
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"


@dataclass(frozen=True, slots=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        arity = 2 if self.kind is GateKind.CNOT else 1
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind.value} takes {arity} operand(s), got {self.qubits}")
        if min(self.qubits) < 1:
            raise ValueError(f"qubit operands are 1-based, got {self.qubits}")
        if self.kind is GateKind.CNOT and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"CNOT control and target must differ, got {self.qubits}")
        if self.kind is GateKind.RZ:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"RZ needs a finite angle, got {self.angle}")
        elif self.angle is not None:
            raise ValueError(f"{self.kind.value} takes no angle")

    @classmethod
    def h(cls, qubit: int) -> Gate:
        return cls(GateKind.H, (qubit,))

    @classmethod
    def t(cls, qubit: int) -> Gate:
        return cls(GateKind.T, (qubit,))

    @classmethod
    def cnot(cls, control: int, target: int) -> Gate:
        return cls(GateKind.CNOT, (control, target))

    @classmethod
    def rz(cls, angle: float, qubit: int) -> Gate:
        return cls(GateKind.RZ, (qubit,), angle)


class CircuitMetadata(BaseModel):
    chi: int
    r: int
    gateset: Gateset
    epsilon: float | None = None
    sk_tolerance: float | None = None


@dataclass(slots=True)
class GateIR:
    """Ordered gate list; sources[i] is the term index gate i was generated from."""

    n: int
    gates: list[Gate] = field(default_factory=list)
    sources: list[int | None] = field(default_factory=list, compare=False)
    metadata: CircuitMetadata | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"a circuit needs n >= 1, got {self.n}")
        if self.sources and len(self.sources) != len(self.gates):
            raise ValueError("sources must be empty or parallel to gates")
        for gate in self.gates:
            if max(gate.qubits) > self.n:
                raise ValueError(f"gate {gate} acts outside n={self.n}")

    def __len__(self) -> int:
        return len(self.gates)


@dataclass(slots=True)
class Schedule:
    layers: list[list[int]]

    @property
    def depth(self) -> int:
        return len(self.layers)


class GateCounts(BaseModel):
    h: int = 0
    t: int = 0
    rz: int = 0
    cnot: int = 0

    @property
    def total(self) -> int:
        return self.h + self.t + self.rz + self.cnot

    def scaled(self, factor: int) -> GateCounts:
        return GateCounts(h=self.h * factor, t=self.t * factor, rz=self.rz * factor, cnot=self.cnot * factor)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.h, self.t, self.rz, self.cnot)


# ---------------------------------------------------------------------------
# Verification and experiment records
# ---------------------------------------------------------------------------
class VerificationResult(BaseModel):
    performed: bool
    tolerance: float
    phase_invariant: bool = False
    measured_error: float | None = None
    state_error: float | None = None
    seed: int | None = None
    passed: bool | None = None
    note: str | None = None


class CompileStats(BaseModel):
    n: int
    m: int
    m_bar: int
    group_mode: GroupMode
    t: float
    epsilon_requested: float
    epsilon: float
    chi: int
    r: int
    rigorous: bool
    gateset: Gateset
    sk_tolerance: float | None = None
    counts: GateCounts
    total_gates: int
    depth: int
    depth_ungrouped: int | None = None
    warnings: list[str] = Field(default_factory=list)
    verification: VerificationResult | None = None


class ErrorSample(BaseModel):
    n: int
    t: float
    r: int = 1
    order: int
    sample: int
    seed: int
    norm_h: float
    measured: float
    bound: float | None
    fit: float | None


# A fit further than this factor from the mean measured error is reported as deviating.
FIT_DEVIATION_FACTOR = 10.0


class ErrorAggregate(BaseModel):
    n: int
    t: float
    count: int
    mean_measured: float
    std_measured: float
    mean_bound: float | None
    mean_fit: float | None
    mean_ratio: float | None
    measured_to_fit: float | None
    fit_within_error_bars: bool | None
    fit_deviates: bool | None


class ErrorReport(BaseModel):
    """Per-sample Trotter error records; aggregates are always recomputed from them."""

    order: int
    seed: int
    samples: list[ErrorSample]

    def aggregates(self) -> list[ErrorAggregate]:
        cells: dict[tuple[int, float], list[ErrorSample]] = defaultdict(list)
        for record in self.samples:
            cells[(record.n, record.t)].append(record)
        rows = []
        for (n, t), records in sorted(cells.items()):
            measured = [rec.measured for rec in records]
            mean = statistics.fmean(measured)
            std = statistics.pstdev(measured) if len(measured) > 1 else 0.0
            bounds = [rec.bound for rec in records if rec.bound is not None]
            fits = [rec.fit for rec in records if rec.fit is not None]
            ratios = [rec.bound / rec.measured for rec in records if rec.bound is not None and rec.measured > 0]
            mean_fit = statistics.fmean(fits) if fits else None
            measured_to_fit = mean / mean_fit if mean_fit else None
            rows.append(
                ErrorAggregate(
                    n=n,
                    t=t,
                    count=len(records),
                    mean_measured=mean,
                    std_measured=std,
                    mean_bound=statistics.fmean(bounds) if bounds else None,
                    mean_fit=mean_fit,
                    mean_ratio=statistics.fmean(ratios) if ratios else None,
                    measured_to_fit=measured_to_fit,
                    fit_within_error_bars=None if mean_fit is None else abs(mean - mean_fit) <= 2 * std,
                    fit_deviates=None
                    if measured_to_fit is None
                    else not (1 / FIT_DEVIATION_FACTOR <= measured_to_fit <= FIT_DEVIATION_FACTOR),
                )
            )
        return rows

    def fit_deviations(self) -> list[ErrorAggregate]:
        """Cells whose mean measured error is off the empirical fit by more than FIT_DEVIATION_FACTOR."""
        return [row for row in self.aggregates() if row.fit_deviates]


class NormFit(BaseModel):
    coefficient: float
    exponent: float
    n_values: list[int]
    mean_norms: list[float]
    std_norms: list[float]
    samples: int
    seed: int


class ExtrapolationRow(BaseModel):
    n: int
    m: int
    norm_h: float
    r_order1: int
    r_order2: int
    n_exp_order1: int
    n_exp_order2: int
    ratio: float
    reference_order1: int | None = None
    reference_order2: int | None = None
    deviates: bool = False


class GroupScalingRow(BaseModel):
    model: str
    n: int
    m: int
    m_bar_commuting: int
    m_bar_disjoint: int


class AdditivityResult(BaseModel):
    r: int
    step_error: float
    total_error: float
    holds: bool


class GuaranteeSample(BaseModel):
    sample: int
    seed: int
    chi: int
    r: int
    epsilon: float
    measured: float
    within_half_epsilon: bool


class SKScaling(BaseModel):
    deltas: list[float]
    median_lengths: list[float]
    exponent: float


def format_real(value: float) -> str:
    """Shortest round-trip decimal; integral values drop the trailing '.0'."""
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text
