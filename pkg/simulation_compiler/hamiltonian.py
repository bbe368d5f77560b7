"""
Hamiltonian input: text format, serialization and the example generators.

Text format (UTF-8, line based):

    n=<int>
    k=<int>                       (optional)
    <coeff> <L><q> [<L><q> ...]   (one term per line, L in X/Y/Z, q 1-based)

``#`` starts a comment and blank lines are ignored. A line that is exactly
``# group`` marks the start of a commuting group in a sorted Hamiltonian.
"""

import logging
import re
from collections.abc import Sequence
from itertools import product

import numpy as np
from pydantic import ValidationError

from core.errors import HamiltonianFormatError
from core.models import PAULI_AXES, HamiltonianSpec, PauliLetter, PauliTerm, format_real

logger = logging.getLogger(__name__)

GROUP_MARKER = "# group"

_HEADER_RE = re.compile(r"^([nk])\s*=\s*(\S+)$")
_FACTOR_RE = re.compile(r"^([IXYZ])(\d+)$")


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------
def parse_hamiltonian(text: str) -> HamiltonianSpec:
    n: int | None = None
    k: int | None = None
    terms: list[PauliTerm] = []
    group_starts: list[int] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped == GROUP_MARKER:
            group_starts.append(len(terms))
            continue
        content = stripped.split("#", 1)[0].strip()
        if not content:
            continue

        header = _HEADER_RE.match(content)
        if header:
            key, value = header.groups()
            if terms:
                raise HamiltonianFormatError(f"header '{key}=' must precede the terms", line_no)
            try:
                parsed = int(value)
            except ValueError:
                raise HamiltonianFormatError(f"'{key}' must be an integer, got {value!r}", line_no) from None
            if parsed < 1:
                raise HamiltonianFormatError(f"'{key}' must be positive, got {parsed}", line_no)
            if key == "n":
                n = parsed
            else:
                k = parsed
            continue

        if n is None:
            raise HamiltonianFormatError("missing 'n=<int>' header before the first term", line_no)
        terms.append(_parse_term_line(content, n, line_no))

    if n is None:
        raise HamiltonianFormatError("missing 'n=<int>' header")
    if not terms:
        raise HamiltonianFormatError("no terms found")

    boundaries = _boundaries_from_markers(group_starts, len(terms))
    try:
        spec = HamiltonianSpec(n=n, k=k, terms=terms, group_boundaries=boundaries)
    except ValidationError as exc:
        raise HamiltonianFormatError(exc.errors()[0]["msg"]) from exc

    logger.debug("parse_hamiltonian n=%s m=%s groups=%s", spec.n, spec.m, len(boundaries or ()))
    return spec


def _parse_term_line(content: str, n: int, line_no: int) -> PauliTerm:
    coeff_token, *factors = content.split()
    try:
        coefficient = float(coeff_token)
    except ValueError:
        raise HamiltonianFormatError(f"unparsable coefficient {coeff_token!r}", line_no) from None
    if not factors:
        raise HamiltonianFormatError("all-identity term (no Pauli factors)", line_no)

    support: dict[int, PauliLetter] = {}
    for token in factors:
        match = _FACTOR_RE.match(token)
        if match is None:
            raise HamiltonianFormatError(f"malformed Pauli factor {token!r}", line_no)
        letter, qubit = PauliLetter(match.group(1)), int(match.group(2))
        if letter is PauliLetter.I:
            raise HamiltonianFormatError(f"identity factor {token!r} must be left implicit", line_no)
        if not 1 <= qubit <= n:
            raise HamiltonianFormatError(f"qubit index {qubit} outside [1, {n}]", line_no)
        if qubit in support:
            raise HamiltonianFormatError(f"duplicate qubit index {qubit}", line_no)
        support[qubit] = letter

    try:
        return PauliTerm(coefficient=coefficient, support=support)
    except ValidationError as exc:
        raise HamiltonianFormatError(exc.errors()[0]["msg"], line_no) from exc


def _boundaries_from_markers(starts: list[int], m: int) -> list[tuple[int, int]] | None:
    if not starts:
        return None
    cuts = sorted({0, *(s for s in starts if s < m)})
    return [(lo, hi) for lo, hi in zip(cuts, cuts[1:] + [m])]


def serialize_hamiltonian(spec: HamiltonianSpec) -> str:
    lines = [f"n={spec.n}"]
    if spec.k is not None:
        lines.append(f"k={spec.k}")
    starts = {start for start, _ in spec.group_boundaries or ()}
    for j, term in enumerate(spec.terms):
        if j in starts:
            lines.append(GROUP_MARKER)
        lines.append(f"{format_real(term.coefficient)} {term.label}")
    return "\n".join(lines)


def drop_zero_terms(spec: HamiltonianSpec) -> tuple[HamiltonianSpec, int]:
    """Remove zero-coefficient terms; group boundaries are discarded when anything is dropped."""
    kept = [term for term in spec.terms if term.coefficient != 0.0]
    dropped = spec.m - len(kept)
    if dropped == 0:
        return spec, 0
    if not kept:
        raise HamiltonianFormatError("every term has a zero coefficient")
    logger.warning("drop_zero_terms dropped=%s kept=%s", dropped, len(kept))
    return HamiltonianSpec(n=spec.n, k=spec.k, terms=kept), dropped


# ---------------------------------------------------------------------------
# Example Hamiltonians
# ---------------------------------------------------------------------------
def _pair(coefficient: float, p: int, q: int, a: PauliLetter, b: PauliLetter) -> PauliTerm:
    return PauliTerm(coefficient=coefficient, support={p: a, q: b})


def _finish(n: int, terms: list[PauliTerm], allow_zero: bool, k: int | None = None) -> HamiltonianSpec:
    if not allow_zero:
        terms = [term for term in terms if term.coefficient != 0.0]
    if not terms:
        raise ValueError("all generated terms have zero coefficient (pass allow_zero to keep them)")
    return HamiltonianSpec(n=n, k=k, terms=terms)


def honeycomb_qubit(rows: int, cols: int, r: int, c: int, sublattice: int) -> int:
    """Qubit index of sublattice site (0 = A, 1 = B) in cell (r, c), periodic in both directions."""
    return 2 * ((r % rows) * cols + (c % cols)) + sublattice + 1


def make_honeycomb(
    rows: int,
    cols: int,
    jx: float,
    jy: float,
    jz: float,
    allow_zero: bool = False,
) -> HamiltonianSpec:
    """
    Kitaev honeycomb model on a periodic brick-wall lattice of rows x cols cells.

    Each cell holds an A and a B site. From every B site three links leave:
    x to the A site of the next cell in the row, y to the A site of the cell
    below, z to the A site of its own cell. Terms are emitted cell by cell.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"honeycomb dimensions must be positive, got rows={rows} cols={cols}")

    terms = []
    for r in range(rows):
        for c in range(cols):
            b = honeycomb_qubit(rows, cols, r, c, 1)
            a_x = honeycomb_qubit(rows, cols, r, c + 1, 0)
            a_y = honeycomb_qubit(rows, cols, r + 1, c, 0)
            a_z = honeycomb_qubit(rows, cols, r, c, 0)
            terms.append(_pair(-jx, a_x, b, PauliLetter.X, PauliLetter.X))
            terms.append(_pair(-jy, a_y, b, PauliLetter.Y, PauliLetter.Y))
            terms.append(_pair(-jz, a_z, b, PauliLetter.Z, PauliLetter.Z))

    spec = _finish(2 * rows * cols, terms, allow_zero, k=2)
    logger.info("make_honeycomb rows=%s cols=%s n=%s m=%s", rows, cols, spec.n, spec.m)
    return spec


def make_pairing(
    n: int,
    gamma: Sequence[float],
    v_plus: Sequence[Sequence[float]] | np.ndarray,
    v_minus: Sequence[Sequence[float]] | np.ndarray | None = None,
    allow_zero: bool = False,
) -> HamiltonianSpec:
    """
    Qubit form of the pairing Hamiltonian: single-Z terms gamma_p/2, then for each
    pair p < l and sign r in (+, -) an XX term V^r_pl and a YY term r * V^r_pl.

    Only the upper triangle (l > p) of the coupling matrices is read. A zero
    coupling produces no terms; a zero gamma_p is dropped unless allow_zero.
    """
    gamma = np.asarray(gamma, dtype=float)
    v_plus = np.asarray(v_plus, dtype=float)
    v_minus = np.zeros((n, n)) if v_minus is None else np.asarray(v_minus, dtype=float)
    if n < 1:
        raise ValueError(f"pairing model needs n >= 1, got {n}")
    if gamma.shape != (n,):
        raise ValueError(f"gamma must have length {n}, got shape {gamma.shape}")
    for name, matrix in (("v_plus", v_plus), ("v_minus", v_minus)):
        if matrix.shape != (n, n):
            raise ValueError(f"{name} must be {n}x{n}, got shape {matrix.shape}")

    terms = [
        PauliTerm(coefficient=float(gamma[p]) / 2, support={p + 1: PauliLetter.Z})
        for p in range(n)
    ]
    terms = [t for t in terms if allow_zero or t.coefficient != 0.0]
    for p in range(n):
        for l in range(p + 1, n):
            for sign, matrix in ((1.0, v_plus), (-1.0, v_minus)):
                v = float(matrix[p, l])
                if v == 0.0:
                    continue
                terms.append(_pair(v, p + 1, l + 1, PauliLetter.X, PauliLetter.X))
                terms.append(_pair(sign * v, p + 1, l + 1, PauliLetter.Y, PauliLetter.Y))

    spec = _finish(n, terms, allow_zero=True, k=2 if n > 1 else 1)
    logger.info("make_pairing n=%s m=%s", n, spec.m)
    return spec


def sample_random_twobody(n: int, seed: int | np.random.SeedSequence) -> HamiltonianSpec:
    """
    Gaussian two-body ensemble: one v_p w_l term for every pair p < l and every
    (v, w) in {X, Y, Z}^2, coefficients i.i.d. standard normal.

    Coefficients are drawn in the emission order (p, l, v, w) from one
    ``numpy.random.default_rng(seed)`` stream.
    """
    if n < 2:
        raise ValueError(f"the two-body ensemble needs n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    coefficients = rng.standard_normal(9 * n * (n - 1) // 2)

    terms = []
    draws = iter(coefficients)
    for p in range(1, n + 1):
        for l in range(p + 1, n + 1):
            for v, w in product(PAULI_AXES, repeat=2):
                terms.append(_pair(float(next(draws)), p, l, v, w))
    return HamiltonianSpec(n=n, k=2, terms=terms)
