"""
Trotter-Suzuki product formulas and the default choice of order and step count.

Order chi here is the recursion depth of the symmetric formula: chi=1 is the
Strang splitting (error O(dt^3) per step), and each further level uses the
fractal recursion

    U_p(dt) = U_{p-1}(s dt)^2  U_{p-1}((1 - 4 s) dt)  U_{p-1}(s dt)^2,
    s = 1 / (4 - 4^{1/(2p - 1)}),

giving a per-step error O(dt^{2 chi + 1}).
"""

import logging
import math
import re
from collections.abc import Callable

from core.models import (
    ChiMode,
    ExponentialSeq,
    HamiltonianSpec,
    RMode,
    TSParams,
    format_real,
)
from simulation_compiler.circuitgen import predicted_counts

logger = logging.getLogger(__name__)

MAX_AUTO_CHI = 6
CEIL_SNAP = 1e-9

_SEQ_HEADER_RE = re.compile(r"^chi=(\d+)\s+r=(\d+)\s+dt=(\S+)$")


def _ceil(value: float) -> int:
    # Values within CEIL_SNAP of an integer are that integer carrying float noise.
    nearest = round(value)
    if abs(value - nearest) <= CEIL_SNAP:
        return int(nearest)
    return math.ceil(value)


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")


# ---------------------------------------------------------------------------
# Sequence construction
# ---------------------------------------------------------------------------
def s_coefficient(p: int) -> float:
    if p < 2:
        raise ValueError(f"s_p is defined for p >= 2, got {p}")
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * p - 1)))


def _expand(m: int, dt: float, chi: int) -> list[tuple[int, float]]:
    if chi == 1:
        half = dt / 2
        return [(j, half) for j in range(m)] + [(j, half) for j in reversed(range(m))]
    s = s_coefficient(chi)
    outer = _expand(m, s * dt, chi - 1)
    inner = _expand(m, (1 - 4 * s) * dt, chi - 1)
    return outer + outer + inner + outer + outer


def build_ts_step(spec: HamiltonianSpec, dt: float, chi: int, r: int = 1) -> ExponentialSeq:
    """
    One full step of the order-chi formula, in execution order.

    Term order follows the spec, so sorting the spec first keeps each group's
    exponentials adjacent. Adjacent repeats are not merged.
    """
    if chi < 1:
        raise ValueError(f"chi must be >= 1, got {chi}")
    entries = _expand(spec.m, dt, chi)
    logger.debug("build_ts_step m=%s chi=%s entries=%s", spec.m, chi, len(entries))
    return ExponentialSeq(entries=entries, dt=dt, chi=chi, r=r, m=spec.m)


def merge_adjacent(seq: ExponentialSeq) -> ExponentialSeq:
    """Fuse neighbouring exponentials of the same term; the product is unchanged."""
    merged: list[tuple[int, float]] = []
    for j, d in seq.entries:
        if merged and merged[-1][0] == j:
            merged[-1] = (j, merged[-1][1] + d)
        else:
            merged.append((j, d))
    return seq.model_copy(update={"entries": merged})


def parse_sequence(text: str) -> ExponentialSeq:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty sequence text")
    header = _SEQ_HEADER_RE.match(lines[0])
    if header is None:
        raise ValueError(f"malformed sequence header {lines[0]!r}")
    chi, r, dt = int(header.group(1)), int(header.group(2)), float(header.group(3))
    entries = []
    for line in lines[1:]:
        index, duration = line.split()
        entries.append((int(index), float(duration)))
    if not entries:
        raise ValueError("sequence has no entries")
    m = max(j for j, _ in entries) + 1
    return ExponentialSeq(entries=entries, dt=dt, chi=chi, r=r, m=m)


# ---------------------------------------------------------------------------
# Parameter selection
# ---------------------------------------------------------------------------
def _rigorous_base(m: int, a_max: float, t: float, chi: int) -> float:
    return 2 * m * (5 / 3) ** (chi - 1) * chi * a_max * t


def default_chi(m: int, a_max: float, t: float, epsilon: float) -> int:
    _require_positive(m=m, a_max=a_max, t=t, epsilon=epsilon)
    argument = m * a_max * t / epsilon
    if argument <= 1:
        return 1
    return max(1, _ceil(math.sqrt(math.log(argument, 25 / 3) / 2)))


def clamp_epsilon(m: int, a_max: float, t: float, epsilon: float, chi: int) -> float:
    _require_positive(m=m, a_max=a_max, t=t, epsilon=epsilon)
    return min(epsilon, _rigorous_base(m, a_max, t, chi))


def default_r(
    m: int, a_max: float, t: float, epsilon: float, chi: int, doubled_r: bool = False
) -> int:
    """
    Step count guaranteeing Trotter error <= epsilon / 2.

    With doubled_r the value is doubled before rounding up, which is the
    more conservative variant of the step-count choice.
    """
    _require_positive(m=m, a_max=a_max, t=t, epsilon=epsilon, chi=chi)
    base = _rigorous_base(m, a_max, t, chi)
    value = base ** (1 + 1 / (2 * chi)) / (epsilon / 2) ** (1 / (2 * chi))
    if doubled_r:
        value *= 2
    return max(1, _ceil(value))


def heuristic_r(norm_h: float, t: float, epsilon: float, n: int, order: int) -> int:
    """Empirical step count from the random two-body error fits; not a guarantee."""
    _require_positive(norm_h=norm_h, t=t, epsilon=epsilon, n=n)
    scaled = norm_h * t
    if order == 1:
        value = math.sqrt(2 / (3 * n**2 * epsilon)) * scaled**1.5
    elif order == 2:
        value = (540 / (n**2.5 * epsilon)) ** 0.25 * scaled**1.25 / 30
    else:
        raise ValueError(f"heuristic r is fitted for order 1 or 2, got {order}")
    return max(1, _ceil(value))


def order_crossover_epsilon(norm_h: float, t: float, n: int) -> float:
    _require_positive(norm_h=norm_h, t=t, n=n)
    return 16 * norm_h * t / (15 * n**1.5)


def preferred_order(norm_h: float, t: float, n: int, epsilon: float) -> int:
    return 1 if epsilon > order_crossover_epsilon(norm_h, t, n) else 2


def _rigorous_choice(
    spec: HamiltonianSpec, t: float, epsilon: float, chi: int, r: int, doubled_r: bool
) -> tuple[int, int, float]:
    # chi from the requested epsilon, clamp with that chi, then r from the clamped value
    m, a_max = spec.m, spec.a_max
    chi = chi or default_chi(m, a_max, t, epsilon)
    clamped = clamp_epsilon(m, a_max, t, epsilon, chi)
    r = r or default_r(m, a_max, t, clamped, chi, doubled_r)
    return chi, r, clamped


def _min_gate_chi(candidates: range, step_gates: int, r_for: Callable[[int], int]) -> int:
    costs = {chi: step_gates * 5 ** (chi - 1) * r_for(chi) for chi in candidates}
    best = min(costs, key=lambda chi: (costs[chi], chi))
    logger.info("min_gate_chi chosen=%s costs=%s", best, costs)
    return best


def resolve_params(
    spec: HamiltonianSpec,
    t: float,
    epsilon: float,
    chi: int = 0,
    r: int = 0,
    r_mode: RMode = RMode.RIGOROUS,
    chi_mode: ChiMode = ChiMode.DEFAULT,
    doubled_r: bool = False,
    norm_h: float | None = None,
) -> TSParams:
    """
    Fill in chi and r (0 means automatic) for a compile run.

    Heuristic mode needs a norm estimate; without one it falls back to the
    triangle bound sum |a_j|, which over-estimates ||H||.
    """
    _require_positive(t=t, epsilon=epsilon)
    if chi < 0 or r < 0:
        raise ValueError(f"chi and r must be >= 0, got chi={chi} r={r}")
    m, a_max = spec.m, spec.a_max
    auto_chi, auto_r = chi == 0, r == 0
    step_gates = predicted_counts(spec, chi=1, r=1).total

    if r_mode is RMode.HEURISTIC:
        if norm_h is None:
            norm_h = sum(abs(term.coefficient) for term in spec.terms)
        if auto_chi and chi_mode is ChiMode.MIN_GATES:
            chi = _min_gate_chi(
                range(1, 3), step_gates, lambda c: r or heuristic_r(norm_h, t, epsilon, spec.n, c)
            )
        elif auto_chi:
            chi = preferred_order(norm_h, t, spec.n, epsilon)
        if chi > 2:
            raise ValueError(f"heuristic r is only available for chi in {{1, 2}}, got {chi}")
        params = TSParams(
            t=t,
            chi=chi,
            r=r or heuristic_r(norm_h, t, epsilon, spec.n, chi),
            epsilon=epsilon,
            epsilon_requested=epsilon,
            a_max=a_max,
            m=m,
            auto_chi=auto_chi,
            auto_r=auto_r,
            rigorous=False,
            norm_h=norm_h,
        )
        logger.warning("resolve_params heuristic chi=%s r=%s: error is not guaranteed", params.chi, params.r)
        return params

    if auto_chi and chi_mode is ChiMode.MIN_GATES:
        chi = _min_gate_chi(
            range(1, MAX_AUTO_CHI + 1),
            step_gates,
            lambda c: _rigorous_choice(spec, t, epsilon, c, r, doubled_r)[1],
        )
    chi, r, clamped = _rigorous_choice(spec, t, epsilon, chi, r, doubled_r)
    params = TSParams(
        t=t,
        chi=chi,
        r=r,
        epsilon=clamped,
        epsilon_requested=epsilon,
        a_max=a_max,
        m=m,
        auto_chi=auto_chi,
        auto_r=auto_r,
        rigorous=True,
        doubled_r=doubled_r,
        norm_h=norm_h,
    )
    logger.info(
        "resolve_params chi=%s r=%s epsilon=%s clamped=%s",
        chi, r, format_real(epsilon), clamped < epsilon,
    )
    return params
