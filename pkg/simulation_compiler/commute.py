"""
Commutation criterion and greedy grouping of Hamiltonian terms.

Two Pauli strings commute iff the number of qubits on which both act with
*different* non-identity letters is even. With S_v the set of qubits carrying
letter v, that count is the sum over the six ordered pairs v != w of
|S_v(a) & S_w(b)|.
"""

import logging
import statistics
from collections.abc import Callable
from itertools import permutations

from core.models import (
    PAULI_AXES,
    GroupMode,
    GroupPartition,
    GroupStats,
    HamiltonianSpec,
    PauliTerm,
)

logger = logging.getLogger(__name__)


def cross_overlap(a: PauliTerm, b: PauliTerm) -> int:
    """Sum of |S_v(a) & S_w(b)| over ordered letter pairs v != w."""
    return sum(len(a.positions(v) & b.positions(w)) for v, w in permutations(PAULI_AXES, 2))


def commutes(a: PauliTerm, b: PauliTerm) -> bool:
    return cross_overlap(a, b) % 2 == 0


def disjoint(a: PauliTerm, b: PauliTerm) -> bool:
    # Same-letter overlaps count too: parallel execution needs disjoint supports.
    return not (a.support.keys() & b.support.keys())


def _always_separate(a: PauliTerm, b: PauliTerm) -> bool:
    return False


_PREDICATES: dict[GroupMode, Callable[[PauliTerm, PauliTerm], bool]] = {
    GroupMode.COMMUTING: commutes,
    GroupMode.DISJOINT: disjoint,
    GroupMode.NONE: _always_separate,
}


def partition_terms(terms: list[PauliTerm], mode: GroupMode) -> GroupPartition:
    """First-fit: each term joins the lowest-indexed group whose members all accept it."""
    if mode is GroupMode.NONE:
        return GroupPartition(groups=[[j] for j in range(len(terms))], mode=mode)

    accepts = _PREDICATES[mode]
    groups: list[list[int]] = []
    for j, term in enumerate(terms):
        for group in groups:
            if all(accepts(terms[i], term) for i in group):
                group.append(j)
                break
        else:
            groups.append([j])
    return GroupPartition(groups=groups, mode=mode)


def sort_hamiltonian(
    spec: HamiltonianSpec, mode: GroupMode = GroupMode.COMMUTING
) -> tuple[HamiltonianSpec, GroupPartition]:
    """
    Reorder terms group by group and record the group boundaries.

    mode=none returns the spec unchanged with one group per term.
    """
    partition = partition_terms(spec.terms, mode)
    if mode is GroupMode.NONE:
        logger.info("sort_hamiltonian_end mode=%s m=%s m_bar=%s", mode.value, spec.m, partition.m_bar)
        return spec, partition

    terms, boundaries = [], []
    for group in partition.groups:
        start = len(terms)
        terms.extend(spec.terms[i] for i in group)
        boundaries.append((start, len(terms)))

    sorted_spec = HamiltonianSpec(n=spec.n, k=spec.k, terms=terms, group_boundaries=boundaries)
    logger.info("sort_hamiltonian_end mode=%s m=%s m_bar=%s", mode.value, spec.m, partition.m_bar)
    return sorted_spec, partition


def group_count_stats(partition: GroupPartition) -> GroupStats:
    sizes = [len(group) for group in partition.groups]
    return GroupStats(
        m=sum(sizes),
        m_bar=len(sizes),
        max_size=max(sizes, default=0),
        mean_size=statistics.fmean(sizes) if sizes else 0.0,
    )
