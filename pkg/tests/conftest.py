import os
import tempfile
from pathlib import Path

# Run records go to a throwaway SQLite file; core.database reads this at import.
_DB_DIR = Path(tempfile.mkdtemp(prefix="trotter-tests-"))
os.environ["DATABASE_URL"] = f"sqlite+aiosqlite:///{_DB_DIR / 'test_runs.db'}"
os.environ.setdefault("DENSE_QUBIT_CAP", "8")

import numpy as np
import pytest

from core.models import PAULI_AXES, PauliTerm
from simulation_compiler.solovay_kitaev import BaseNet, default_base_net


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "asyncio: mark test as async",
    )
    config.addinivalue_line(
        "markers",
        "slow: statistical experiments over many random Hamiltonians (deselect with -m 'not slow')",
    )


PAIRS_TEXT = "n=3\n1 X1 X2\n2 Y1 Y2\n4 Y1 Z3"


def random_term(rng: np.random.Generator, n: int, max_weight: int | None = None) -> PauliTerm:
    """Random non-identity Pauli string on n qubits with a coefficient in [-1, 1]."""
    weight = int(rng.integers(1, (max_weight or n) + 1))
    qubits = sorted(rng.choice(np.arange(1, n + 1), size=weight, replace=False).tolist())
    letters = rng.integers(0, 3, size=weight)
    return PauliTerm(
        coefficient=float(rng.uniform(-1, 1)),
        support={q: PAULI_AXES[int(letter)] for q, letter in zip(qubits, letters)},
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def pairs_text():
    return PAIRS_TEXT


@pytest.fixture(scope="session")
def base_net() -> BaseNet:
    """The default base net, built once per session."""
    return default_base_net()


@pytest.fixture(scope="session")
def small_net() -> BaseNet:
    """Short-word net for tests that only exercise the net mechanics."""
    return BaseNet.build(max_length=10, max_size=5_000)
