"""
Exception hierarchy for the compiler.

Format errors also subclass ValueError so callers that only care about
"bad input" can catch the builtin.
"""


class CompilerError(Exception):
    """Base class for every error raised by the compiler pipeline."""


class HamiltonianFormatError(CompilerError, ValueError):
    """Hamiltonian text could not be parsed into a valid spec."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class CircuitFormatError(CompilerError, ValueError):
    """Circuit text contains a malformed or invalid gate token."""

    def __init__(self, message: str, token: str | None = None):
        self.token = token
        suffix = f" (token {token!r})" if token is not None else ""
        super().__init__(f"{message}{suffix}")


class InconsistentSequenceError(CompilerError):
    """An exponential sequence does not belong to the Hamiltonian it is paired with."""


class DimensionCapExceeded(CompilerError):
    """Dense evaluation requested above the configured qubit cap."""

    def __init__(self, n: int, cap: int):
        self.n = n
        self.cap = cap
        super().__init__(f"dense evaluation needs n <= {cap}, got n={n}")


class ToleranceUnreachable(CompilerError):
    """Solovay-Kitaev recursion could not reach the requested tolerance."""

    def __init__(self, delta: float, achieved: float, depth: int):
        self.delta = delta
        self.achieved = achieved
        self.depth = depth
        super().__init__(
            f"tolerance {delta:.3e} unreachable within recursion depth {depth}; "
            f"best achieved distance {achieved:.3e}"
        )


class ConfigError(CompilerError, ValueError):
    """Invalid run configuration."""


class ReportNotFoundError(CompilerError, KeyError):
    """No stored report with the requested id (or of the requested kind)."""
