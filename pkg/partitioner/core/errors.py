"""
Exception hierarchy shared by services, the CLI and the HTTP routes.
"""
from typing import Optional


class PartitionerError(ValueError):
    """
    Base error for every domain failure.

    Attributes:
        code: Machine-readable error name (e.g. "dimension-mismatch")
        exit_code: Process exit code used by the CLI
        http_status: Status code used by the HTTP routes
    """

    exit_code: int = 2
    http_status: int = 400

    def __init__(self, code: str, message: Optional[str] = None):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class InputValidationError(PartitionerError):
    """Invalid user input: malformed files, bad coefficients, wrong schema version."""

    exit_code = 2
    http_status = 422


class SolverInfeasibleError(PartitionerError):
    """No integral feasible point exists (or the program is unbounded)."""

    exit_code = 3
    http_status = 409


class SolverLimitError(PartitionerError):
    """A time or node limit stopped the solver."""

    exit_code = 4
    http_status = 504
