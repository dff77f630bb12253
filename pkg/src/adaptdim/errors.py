from __future__ import annotations

from typing import Any


class AdaptDimError(RuntimeError):
    """Base error; `exit_code` is what the CLI returns for it."""

    exit_code = 5


class InputError(AdaptDimError):
    exit_code = 2

    def __init__(self, message: str, *, details: Any = None):
        super().__init__(message)
        self.details = details


class NumericError(AdaptDimError):
    exit_code = 3


class NoCertificateError(NumericError):
    """The solver hit its iteration cap without proving feasibility or infeasibility."""

    def __init__(self, message: str, *, iterations: int | None = None, budget: float | None = None):
        super().__init__(message)
        self.iterations = iterations
        self.budget = budget


class ScaleExceededError(AdaptDimError):
    exit_code = 4

    def __init__(self, message: str = "oracle scale exceeded", *, limit: int | None = None):
        super().__init__(message)
        self.limit = limit
