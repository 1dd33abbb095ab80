"""Exception types shared across the toolkit."""

from __future__ import annotations


class ContractError(ValueError):
    """An input violates the documented pre-conditions of an operation."""


class ConlluParseError(ContractError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class TreeValidationError(ContractError):
    def __init__(self, violation):
        self.violation = violation
        super().__init__(str(violation))


class DegenerateInputError(ContractError):
    """Raised for inputs with nothing to project, e.g. an empty side."""
