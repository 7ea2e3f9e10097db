"""Exception types raised by the network library and the experiment harness."""

from __future__ import annotations

from typing import Optional


class RBNError(Exception):
    pass


class ContractViolation(RBNError, ValueError):
    """A pre-condition on lengths, indices or ranges does not hold."""


class NoCriticalBiasError(RBNError, ValueError):
    pass


class OracleLimitError(RBNError):
    pass


class EmptyAttractorSetError(RBNError):
    pass


class UndefinedRatioError(RBNError, ZeroDivisionError):
    pass


class ConfigError(RBNError):
    pass


class NetworkFileError(RBNError):
    """
    Raised when a network file cannot be parsed.

    Carries the file path, an optional line number (JSON syntax errors) and
    the offending field (e.g. "tables[3]") so the message points at the data.
    """

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        field: Optional[str] = None,
    ):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        prefix = ", ".join(where) + ": " if where else ""
        super().__init__(f"{prefix}{message}")
