"""Exception types shared across the package."""

from __future__ import annotations


class RxcapError(Exception):
    """Base class for all rxcap-specific errors."""


class GraphFormatError(RxcapError):
    """Malformed graph text input. Carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UcpFormatError(RxcapError):
    """Malformed unique-coverage text input. Carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ExhaustiveLimitError(RxcapError):
    """An exhaustive enumeration was refused because the instance is too large.

    The caller may raise the corresponding limit explicitly to force the run.
    """
