"""Exception hierarchy shared by the fixlocus modules."""

from __future__ import annotations


class FixLocusError(Exception):
    """Base class for every error raised by fixlocus."""


class MalformedLine(FixLocusError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class InvariantViolation(FixLocusError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class EmptyResult(FixLocusError):
    """No boundary method matched the requested app package."""


class AppMismatch(FixLocusError):
    pass


class NoSibs(FixLocusError):
    pass


class AnchorNotInTrace(FixLocusError):
    pass


class EmptyRanking(FixLocusError):
    pass


class NoFailingTest(FixLocusError):
    pass


class InvalidSpec(FixLocusError):
    pass
