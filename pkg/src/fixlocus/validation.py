"""Input checking helpers used by the estimators and the CLI."""

from __future__ import annotations

import os
import re
from pathlib import Path
from typing import Sequence

from .baselines import CoverageMatrix, parse_coverage
from .errors import AppMismatch, InvariantViolation
from .model import Trace, validate_trace
from .trace_io import read_trace

TraceLike = Trace | str | os.PathLike


def check_trace(
    trace: TraceLike,
    name: str = "trace",
    patterns: Sequence[tuple[re.Pattern, str]] = (),
) -> Trace:
    """Return a validated Trace from a Trace object or a trace file path."""
    if isinstance(trace, (str, os.PathLike)):
        return read_trace(Path(trace), patterns=patterns)
    if not isinstance(trace, Trace):
        raise TypeError(f"{name} must be a Trace or a path, got {type(trace).__name__}")
    violations = validate_trace(trace)
    if violations:
        raise InvariantViolation([f"{name}: {v}" for v in violations])
    return trace


def check_trace_pair(
    baseline: TraceLike,
    failure: TraceLike,
    patterns: Sequence[tuple[re.Pattern, str]] = (),
) -> tuple[Trace, Trace]:
    b = check_trace(baseline, "baseline", patterns)
    f = check_trace(failure, "failure", patterns)
    if b.app_package != f.app_package:
        raise AppMismatch(f"baseline app {b.app_package!r} != failure app {f.app_package!r}")
    return b, f


def check_coverage(matrix: CoverageMatrix | str | os.PathLike) -> CoverageMatrix:
    if isinstance(matrix, CoverageMatrix):
        return matrix
    with open(matrix, encoding="utf-8") as fh:
        return parse_coverage(fh)
