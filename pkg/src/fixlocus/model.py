"""Trace data model: method identities, boundary events and traces.

Only boundary interactions are recorded. An API call goes from app code into
the framework, a callback goes from the framework into app code. Every event
carries the call stack that led to it, outermost frame first, so that caller
hierarchies can be rebuilt without recording internal calls.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

_IDENT = r"[A-Za-z_$<][\w$<>\-]*"
_METHOD_RE = re.compile(
    rf"^(?P<package>{_IDENT}(?:\.{_IDENT})*)\.(?P<cls>{_IDENT})\.(?P<method>{_IDENT})"
    r"\((?P<descriptor>[^()\s]*)\)$"
)

# noise patterns rewritten by trace_io.normalize_value
IDENTITY_TOKEN = re.compile(r"(?<![\w$.])([A-Za-z_$][\w$.]*)@[0-9a-fA-F]+\b")
TIMESTAMP_TOKEN = re.compile(r"(?<![\w.])\d{13,}(?![\w.])")


@dataclass(frozen=True, order=True)
class MethodRef:
    package: str
    cls: str
    method: str
    descriptor: str = ""

    def __post_init__(self):
        if not (self.package and self.cls and self.method):
            raise ValueError(f"incomplete method reference: {self!r}")

    @classmethod
    def parse(cls, text: str) -> "MethodRef":
        m = _METHOD_RE.match(text)
        if m is None:
            raise ValueError(f"not a canonical method reference: {text!r}")
        return cls(m["package"], m["cls"], m["method"], m["descriptor"])

    def __str__(self) -> str:
        return f"{self.package}.{self.cls}.{self.method}({self.descriptor})"

    @property
    def short(self) -> str:
        return f"{self.cls}.{self.method}"

    def belongs_to(self, app_package: str) -> bool:
        return self.package == app_package or self.package.startswith(app_package + ".")


class Direction(enum.Enum):
    API_CALL = "API_CALL"
    CALLBACK = "CALLBACK"


class Origin(enum.Enum):
    APP = "APP"
    FRAMEWORK = "FRAMEWORK"


def origin_of(method: MethodRef, app_package: str) -> Origin:
    return Origin.APP if method.belongs_to(app_package) else Origin.FRAMEWORK


class Special(enum.Enum):
    """Return values that are not data."""

    VOID = "void"
    UNRECORDED = "?"


VOID = Special.VOID
UNRECORDED = Special.UNRECORDED

SYNTHETIC_ENTRY = MethodRef("<root>", "Main", "main")
ZYGOTE_ENTRY = MethodRef("com.android.internal.os", "ZygoteInit", "main", "java.lang.String[]")
_ENTRY_KEYS = {(m.package, m.cls, m.method) for m in (SYNTHETIC_ENTRY, ZYGOTE_ENTRY)}


def is_entry_point(method: MethodRef) -> bool:
    # descriptors are ignored so tracers that do not record them still match
    return (method.package, method.cls, method.method) in _ENTRY_KEYS


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    thread: int
    direction: Direction
    callee: MethodRef
    args: tuple[str, ...] = ()
    ret: str | Special = VOID
    stack: tuple[MethodRef, ...] = ()

    def __post_init__(self):
        # accept lists for convenience, store tuples for hashing
        object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "stack", tuple(self.stack))

    @property
    def caller(self) -> MethodRef | None:
        return self.stack[-1] if self.stack else None

    @property
    def path(self) -> tuple[MethodRef, ...]:
        """Stack extended with the callee as innermost frame."""
        return self.stack + (self.callee,)


@dataclass(frozen=True)
class Trace:
    app_package: str
    env_label: str = ""
    events: tuple[TraceEvent, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def __len__(self) -> int:
        return len(self.events)


def is_boundary(event: TraceEvent, app_package: str) -> bool:
    """True when the event crosses the app/framework border as its direction claims."""
    caller = event.caller
    if caller is None:
        return False
    callee_app = event.callee.belongs_to(app_package)
    caller_app = caller.belongs_to(app_package)
    if event.direction is Direction.API_CALL:
        return caller_app and not callee_app
    return callee_app and not caller_app


def validate_trace(trace: Trace) -> list[str]:
    """Return one description per violated invariant, empty when the trace is well formed."""
    violations = []
    seen: set[int] = set()
    prev = None
    pkg = trace.app_package
    for ev in trace.events:
        tag = f"seq {ev.seq}"
        if ev.seq < 0:
            violations.append(f"{tag}: seq non-negative")
        if ev.seq in seen:
            violations.append(f"{tag}: seq values unique")
        elif prev is not None and ev.seq < prev:
            violations.append(f"{tag}: seq sorted")
        seen.add(ev.seq)
        prev = ev.seq if prev is None else max(prev, ev.seq)

        if not ev.stack:
            violations.append(f"{tag}: stack non-empty")
        else:
            if not is_entry_point(ev.stack[0]):
                violations.append(f"{tag}: stack starts at entry point (found {ev.stack[0]})")
            if not is_boundary(ev, pkg):
                if ev.direction is Direction.API_CALL:
                    violations.append(
                        f"{tag}: direction API_CALL requires app caller and framework callee"
                    )
                else:
                    violations.append(
                        f"{tag}: direction CALLBACK requires framework caller and app callee"
                    )
        values = list(ev.args) + ([ev.ret] if isinstance(ev.ret, str) else [])
        if any(IDENTITY_TOKEN.search(v) or TIMESTAMP_TOKEN.search(v) for v in values):
            violations.append(f"{tag}: values are normalized (no raw identities or timestamps)")
    return violations
