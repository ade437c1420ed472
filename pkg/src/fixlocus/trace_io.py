"""Reading and writing trace and method-list files, plus value normalization.

Trace files are UTF-8, one event per line::

    #trace v1 app=<package> env=<label>
    seq<TAB>thread<TAB>direction<TAB>callee<TAB>args<TAB>ret<TAB>stack

``args`` is a ``;``-separated list (``-`` when empty), ``ret`` is ``void``,
``?`` (unrecorded) or a value, and ``stack`` lists canonical method
references outermost first, separated by commas. Values are backslash-escaped
so that separators and the sentinel words survive a round trip.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyResult, InvariantViolation, MalformedLine
from .model import (
    IDENTITY_TOKEN,
    TIMESTAMP_TOKEN,
    UNRECORDED,
    VOID,
    Direction,
    MethodRef,
    Special,
    Trace,
    TraceEvent,
    is_boundary,
    validate_trace,
)

TRACE_MAGIC = "#trace v1"
METHODS_MAGIC = "#methods"

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r", ";": "\\;"}
_UNESCAPES = {"t": "\t", "n": "\n", "r": "\r"}
_SENTINELS = {"-", "void", "?"}


def normalize_value(raw: str, patterns: Sequence[tuple[re.Pattern, str]] = ()) -> str:
    """Strip run-specific noise from a recorded value.

    Object identities ``Type@1f2e`` become ``Type@<id>`` and decimal runs longer
    than 12 digits become ``<ts>``. Extra ``(regex, replacement)`` pairs are
    applied afterwards, in order.
    """
    value = IDENTITY_TOKEN.sub(r"\1@<id>", raw)
    value = TIMESTAMP_TOKEN.sub("<ts>", value)
    for pattern, repl in patterns:
        value = pattern.sub(repl, value)
    return value


def load_patterns(path: str | Path) -> list[tuple[re.Pattern, str]]:
    """Read a normalization pattern file: ``regex`` or ``regex<TAB>replacement`` per line."""
    patterns = []
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        regex, _, repl = line.partition("\t")
        try:
            patterns.append((re.compile(regex), repl if _ else "<norm>"))
        except re.error as exc:
            raise MalformedLine(line_no, f"bad pattern: {exc}") from None
    return patterns


def _escape(value: str) -> str:
    out = "".join(_ESCAPES.get(ch, ch) for ch in value)
    return "\\" + out if out in _SENTINELS else out


def _unescape(field: str) -> str:
    (value,) = _split_escaped(field, None)
    return value


def _split_escaped(field: str, sep: str | None) -> list[str]:
    """Split on unescaped ``sep`` and undo escaping in every part."""
    parts, buf = [], []
    it = iter(field)
    for ch in it:
        if ch == "\\":
            nxt = next(it, None)
            if nxt is None:
                raise ValueError("dangling escape")
            buf.append(_UNESCAPES.get(nxt, nxt))
        elif ch == sep:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    parts.append("".join(buf))
    return parts


def _split_stack(field: str) -> list[str]:
    # descriptors may contain commas, so only split at parenthesis depth 0
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(field):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(field[start:i])
            start = i + 1
    parts.append(field[start:])
    return parts


def _format_event(ev: TraceEvent) -> str:
    args = ";".join(_escape(a) for a in ev.args) if ev.args else "-"
    if ev.args == ("",):
        args = "\\"  # lone escape marks a single empty argument
    ret = ev.ret.value if isinstance(ev.ret, Special) else _escape(ev.ret)
    stack = ",".join(str(m) for m in ev.stack)
    return "\t".join(
        [str(ev.seq), str(ev.thread), ev.direction.value, str(ev.callee), args, ret, stack]
    )


def write_trace(trace: Trace) -> str:
    lines = [f"{TRACE_MAGIC} app={trace.app_package} env={_escape(trace.env_label)}"]
    lines.extend(_format_event(ev) for ev in trace.events)
    return "\n".join(lines) + "\n"


def _parse_header(line: str, magic: str) -> dict[str, str]:
    if not line.startswith(magic):
        raise MalformedLine(1, f"expected header starting with {magic!r}")
    rest = line[len(magic):].lstrip(" ")
    fields: dict[str, str] = {}
    m = re.match(r"app=(\S+)(?: env=(.*))?$", rest)
    if m is None:
        raise MalformedLine(1, "header lacks app=<package>")
    fields["app"] = m[1]
    if m[2] is not None:
        fields["env"] = m[2]
    return fields


def _parse_method(text: str, line_no: int, what: str) -> MethodRef:
    try:
        return MethodRef.parse(text)
    except ValueError:
        raise MalformedLine(line_no, f"bad {what} method reference {text!r}") from None


def _parse_event(line: str, line_no: int, patterns) -> TraceEvent:
    fields = line.split("\t")
    if len(fields) != 7:
        raise MalformedLine(
            line_no, f"expected 7 tab-separated fields (seq..stack), found {len(fields)}"
        )
    seq_s, thread_s, dir_s, callee_s, args_s, ret_s, stack_s = fields
    try:
        seq, thread = int(seq_s), int(thread_s)
    except ValueError:
        raise MalformedLine(line_no, "seq and thread must be integers") from None
    try:
        direction = Direction(dir_s)
    except ValueError:
        raise MalformedLine(line_no, f"unknown direction {dir_s!r}") from None
    callee = _parse_method(callee_s, line_no, "callee")
    try:
        if args_s == "-":
            args = []
        elif args_s == "\\":
            args = [""]
        else:
            args = _split_escaped(args_s, ";")
        if ret_s == "void":
            ret = VOID
        elif ret_s == "?":
            ret = UNRECORDED
        else:
            ret = _unescape(ret_s)
    except ValueError as exc:
        raise MalformedLine(line_no, str(exc)) from None
    if not stack_s:
        raise MalformedLine(line_no, "empty stack field")
    stack = [_parse_method(p, line_no, "stack") for p in _split_stack(stack_s)]
    args = [normalize_value(a, patterns) for a in args]
    if isinstance(ret, str):
        ret = normalize_value(ret, patterns)
    return TraceEvent(seq, thread, direction, callee, args, ret, stack)


def parse_trace(
    stream: Iterable[str] | str,
    *,
    validate: bool = True,
    patterns: Sequence[tuple[re.Pattern, str]] = (),
) -> Trace:
    """Parse a trace file.

    ``stream`` is any iterable of lines or a whole document as a string.
    Values are normalized while reading. With ``validate`` (the default) the
    result is checked and :class:`InvariantViolation` raised on any problem;
    unvalidated parsing is meant for raw tracer dumps fed to
    :func:`filter_boundary_methods`.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    lines = iter(stream)
    header = next(lines, None)
    if header is None:
        raise MalformedLine(1, "empty file")
    meta = _parse_header(header.rstrip("\r\n"), TRACE_MAGIC)
    try:
        env = _unescape(meta.get("env", ""))
    except ValueError:
        raise MalformedLine(1, "bad env label") from None
    events = []
    for line_no, line in enumerate(lines, 2):
        line = line.rstrip("\r\n")
        if not line:
            continue
        events.append(_parse_event(line, line_no, patterns))
    trace = Trace(meta["app"], env, events)
    if validate:
        violations = validate_trace(trace)
        if violations:
            raise InvariantViolation(violations)
    return trace


def read_trace(path: str | Path, **kwargs) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh, **kwargs)


@dataclass(frozen=True)
class MethodList:
    app_package: str
    methods: frozenset[MethodRef]

    def __len__(self) -> int:
        return len(self.methods)


def filter_boundary_methods(full_trace: Trace, app_package: str) -> MethodList:
    """Methods that must be instrumented to observe the boundary of ``app_package``.

    Keeps the callees of API calls made from app code into the framework and
    of callbacks made by the framework into app code. Calls internal to the
    app or to the framework are dropped.
    """
    methods = frozenset(ev.callee for ev in full_trace.events if is_boundary(ev, app_package))
    if not methods:
        raise EmptyResult(f"no boundary method found for app package prefix {app_package!r}")
    return MethodList(app_package, methods)


def write_method_list(mlist: MethodList) -> str:
    lines = [f"{METHODS_MAGIC} app={mlist.app_package}"]
    lines.extend(sorted(str(m) for m in mlist.methods))
    return "\n".join(lines) + "\n"


def parse_method_list(stream: Iterable[str] | str) -> MethodList:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    lines = iter(stream)
    header = next(lines, None)
    if header is None:
        raise MalformedLine(1, "empty file")
    meta = _parse_header(header.rstrip("\r\n"), METHODS_MAGIC)
    methods = set()
    for line_no, line in enumerate(lines, 2):
        line = line.strip()
        if line:
            methods.add(_parse_method(line, line_no, "listed"))
    return MethodList(meta["app"], frozenset(methods))
