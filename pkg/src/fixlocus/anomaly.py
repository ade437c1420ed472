"""Trace differencing and Suspicious Invocation Block (SIB) extraction."""

from __future__ import annotations

import bisect
import csv
import enum
import io
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Sequence

from .errors import AppMismatch
from .model import Direction, MethodRef, Special, Trace, TraceEvent


@dataclass(frozen=True)
class DiffKey:
    direction: Direction
    callee: str
    payload: tuple[str, ...] | None = None


class HunkKind(enum.Enum):
    INSERTED = "INSERTED"
    DELETED = "DELETED"
    REPLACED = "REPLACED"


@dataclass(frozen=True)
class Hunk:
    kind: HunkKind
    baseline_span: tuple[int, int]
    failure_span: tuple[int, int]
    # set only by per-thread diffing; spans then index that thread's events
    thread: int | None = None


@dataclass(frozen=True)
class Sib:
    id: int
    kind: HunkKind
    events: tuple[TraceEvent, ...]
    weight: int
    anchor_stack: tuple[MethodRef, ...]
    # baseline-side events of a REPLACED hunk; they do not count towards weight
    replaced: tuple[TraceEvent, ...] = ()

    @property
    def callees(self) -> list[MethodRef]:
        seen: dict[MethodRef, None] = {}
        for ev in self.events + self.replaced:
            seen.setdefault(ev.callee, None)
        return list(seen)


def _payload(ev: TraceEvent) -> tuple[str, ...]:
    ret = ev.ret.value if isinstance(ev.ret, Special) else "=" + ev.ret
    return ev.args + (ret,)


def project_keys(trace: Trace, value_sensitive: bool = False) -> list[DiffKey]:
    return [
        DiffKey(ev.direction, str(ev.callee), _payload(ev) if value_sensitive else None)
        for ev in trace.events
    ]


def lcs_alignment(a: Sequence[Hashable], b: Sequence[Hashable]) -> list[tuple[int, int]]:
    """Matched index pairs of a longest common subsequence of ``a`` and ``b``.

    Among all maximum-length alignments the one with the lexicographically
    smallest list of ``(i, j)`` pairs is returned, so earlier elements of ``a``
    are matched first and each at its earliest possible position in ``b``.
    """
    n, m = len(a), len(b)
    pairs = []
    p = 0
    while p < n and p < m and a[p] == b[p]:
        pairs.append((p, p))
        p += 1
    a_rest, b_rest = a[p:], b[p:]
    n2, m2 = len(a_rest), len(b_rest)
    if not n2 or not m2:
        return pairs

    # suffix[i][j] = LCS length of a_rest[i:] and b_rest[j:]
    suffix = [[0] * (m2 + 1) for _ in range(n2 + 1)]
    for i in range(n2 - 1, -1, -1):
        row, below, ai = suffix[i], suffix[i + 1], a_rest[i]
        for j in range(m2 - 1, -1, -1):
            if ai == b_rest[j]:
                row[j] = below[j + 1] + 1
            else:
                r, d = row[j + 1], below[j]
                row[j] = r if r > d else d

    positions: dict[Hashable, list[int]] = defaultdict(list)
    for j, key in enumerate(b_rest):
        positions[key].append(j)

    i = j = 0
    remaining = suffix[0][0]
    while remaining and i < n2:
        occ = positions.get(a_rest[i])
        # only the first occurrence at or after j can be optimal for a_rest[i]
        k = bisect.bisect_left(occ, j) if occ else 0
        if occ and k < len(occ) and suffix[i + 1][occ[k] + 1] + 1 == remaining:
            jj = occ[k]
            pairs.append((i + p, jj + p))
            j = jj + 1
            remaining -= 1
        i += 1
    return pairs


def hunks_from_alignment(
    pairs: Sequence[tuple[int, int]], n: int, m: int, thread: int | None = None
) -> list[Hunk]:
    hunks = []
    bi = fi = 0
    for i, j in list(pairs) + [(n, m)]:
        if i > bi or j > fi:
            if i == bi:
                kind = HunkKind.INSERTED
            elif j == fi:
                kind = HunkKind.DELETED
            else:
                kind = HunkKind.REPLACED
            hunks.append(Hunk(kind, (bi, i), (fi, j), thread))
        bi, fi = i + 1, j + 1
    return hunks


def _thread_view(trace: Trace, thread: int) -> Trace:
    return Trace(trace.app_package, trace.env_label, [e for e in trace.events if e.thread == thread])


def diff_traces(
    baseline: Trace,
    failure: Trace,
    value_sensitive: bool = False,
    per_thread: bool = False,
) -> list[Hunk]:
    """Non-matching regions of an LCS alignment of the two projected key sequences."""
    if baseline.app_package != failure.app_package:
        raise AppMismatch(
            f"baseline app {baseline.app_package!r} != failure app {failure.app_package!r}"
        )
    if not per_thread:
        a = project_keys(baseline, value_sensitive)
        b = project_keys(failure, value_sensitive)
        return hunks_from_alignment(lcs_alignment(a, b), len(a), len(b))

    hunks = []
    threads = sorted({e.thread for e in baseline.events} | {e.thread for e in failure.events})
    for t in threads:
        a = project_keys(_thread_view(baseline, t), value_sensitive)
        b = project_keys(_thread_view(failure, t), value_sensitive)
        hunks.extend(hunks_from_alignment(lcs_alignment(a, b), len(a), len(b), thread=t))
    return hunks


def extract_sibs(hunks: Sequence[Hunk], baseline: Trace, failure: Trace) -> list[Sib]:
    """Turn diff hunks into weighted SIBs anchored in the failure execution.

    A SIB's weight is the number of boundary calls it contains: failure-side
    calls for inserted and replaced blocks, baseline-side calls for deleted
    ones. Blocks missing from the failure run are anchored at the stack of the
    failure event right before the gap.
    """
    sibs = []
    views: dict[int | None, tuple[Sequence[TraceEvent], Sequence[TraceEvent]]] = {}
    for sib_id, h in enumerate(hunks):
        if h.thread not in views:
            if h.thread is None:
                views[None] = (baseline.events, failure.events)
            else:
                views[h.thread] = (
                    _thread_view(baseline, h.thread).events,
                    _thread_view(failure, h.thread).events,
                )
        base_events, fail_events = views[h.thread]
        old = tuple(base_events[h.baseline_span[0]:h.baseline_span[1]])
        new = tuple(fail_events[h.failure_span[0]:h.failure_span[1]])
        if h.kind is HunkKind.DELETED:
            start = h.failure_span[0]
            if start > 0:
                anchor = fail_events[start - 1].stack
            else:
                root = (failure.events or old)[0].stack[0]
                anchor = (root,)
            sibs.append(Sib(sib_id, h.kind, old, len(old), anchor))
        else:
            replaced = old if h.kind is HunkKind.REPLACED else ()
            sibs.append(Sib(sib_id, h.kind, new, len(new), new[0].stack, replaced))
    return sibs


def format_sib_report(sibs: Sequence[Sib]) -> str:
    """CSV report with one row per SIB (output of the ``detect`` command)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sib", "kind", "weight", "callees", "anchor"])
    for s in sibs:
        writer.writerow(
            [
                s.id,
                s.kind.value,
                s.weight,
                format_callees(s),
                " > ".join(str(m) for m in s.anchor_stack),
            ]
        )
    return buf.getvalue()


def format_callees(sib: Sib) -> str:
    """Space-separated callee list; ``+`` marks failure-only calls, ``-`` baseline-only ones."""
    sign = "-" if sib.kind is HunkKind.DELETED else "+"
    items = [sign + str(ev.callee) for ev in sib.events]
    items += ["-" + str(ev.callee) for ev in sib.replaced]
    return " ".join(items)
