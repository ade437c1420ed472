"""Comparison techniques (naive trace analysis, Ochiai SBFL) and Top-k reporting."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .anomaly import diff_traces, extract_sibs
from .errors import MalformedLine, NoFailingTest
from .model import MethodRef, Trace

COVERAGE_MAGIC = "#coverage v1"
THRESHOLDS = (1, 5, 10)


def naive_ranking(baseline: Trace, failure: Trace, value_sensitive: bool = False) -> list[MethodRef]:
    """App methods met while reading the trace differences front to back.

    Each hunk contributes the app frames of its anchor stack and of every
    differing event's stack, outermost first, followed by app callees.
    """
    app = failure.app_package
    hunks = diff_traces(baseline, failure, value_sensitive)
    seen: dict[MethodRef, None] = {}
    for sib in extract_sibs(hunks, baseline, failure):
        frames = list(sib.anchor_stack)
        for ev in sib.events + sib.replaced:
            frames.extend(ev.path)
        for m in frames:
            if m.belongs_to(app):
                seen.setdefault(m, None)
    return list(seen)


@dataclass(frozen=True)
class CoverageMatrix:
    entities: tuple[str, ...]
    tests: tuple[tuple[str, bool, frozenset[str]], ...]  # (id, failed, covered)

    def __post_init__(self):
        if not any(failed for _, failed, _ in self.tests):
            raise NoFailingTest("coverage matrix has no failing test")
        known = set(self.entities)
        for tid, _, covered in self.tests:
            missing = covered - known
            if missing:
                raise ValueError(f"test {tid} covers unknown entities {sorted(missing)}")


def parse_coverage(stream: Iterable[str] | str) -> CoverageMatrix:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    lines = iter(stream)
    header = next(lines, "").rstrip("\r\n")
    if header != COVERAGE_MAGIC:
        raise MalformedLine(1, f"expected header {COVERAGE_MAGIC!r}")
    entities: dict[str, None] = {}
    tests = []
    for line_no, line in enumerate(lines, 2):
        line = line.rstrip("\r\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[1] not in ("PASS", "FAIL"):
            raise MalformedLine(line_no, "expected testId<TAB>PASS|FAIL<TAB>entities")
        covered = [e for e in parts[2].split(";") if e and parts[2] != "-"]
        for e in covered:
            entities.setdefault(e, None)
        tests.append((parts[0], parts[1] == "FAIL", frozenset(covered)))
    return CoverageMatrix(tuple(entities), tuple(tests))


def write_coverage(matrix: CoverageMatrix) -> str:
    order = {e: i for i, e in enumerate(matrix.entities)}
    lines = [COVERAGE_MAGIC]
    for tid, failed, covered in matrix.tests:
        ents = ";".join(sorted(covered, key=order.__getitem__)) or "-"
        lines.append(f"{tid}\t{'FAIL' if failed else 'PASS'}\t{ents}")
    return "\n".join(lines) + "\n"


def ochiai(matrix: CoverageMatrix) -> list[tuple[str, float]]:
    """Ochiai suspiciousness ``ef / sqrt((ef + nf) * (ef + ep))``, most suspicious first."""
    total_failed = sum(1 for _, failed, _ in matrix.tests if failed)
    scored = []
    for entity in matrix.entities:
        ef = sum(1 for _, failed, cov in matrix.tests if failed and entity in cov)
        ep = sum(1 for _, failed, cov in matrix.tests if not failed and entity in cov)
        nf = total_failed - ef
        denom = math.sqrt((ef + nf) * (ef + ep))
        scored.append((entity, ef / denom if denom else 0.0))
    # stable sort keeps input order among ties
    return sorted(scored, key=lambda pair: -pair[1])


def achieved_rank(ranking: Sequence[object] | None, truth: Iterable[object]) -> int | None:
    """Best 1-based position of any ground-truth member, or None when absent."""
    if not ranking:
        return None
    wanted = {str(t) for t in truth}
    for pos, item in enumerate(ranking, 1):
        if str(item) in wanted:
            return pos
    return None


@dataclass
class TopKReport:
    techniques: list[str]
    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    ranks: list[dict[str, int | None]] = field(default_factory=list)

    def row(self, label: str) -> list[int]:
        return [self.counts[t][label] for t in self.techniques]


ROW_LABELS = ("Top-1", "Top-5", "Top-10", "Not in the ranking")


def topk_report(
    scenarios: Sequence[tuple[Mapping[str, Sequence[object] | None], Iterable[object]]],
    techniques: Sequence[str] | None = None,
) -> TopKReport:
    """Count, per technique, how often the fix method lands in the top 1/5/10.

    Counts are cumulative. A technique with no ranking for a scenario (None)
    counts as not in the ranking.
    """
    if techniques is None:
        techniques = list(dict.fromkeys(t for rankings, _ in scenarios for t in rankings))
    report = TopKReport(list(techniques))
    for t in techniques:
        report.counts[t] = dict.fromkeys(ROW_LABELS, 0)
    for rankings, truth in scenarios:
        truth = list(truth)
        achieved = {t: achieved_rank(rankings.get(t), truth) for t in techniques}
        report.ranks.append(achieved)
        for t, r in achieved.items():
            if r is None:
                report.counts[t]["Not in the ranking"] += 1
                continue
            for k in THRESHOLDS:
                if r <= k:
                    report.counts[t][f"Top-{k}"] += 1
    return report


def format_report(report: TopKReport, scenario_names: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", *report.techniques])
    for name, ranks in zip(scenario_names, report.ranks):
        writer.writerow([name, *("-" if ranks[t] is None else ranks[t] for t in report.techniques)])
    for label in ROW_LABELS:
        writer.writerow([label, *report.row(label)])
    return buf.getvalue()
