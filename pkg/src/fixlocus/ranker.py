"""Two-factor node scoring and per-method ranking of fix-locus candidates.

A node's score is ``S * D``. ``S`` is the share of total SIB weight reachable
from the node, so it is largest at the root. ``D = 1 / (1 + d)`` where ``d`` is
the edge distance to the closest descendant carrying a reachable SIB, so it is
largest on the SIB carriers. Scores are kept as exact fractions.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .anomaly import Sib, format_callees
from .calltree import FailureCallTree, Path, TreeNode, reachable_sibs
from .errors import EmptyRanking
from .model import MethodRef

ZERO = Fraction(0)


@dataclass(frozen=True)
class NodeScore:
    path: Path
    S: Fraction
    D: Fraction  # 0 when the node reaches no SIB
    distance: int | None

    @property
    def score(self) -> Fraction:
        return self.S * self.D


@dataclass(frozen=True)
class RankedCandidate:
    rank: int
    method: MethodRef
    score: NodeScore
    evidence: tuple[Sib, ...]


def score_nodes(tree: FailureCallTree) -> dict[Path, NodeScore]:
    total = tree.total_sib_weight
    if total <= 0:
        raise ValueError("tree carries no SIB weight")
    weight: dict[Path, int] = {}
    dist: dict[Path, int | None] = {}
    # children precede parents in reversed pre-order
    for node in reversed(list(tree.walk())):
        w = sum(tree.sibs[s].weight for s in node.attached_sibs)
        best = 0 if node.attached_sibs else None
        for child in node.children.values():
            w += weight[child.path]
            d = dist[child.path]
            if d is not None and (best is None or d + 1 < best):
                best = d + 1
        weight[node.path] = w
        dist[node.path] = best
    scores = {}
    for path, w in weight.items():
        d = dist[path]
        D = ZERO if d is None else Fraction(1, 1 + d)
        scores[path] = NodeScore(path, Fraction(w, total), D, d)
    return scores


def rank(
    tree: FailureCallTree,
    app_package: str,
    scores: dict[Path, NodeScore] | None = None,
) -> list[RankedCandidate]:
    """Rank app methods by the best score among their tree nodes.

    Framework methods and the entry point never appear. Nodes that reach no
    SIB are dropped because they have no evidence to show.
    """
    if scores is None:
        scores = score_nodes(tree)
    best: dict[MethodRef, TreeNode] = {}
    first_seen: dict[MethodRef, int] = {}
    any_app = False
    for node in tree.walk():
        if node.depth == 0 or not node.method.belongs_to(app_package):
            continue
        any_app = True
        m = node.method
        first_seen[m] = min(first_seen.get(m, node.first_seq), node.first_seq)
        if scores[node.path].score == 0:
            continue
        cur = best.get(m)
        if cur is None:
            best[m] = node
            continue
        s_new, s_cur = scores[node.path].score, scores[cur.path].score
        if s_new > s_cur or (s_new == s_cur and node.first_seq < cur.first_seq):
            best[m] = node
    if not any_app:
        raise EmptyRanking(f"failure call tree holds no method of app package {app_package!r}")
    if not best:
        raise EmptyRanking(f"no method of {app_package!r} reaches a suspicious invocation block")

    order = sorted(
        best,
        key=lambda m: (-scores[best[m].path].score, first_seen[m], str(m)),
    )
    return [
        RankedCandidate(
            i,
            m,
            scores[best[m].path],
            tuple(tree.sibs[s] for s in sorted(reachable_sibs(tree, best[m]))),
        )
        for i, m in enumerate(order, 1)
    ]


def format_evidence(sibs: Sequence[Sib]) -> str:
    return "|".join(f"{s.id}:{s.kind.value}:{s.weight}:[{format_callees(s)}]" for s in sibs)


def emit_csv(ranking: Sequence[RankedCandidate]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "method", "score", "S", "D", "evidence"])
    for c in ranking:
        writer.writerow(
            [
                c.rank,
                str(c.method),
                f"{float(c.score.score):.6f}",
                f"{float(c.score.S):.6f}",
                f"{float(c.score.D):.6f}",
                format_evidence(c.evidence),
            ]
        )
    return buf.getvalue()
