import csv
import io
import random
from fractions import Fraction

import pytest

from trees import APP, path_trace, random_tree, ref, sib_at, tree_of
from fixlocus.calltree import build_failure_tree, reachable_sibs
from fixlocus.errors import EmptyRanking
from fixlocus.model import SYNTHETIC_ENTRY
from fixlocus.ranker import emit_csv, rank, score_nodes


def p(*names):
    return (SYNTHETIC_ENTRY,) + tuple(ref(n) for n in names)


def test_chain_scores():
    scores = score_nodes(tree_of([("A", "B")], [("A", "B")]))
    assert (scores[p("A", "B")].S, scores[p("A", "B")].D) == (1, 1)
    assert (scores[p("A")].S, scores[p("A")].D) == (1, Fraction(1, 2))
    assert (scores[p()].S, scores[p()].D) == (1, Fraction(1, 3))
    assert scores[p("A", "B")].score == 1


def test_two_children_scores():
    scores = score_nodes(tree_of([("A",), ("B",)], [("A",), ("B",)]))
    for child in ("A", "B"):
        assert (scores[p(child)].S, scores[p(child)].D, scores[p(child)].score) == (Fraction(1, 2), 1, Fraction(1, 2))
    assert (scores[p()].S, scores[p()].D, scores[p()].score) == (1, Fraction(1, 2), Fraction(1, 2))


def test_root_only_sib():
    scores = score_nodes(tree_of([], [()]))
    assert scores[p()].score == 1


def test_node_without_reachable_sib_scores_zero():
    scores = score_nodes(tree_of([("A",), ("B",)], [("A",)]))
    assert scores[p("B")].score == 0 and scores[p("B")].distance is None


def test_chain_ranking():
    ranking = rank(tree_of([("A", "B")], [("A", "B")]), APP)
    assert [c.method for c in ranking] == [ref("B"), ref("A")]
    assert [c.score.score for c in ranking] == [1, Fraction(1, 2)]
    assert [c.rank for c in ranking] == [1, 2]


def test_only_app_method():
    tree = tree_of([("fw.x.Y.z()", "m")], [("fw.x.Y.z()", "m")])
    assert [c.method for c in rank(tree, APP)] == [ref("m")]


def test_tie_broken_by_first_occurrence():
    # m1 executes at seq 7, m2 at seq 3
    paths = [("fw.x.Y.f()",)] * 3 + [("m2",)] + [("fw.x.Y.f()",)] * 3 + [("m1",)]
    tree = build_failure_tree(path_trace(*paths), [sib_at(0, "m1"), sib_at(1, "m2")])
    assert node_seq(tree, "m2") == 3 and node_seq(tree, "m1") == 7
    assert [c.method for c in rank(tree, APP)] == [ref("m2"), ref("m1")]


def node_seq(tree, name):
    return tree.nodes[p(name)].first_seq


def test_method_aggregates_over_contexts():
    tree = tree_of([("A", "C"), ("B", "C")], [("B", "C")])
    (c_cand,) = [c for c in rank(tree, APP) if c.method == ref("C")]
    assert c_cand.score.path == p("B", "C") and c_cand.score.score == 1
    assert [s.id for s in c_cand.evidence] == [0]


def test_no_app_method():
    tree = tree_of([("fw.x.Y.z()",)], [("fw.x.Y.z()",)])
    with pytest.raises(EmptyRanking):
        rank(tree, APP)


def test_csv_shapes():
    assert emit_csv([]) == "rank,method,score,S,D,evidence\n"
    text = emit_csv(rank(tree_of([("A",)], [("A",)]), APP)[:1])
    rows = list(csv.reader(io.StringIO(text)))
    assert len(text.splitlines()) == 2
    assert rows[1] == ["1", f"{APP}.T.A()", "1.000000", "1.000000", "1.000000", "0:INSERTED:1:[]"]


def test_csv_is_deterministic():
    a = emit_csv(rank(random_tree(random.Random(5)), APP))
    b = emit_csv(rank(random_tree(random.Random(5)), APP))
    assert a == b


@pytest.mark.parametrize("seed", range(40))
def test_scoring_laws(seed):
    tree = random_tree(random.Random(seed))
    scores = score_nodes(tree)
    total = tree.total_sib_weight
    for n in tree.walk():
        s = scores[n.path]
        reach = reachable_sibs(tree, n)
        assert s.S == Fraction(sum(tree.sibs[i].weight for i in reach), total)
        assert (s.score == 0) == (not reach)
        assert 0 <= s.score <= 1
        for c in n.children.values():
            assert scores[c.path].S <= s.S
    ranking = rank(tree, APP) if any(n.depth and scores[n.path].score for n in tree.walk()) else []
    if ranking:
        assert ranking[0].evidence


@pytest.mark.parametrize("seed", range(20))
def test_scaling_weights_keeps_order(seed):
    try:
        before = [c.method for c in rank(random_tree(random.Random(seed)), APP)]
    except EmptyRanking:
        return
    scaled = random_tree(random.Random(seed), scale=7)
    assert [c.method for c in rank(scaled, APP)] == before
