import math

import pytest
from hypothesis import given

from conftest import APP, api, m, trace, valid_traces
from oracles import ochiai_by_hand
from fixlocus.baselines import (
    ROW_LABELS,
    CoverageMatrix,
    achieved_rank,
    format_report,
    naive_ranking,
    ochiai,
    parse_coverage,
    topk_report,
    write_coverage,
)
from fixlocus.errors import MalformedLine, NoFailingTest

M, N = f"{APP}.Main.m()", f"{APP}.Main.n()"


def test_naive_identical_traces():
    t = trace(api(0, "framework.k.K.a()", M))
    assert naive_ranking(t, t) == []


def test_naive_single_hunk():
    base = trace(api(0, "framework.k.K.a()", M))
    fail = trace(api(0, "framework.k.K.a()", M), api(1, "framework.k.K.x()", M))
    assert naive_ranking(base, fail) == [m(M)]


def test_naive_first_occurrence_wins():
    shared = [("framework.k.K.s1()", M), ("framework.k.K.s2()", N)]
    base = trace(*(api(i, c, w) for i, (c, w) in enumerate(shared)), api(2, "framework.k.K.s3()", M))
    fail = trace(
        api(0, "framework.k.K.x()", M),
        api(1, "framework.k.K.s1()", M),
        api(2, "framework.k.K.y()", N),
        api(3, "framework.k.K.s2()", N),
        api(4, "framework.k.K.z()", M),
        api(5, "framework.k.K.s3()", M),
    )
    assert naive_ranking(base, fail) == [m(M), m(N)]


@given(valid_traces())
def test_naive_self_is_empty(t):
    assert naive_ranking(t, t) == []


def matrix(entities, *tests):
    return CoverageMatrix(tuple(entities), tuple((f"t{i}", f, frozenset(c)) for i, (f, c) in enumerate(tests)))


def test_ochiai_examples():
    scores = dict(ochiai(matrix("abc", (True, "a"), (True, "ab"), (False, "bc"))))
    assert scores["a"] == 1.0
    assert scores["c"] == 0.0
    assert scores["b"] == pytest.approx(ochiai_by_hand(1, 1, 1))
    single = dict(ochiai(matrix("e", (True, "e"), (False, "e"))))
    assert single["e"] == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert round(single["e"], 6) == 0.707107


def test_ochiai_ties_keep_entity_order():
    assert [e for e, _ in ochiai(matrix("zya", (True, "zya")))] == ["z", "y", "a"]


def test_ochiai_needs_failing_test():
    with pytest.raises(NoFailingTest):
        matrix("a", (False, "a"))


def test_coverage_rejects_unknown_entity():
    with pytest.raises(ValueError):
        matrix("a", (True, "ab"))


def test_coverage_round_trip():
    mat = matrix("abc", (True, "ca"), (False, ""), (False, "b"))
    text = write_coverage(mat)
    assert text.splitlines()[0] == "#coverage v1"
    assert "t1\tPASS\t-" in text
    again = parse_coverage(text)
    assert again.tests == mat.tests
    assert write_coverage(again) == write_coverage(parse_coverage(write_coverage(again)))


def test_coverage_malformed():
    with pytest.raises(MalformedLine):
        parse_coverage("#coverage v1\nt0\tMAYBE\ta\n")
    with pytest.raises(MalformedLine):
        parse_coverage("coverage\n")


def test_achieved_rank():
    assert achieved_rank(["m"], {"m"}) == 1
    assert achieved_rank(["x", "b", "a"], {"a", "b"}) == 2
    assert achieved_rank([], {"a"}) is None
    assert achieved_rank(None, {"a"}) is None


def test_topk_position_seven():
    ranking = [f"x{i}" for i in range(12)]
    ranking[6] = "fix"
    report = topk_report([({"t": ranking}, {"fix"})])
    assert [report.row(label) for label in ROW_LABELS] == [[0], [0], [1], [0]]


def test_topk_single_hit():
    report = topk_report([({"t": ["m"]}, {"m"})])
    assert [report.row(label) for label in ROW_LABELS] == [[1], [1], [1], [0]]


def test_report_csv_marks_missing_rankings():
    report = topk_report([({"a": ["m"], "b": None}, {"m"})], ["a", "b"])
    rows = format_report(report, ["s0"]).splitlines()
    assert rows[0] == "scenario,a,b"
    assert rows[1] == "s0,1,-"
    assert rows[-1] == "Not in the ranking,0,1"
