import pytest
from hypothesis import given

from conftest import APP, api, cb, m, trace, valid_traces
from fixlocus.model import (
    SYNTHETIC_ENTRY,
    Direction,
    MethodRef,
    Origin,
    TraceEvent,
    is_entry_point,
    origin_of,
    validate_trace,
)


@pytest.mark.parametrize(
    "text",
    [
        "com.example.app.Main.onCreate(android.os.Bundle)",
        "a.B.c()",
        "<root>.Main.main()",
        "org.x.Outer$Inner.<init>(int,java.lang.String[])",
    ],
)
def test_method_ref_round_trip(text):
    ref = MethodRef.parse(text)
    assert str(ref) == text
    assert MethodRef.parse(str(ref)) == ref


@pytest.mark.parametrize("text", ["Main.main()", "a.B.c", "a..B.c()", "a.B.c(x)(y)", "a.B.c (int)", ""])
def test_method_ref_rejects_non_canonical(text):
    with pytest.raises(ValueError):
        MethodRef.parse(text)


def test_method_ref_requires_all_parts():
    with pytest.raises(ValueError):
        MethodRef("", "B", "c")


def test_origin_uses_package_prefix():
    assert origin_of(m("com.example.app.ui.A.b()"), APP) is Origin.APP
    assert origin_of(m("com.example.app.A.b()"), APP) is Origin.APP
    assert origin_of(m("com.example.apple.A.b()"), APP) is Origin.FRAMEWORK


def test_entry_points_ignore_descriptor():
    assert is_entry_point(SYNTHETIC_ENTRY)
    assert is_entry_point(m("com.android.internal.os.ZygoteInit.main()"))
    assert not is_entry_point(m("com.example.app.Main.main()"))


def test_well_formed_trace_has_no_violations(small_trace):
    assert validate_trace(small_trace) == []


def test_duplicate_seq_is_reported_once():
    t = trace(
        cb(5, f"{APP}.Main.a()"),
        cb(5, f"{APP}.Main.b()"),
    )
    violations = validate_trace(t)
    assert len(violations) == 1
    assert "seq 5" in violations[0] and "seq values unique" in violations[0]


def test_out_of_order_seq():
    t = trace(cb(3, f"{APP}.Main.a()"), cb(1, f"{APP}.Main.b()"))
    assert validate_trace(t) == ["seq 1: seq sorted"]


def test_api_call_into_app_violates_direction_rule():
    t = trace(api(0, f"{APP}.Util.helper()", f"{APP}.Main.a()"))
    (violation,) = validate_trace(t)
    assert violation.startswith("seq 0") and "direction API_CALL" in violation


def test_callback_from_app_code_is_internal_call():
    ev = TraceEvent(0, 1, Direction.CALLBACK, m(f"{APP}.B.b()"), stack=(SYNTHETIC_ENTRY, m(f"{APP}.A.a()")))
    (violation,) = validate_trace(trace(ev))
    assert "direction CALLBACK" in violation


def test_empty_stack_and_foreign_entry_point():
    ev = TraceEvent(0, 1, Direction.CALLBACK, m(f"{APP}.B.b()"), stack=())
    assert validate_trace(trace(ev)) == ["seq 0: stack non-empty"]
    ev = TraceEvent(1, 1, Direction.CALLBACK, m(f"{APP}.B.b()"), stack=(m("x.Y.z()"),))
    (violation,) = validate_trace(trace(ev))
    assert "entry point" in violation


def test_raw_identity_tokens_are_rejected():
    t = trace(cb(0, f"{APP}.Main.a()", args=["Intent@3ac4f1"]))
    (violation,) = validate_trace(t)
    assert "normalized" in violation
    assert validate_trace(trace(cb(0, f"{APP}.Main.a()", args=["Intent@<id>"]))) == []


@given(valid_traces())
def test_validate_is_pure(t):
    assert validate_trace(t) == validate_trace(t) == []
