from __future__ import annotations

import string

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from fixlocus.model import (
    SYNTHETIC_ENTRY,
    UNRECORDED,
    VOID,
    Direction,
    MethodRef,
    Trace,
    TraceEvent,
)
from fixlocus.trace_io import normalize_value

settings.register_profile("fixlocus", deadline=None)
settings.load_profile("fixlocus")

APP = "com.example.app"
FW = MethodRef("framework.os", "Looper", "loop")


def m(text: str) -> MethodRef:
    return MethodRef.parse(text)


def api(seq, callee, *callers, args=(), ret=VOID, thread=1):
    """API call from the innermost app caller; callers are app method texts."""
    stack = (SYNTHETIC_ENTRY, FW) + tuple(m(c) for c in callers)
    return TraceEvent(seq, thread, Direction.API_CALL, m(callee), args, ret, stack)


def cb(seq, callee, args=(), ret=VOID, thread=1):
    return TraceEvent(seq, thread, Direction.CALLBACK, m(callee), args, ret, (SYNTHETIC_ENTRY, FW))


def trace(*events, app=APP, env="test"):
    return Trace(app, env, events)


@pytest.fixture
def small_trace():
    return trace(
        cb(0, f"{APP}.Main.onCreate()"),
        api(1, "framework.widget.TextView.setText(java.lang.CharSequence)", f"{APP}.Main.onCreate()", args=["hi"]),
        api(2, "framework.os.SystemClock.uptimeMillis()", f"{APP}.Main.onCreate()", ret="<ts>"),
    )


# -- hypothesis strategies ----------------------------------------------------

APP_METHODS = [m(f"{APP}.C{i}.m{i}()") for i in range(5)]
FW_METHODS = [m(f"framework.api.F{i}.f{i}(int)") for i in range(5)]

_value_chars = string.ascii_letters + string.digits + " ;\t\\-?@.,<>:=\n\r"
values = st.text(alphabet=_value_chars, max_size=8).filter(lambda v: normalize_value(v) == v)


@st.composite
def valid_traces(draw, max_events=12, app=APP):
    n = draw(st.integers(0, max_events))
    events = []
    seq = draw(st.integers(0, 5))
    for _ in range(n):
        seq += draw(st.integers(1, 3))
        chain = draw(st.lists(st.sampled_from(APP_METHODS), min_size=0, max_size=3))
        args = draw(st.lists(values, max_size=3))
        ret = draw(st.one_of(st.just(VOID), st.just(UNRECORDED), values))
        thread = draw(st.integers(1, 3))
        if chain and draw(st.booleans()):
            callee = draw(st.sampled_from(FW_METHODS))
            stack = (SYNTHETIC_ENTRY, FW) + tuple(chain)
            events.append(TraceEvent(seq, thread, Direction.API_CALL, callee, args, ret, stack))
        else:
            callee = draw(st.sampled_from(APP_METHODS))
            stack = (SYNTHETIC_ENTRY, FW) + tuple(chain) + (FW,) if chain else (SYNTHETIC_ENTRY, FW)
            events.append(TraceEvent(seq, thread, Direction.CALLBACK, callee, args, ret, stack))
    env = draw(st.text(alphabet=_value_chars, max_size=6))
    return Trace(app, env, events)
