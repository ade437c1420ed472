"""Build failure call trees directly from method paths, bypassing the differ."""

from __future__ import annotations

import random

from fixlocus.anomaly import HunkKind, Sib
from fixlocus.calltree import build_failure_tree
from fixlocus.model import SYNTHETIC_ENTRY, Direction, MethodRef, Trace, TraceEvent

APP = "com.example.app"


def ref(name: str) -> MethodRef:
    if "." not in name:
        name = f"{APP}.T.{name}()"
    return MethodRef.parse(name)


def path_trace(*paths, app=APP) -> Trace:
    """One event per path; the last element of a path is the callee."""
    events = []
    for seq, p in enumerate(paths):
        refs = (SYNTHETIC_ENTRY,) + tuple(ref(n) for n in p)
        events.append(TraceEvent(seq, 1, Direction.CALLBACK, refs[-1], stack=refs[:-1]))
    return Trace(app, "test", events)


def sib_at(sib_id, *anchor, weight=1) -> Sib:
    stack = (SYNTHETIC_ENTRY,) + tuple(ref(n) for n in anchor)
    return Sib(sib_id, HunkKind.INSERTED, (), weight, stack)


def tree_of(paths, anchors, weights=None):
    """paths: sequence of name tuples; anchors: sequence of name tuples, one SIB each."""
    weights = weights or [1] * len(anchors)
    sibs = [sib_at(i, *a, weight=w) for i, (a, w) in enumerate(zip(anchors, weights))]
    return build_failure_tree(path_trace(*paths), sibs)


def random_tree(rng: random.Random, max_nodes=25, max_sibs=5, scale=1):
    """Random tree of app methods with SIBs anchored on random nodes."""
    names = [f"m{i}" for i in range(8)]
    paths = []
    for _ in range(rng.randint(1, max_nodes)):
        base = list(rng.choice(paths)) if paths and rng.random() < 0.8 else []
        paths.append(tuple(base + [rng.choice(names)]))
    anchors = [rng.choice(paths + [()]) for _ in range(rng.randint(1, max_sibs))]
    weights = [rng.randint(1, 6) * scale for _ in anchors]
    return tree_of(paths, anchors, weights)
