"""Synthetic baseline/failure trace pairs with a known fix locus.

A scenario describes an app as a forest of methods. Roots are callbacks
invoked by the framework; every method makes some API calls and calls its
children, interleaved as ``api[0], calls[0], api[1], calls[1], ...``. One
incompatibility is injected at the site method, and benign noise calls are
added identically to both runs so that they never show up in the diff.
"""

from __future__ import annotations

import enum
import io
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .baselines import CoverageMatrix
from .errors import InvalidSpec, MalformedLine
from .model import (
    SYNTHETIC_ENTRY,
    VOID,
    ZYGOTE_ENTRY,
    Direction,
    MethodRef,
    Trace,
    TraceEvent,
    validate_trace,
)


class Kind(enum.Enum):
    INSERT_BLOCK = "INSERT_BLOCK"
    DELETE_BLOCK = "DELETE_BLOCK"
    REPLACE_BLOCK = "REPLACE_BLOCK"
    PERMISSION_DENIAL = "PERMISSION_DENIAL"


@dataclass
class CallNode:
    method: MethodRef
    api: list[MethodRef] = field(default_factory=list)
    calls: list["CallNode"] = field(default_factory=list)

    def iter(self):
        yield self
        for c in self.calls:
            yield from c.iter()


@dataclass
class ScenarioSpec:
    package: str
    topology: list[CallNode]
    kind: Kind
    site: MethodRef
    block_size: int = 1
    noise: int = 0
    seed: int = 0
    passing_tests: int = 0
    entry: MethodRef = SYNTHETIC_ENTRY
    dispatcher: MethodRef = MethodRef("framework.os", "Looper", "loop")


@dataclass(frozen=True)
class GroundTruth:
    app_package: str
    fix_methods: frozenset[MethodRef]
    sib_callees: frozenset[MethodRef]


NOISE_POOL = [
    MethodRef("framework.util", "Log", "d", "java.lang.String,java.lang.String"),
    MethodRef("framework.os", "SystemClock", "uptimeMillis"),
    MethodRef("framework.content", "SharedPreferences", "getBoolean", "java.lang.String,boolean"),
    MethodRef("framework.view", "View", "invalidate"),
    MethodRef("framework.os", "Handler", "post", "java.lang.Runnable"),
]
PERMISSION_CHECK = MethodRef("framework.content", "Context", "checkSelfPermission", "java.lang.String")


def _injected(tag: str, i: int) -> MethodRef:
    return MethodRef("framework.compat", f"Upgraded{tag}", f"call{i}")


# -- spec validation and (de)serialization ---------------------------------


def _parents(spec: ScenarioSpec) -> dict[MethodRef, MethodRef | None]:
    parents: dict[MethodRef, MethodRef | None] = {}

    def visit(node: CallNode, parent: MethodRef | None):
        if node.method in parents:
            raise InvalidSpec(f"method {node.method} appears twice in the topology")
        parents[node.method] = parent
        for c in node.calls:
            visit(c, node.method)

    for root in spec.topology:
        visit(root, None)
    return parents


def check_spec(spec: ScenarioSpec) -> dict[MethodRef, MethodRef | None]:
    """Raise InvalidSpec when the spec cannot be generated; return the parent map."""
    if not spec.topology:
        raise InvalidSpec("topology is empty")
    if spec.block_size < 1:
        raise InvalidSpec(f"block size must be >= 1, got {spec.block_size}")
    if spec.noise < 0 or spec.passing_tests < 0:
        raise InvalidSpec("noise and passing_tests must be non-negative")
    parents = _parents(spec)
    for node in (n for r in spec.topology for n in r.iter()):
        if not node.method.belongs_to(spec.package):
            raise InvalidSpec(f"topology method {node.method} is outside package {spec.package}")
        for api in node.api:
            if api.belongs_to(spec.package):
                raise InvalidSpec(f"API call target {api} belongs to the app")
    if spec.site not in parents:
        raise InvalidSpec(f"injection site {spec.site} is not in the topology")
    if not _find(spec, spec.site).api:
        raise InvalidSpec(f"injection site {spec.site} makes no API call")
    return parents


def _find(spec: ScenarioSpec, method: MethodRef) -> CallNode:
    for root in spec.topology:
        for node in root.iter():
            if node.method == method:
                return node
    raise KeyError(method)


def _node_from_json(obj) -> CallNode:
    try:
        return CallNode(
            MethodRef.parse(obj["method"]),
            [MethodRef.parse(a) for a in obj.get("api", [])],
            [_node_from_json(c) for c in obj.get("calls", [])],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"bad topology node {obj!r}: {exc}") from None


def _node_to_json(node: CallNode) -> dict:
    out: dict = {"method": str(node.method), "api": [str(a) for a in node.api]}
    if node.calls:
        out["calls"] = [_node_to_json(c) for c in node.calls]
    return out


def spec_from_dict(obj: dict) -> ScenarioSpec:
    try:
        spec = ScenarioSpec(
            package=obj["package"],
            topology=[_node_from_json(n) for n in obj["topology"]],
            kind=Kind(obj["kind"]),
            site=MethodRef.parse(obj["site"]),
            block_size=int(obj.get("block_size", 1)),
            noise=int(obj.get("noise", 0)),
            seed=int(obj.get("seed", 0)),
            passing_tests=int(obj.get("passing_tests", 0)),
        )
        if "entry" in obj:
            spec.entry = MethodRef.parse(obj["entry"])
        if "dispatcher" in obj:
            spec.dispatcher = MethodRef.parse(obj["dispatcher"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"bad scenario spec: {exc}") from None
    return spec


def spec_to_dict(spec: ScenarioSpec) -> dict:
    return {
        "package": spec.package,
        "kind": spec.kind.value,
        "site": str(spec.site),
        "block_size": spec.block_size,
        "noise": spec.noise,
        "seed": spec.seed,
        "passing_tests": spec.passing_tests,
        "entry": str(spec.entry),
        "dispatcher": str(spec.dispatcher),
        "topology": [_node_to_json(n) for n in spec.topology],
    }


def load_spec(path: str | Path) -> ScenarioSpec:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise InvalidSpec(f"{path}: top level must be an object")
    return spec_from_dict(obj)


def dump_spec(spec: ScenarioSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2, sort_keys=True) + "\n"


# -- generation -------------------------------------------------------------

# skeleton items: (side, event template); side is "both", "base" or "fail"
_Item = tuple[str, TraceEvent]


def _template(direction, callee, stack, args=(), ret=VOID) -> TraceEvent:
    return TraceEvent(0, 1, direction, callee, tuple(args), ret, tuple(stack))


def _api_args(api: MethodRef) -> tuple[str, ...]:
    return (api.method,) if api.descriptor else ()


def _skeleton(spec: ScenarioSpec) -> tuple[list[_Item], dict[MethodRef, list[int]]]:
    """Common events of both runs plus, per method, the item index of its API calls."""
    items: list[_Item] = []
    api_index: dict[MethodRef, list[int]] = {}

    def run(node: CallNode, stack: tuple[MethodRef, ...]):
        here = stack + (node.method,)
        slots = api_index.setdefault(node.method, [])
        for i in range(max(len(node.api), len(node.calls))):
            if i < len(node.api):
                slots.append(len(items))
                items.append(("both", _template(Direction.API_CALL, node.api[i], here, _api_args(node.api[i]))))
            if i < len(node.calls):
                run(node.calls[i], here)

    base = (spec.entry, spec.dispatcher)
    for root in spec.topology:
        items.append(("both", _template(Direction.CALLBACK, root.method, base)))
        run(root, base)
    return items, api_index


def _inject(spec: ScenarioSpec, items: list[_Item], api_index) -> tuple[list[_Item], set[MethodRef]]:
    path = None
    for side, ev in items:
        if ev.direction is Direction.API_CALL and ev.stack[-1] == spec.site:
            path = ev.stack
            break
    assert path is not None
    first, last = api_index[spec.site][0], api_index[spec.site][-1]
    n = spec.block_size
    callees: set[MethodRef] = set()

    def block(side: str, tag: str) -> list[_Item]:
        out = []
        for i in range(n):
            callee = _injected(tag, i)
            callees.add(callee)
            out.append((side, _template(Direction.API_CALL, callee, path)))
        return out

    kind = spec.kind
    if kind is Kind.INSERT_BLOCK:
        return items[: first + 1] + block("fail", "Inserted") + items[first + 1:], callees
    if kind is Kind.DELETE_BLOCK:
        return items[: first + 1] + block("base", "Removed") + items[first + 1:], callees
    if kind is Kind.REPLACE_BLOCK:
        replaced = block("base", "Legacy") + block("fail", "Replacement")
        return items[: first + 1] + replaced + items[first + 1:], callees

    # permission denial: one inserted check before the site's first API call,
    # and the result callback block that never arrives after its last one
    check = ("fail", _template(Direction.API_CALL, PERMISSION_CHECK, path, ("permission.LOCATION",), "DENIED"))
    listener = MethodRef(spec.site.package, spec.site.cls + "$Listener", "onResult")
    cb_stack = (spec.entry, spec.dispatcher)
    lost = [("base", _template(Direction.CALLBACK, listener, cb_stack))]
    for i in range(n - 1):
        lost.append(("base", _template(Direction.API_CALL, _injected("Result", i), cb_stack + (listener,))))
    callees.update({PERMISSION_CHECK, listener})
    callees.update(ev.callee for _, ev in lost)
    return items[:first] + [check] + items[first: last + 1] + lost + items[last + 1:], callees


def _add_noise(spec: ScenarioSpec, items: list[_Item], rng: random.Random) -> list[_Item]:
    # noise goes right after a common event, in that event's calling context,
    # so injected blocks are never split
    gaps = [i for i, (side, _) in enumerate(items) if side == "both"]
    extra: dict[int, list[_Item]] = {}
    for k in range(spec.noise):
        at = rng.choice(gaps)
        ev = items[at][1]
        stack = ev.stack if ev.direction is Direction.API_CALL else ev.path
        callee = rng.choice(NOISE_POOL)
        extra.setdefault(at, []).append(
            ("both", _template(Direction.API_CALL, callee, stack, (f"noise-{k}",)))
        )
    out = []
    for i, item in enumerate(items):
        out.append(item)
        out.extend(extra.get(i, ()))
    return out


def _materialize(spec: ScenarioSpec, items: list[_Item], side: str, env: str) -> Trace:
    events = []
    for s, ev in items:
        if s == "both" or s == side:
            events.append(TraceEvent(len(events), ev.thread, ev.direction, ev.callee, ev.args, ev.ret, ev.stack))
    return Trace(spec.package, env, events)


def generate_scenario(spec: ScenarioSpec) -> tuple[Trace, Trace, GroundTruth]:
    """Build the baseline and failure traces of ``spec`` and its ground truth."""
    parents = check_spec(spec)
    rng = random.Random(spec.seed)
    items, api_index = _skeleton(spec)
    items, callees = _inject(spec, items, api_index)
    items = _add_noise(spec, items, rng)
    baseline = _materialize(spec, items, "base", "pre-upgrade")
    failure = _materialize(spec, items, "fail", "post-upgrade")
    for t in (baseline, failure):
        problems = validate_trace(t)
        if problems:
            raise InvalidSpec("generated trace is invalid: " + "; ".join(problems[:3]))
    fix = {spec.site}
    caller = parents[spec.site]
    if spec.kind is Kind.PERMISSION_DENIAL and caller is not None:
        fix.add(caller)
    return baseline, failure, GroundTruth(spec.package, frozenset(fix), frozenset(callees))


def coverage_for(spec: ScenarioSpec, failure: Trace) -> CoverageMatrix | None:
    """Method-level coverage of the failing test plus seeded passing tests, if requested."""
    if not spec.passing_tests:
        return None
    rng = random.Random(spec.seed * 7919 + 1)
    entities = [str(n.method) for r in spec.topology for n in r.iter()]
    known = set(entities)
    failing = {str(m) for ev in failure.events for m in ev.path} & known
    tests = [("failing", True, frozenset(failing))]
    for k in range(spec.passing_tests):
        roots = [r for r in spec.topology if rng.random() < 0.5] or [rng.choice(spec.topology)]
        covered = frozenset(str(n.method) for r in roots for n in r.iter())
        tests.append((f"monkey-{k}", False, covered))
    return CoverageMatrix(tuple(entities), tuple(tests))


# -- random topologies ------------------------------------------------------

_FW_CALLS = [
    MethodRef("framework.widget", "TextView", "setText", "java.lang.CharSequence"),
    MethodRef("framework.app", "Activity", "findViewById", "int"),
    MethodRef("framework.content", "Intent", "getExtras"),
    MethodRef("framework.net", "ConnectivityManager", "getActiveNetworkInfo"),
    MethodRef("framework.location", "LocationManager", "getLastKnownLocation", "java.lang.String"),
    MethodRef("framework.database", "Cursor", "moveToNext"),
    MethodRef("framework.graphics", "Bitmap", "createBitmap", "int,int"),
    MethodRef("framework.media", "AudioManager", "getStreamVolume", "int"),
]


def random_spec(
    seed: int,
    kind: Kind = Kind.INSERT_BLOCK,
    block_size: int = 3,
    noise: int = 0,
    package: str = "com.example.app",
    passing_tests: int = 0,
) -> ScenarioSpec:
    """A random app topology with the site drawn among methods that have an app caller."""
    rng = random.Random(seed)
    counter = iter(range(10_000))

    def make(depth: int) -> CallNode:
        i = next(counter)
        node = CallNode(
            MethodRef(package + ".ui" if depth == 0 else package, f"C{i % 4}", f"m{i}"),
            [rng.choice(_FW_CALLS) for _ in range(rng.randint(1, 3))],
        )
        if depth < 3:
            node.calls = [make(depth + 1) for _ in range(rng.randint(0 if depth else 1, 2))]
        return node

    topology = [make(0) for _ in range(rng.randint(2, 4))]
    candidates = [n.method for r in topology for n in r.iter() if n is not r]
    return ScenarioSpec(
        package=package,
        topology=topology,
        kind=kind,
        site=rng.choice(candidates),
        block_size=block_size,
        noise=noise,
        seed=seed,
        passing_tests=passing_tests,
    )


# -- the Good Weather analog -------------------------------------------------

GW_PACKAGE = "org.asdtm.goodweather"
_GW = {
    "main": MethodRef(GW_PACKAGE, "MainActivity", "onCreate", "android.os.Bundle"),
    "menu": MethodRef(GW_PACKAGE, "MainActivity", "onCreateOptionsMenu", "android.view.Menu"),
    "select": MethodRef(GW_PACKAGE, "MainActivity", "onOptionsItemSelected", "android.view.MenuItem"),
    "gps": MethodRef(GW_PACKAGE, "MainActivity", "gpsRequestLocation"),
    "listener": MethodRef(GW_PACKAGE, "MainActivity$MyLocationListener", "onLocationChanged", "android.location.Location"),
    "fetch": MethodRef(GW_PACKAGE, "MainActivity", "getWeather"),
    "pause": MethodRef(GW_PACKAGE, "MainActivity", "onPause"),
}
_LOOPER = MethodRef("android.os", "Looper", "loop")


def _android(cls_path: str, method: str, descriptor: str = "") -> MethodRef:
    package, _, cls = cls_path.rpartition(".")
    return MethodRef(package, cls, method, descriptor)


def goodweather_scenario() -> tuple[Trace, Trace, GroundTruth]:
    """Location permission regression: the app hangs on a spinner after the upgrade."""
    root = (ZYGOTE_ENTRY, _LOOPER)
    main = root + (_GW["main"],)
    menu = root + (_GW["menu"],)
    select = root + (_GW["select"],)
    gps = select + (_GW["gps"],)
    listener = root + (_GW["listener"],)
    fetch = listener + (_GW["fetch"],)
    cb, api = Direction.CALLBACK, Direction.API_CALL
    request_updates = _android(
        "android.location.LocationManager",
        "requestLocationUpdates",
        "java.lang.String,long,float,android.location.LocationListener",
    )
    check_permission = _android("android.content.Context", "checkSelfPermission", "java.lang.String")

    prefix = [
        _template(cb, _GW["main"], root, ["Bundle@<id>"]),
        _template(api, _android("android.app.Activity", "setContentView", "int"), main, ["2130968601"]),
        _template(api, _android("android.content.Context", "getSystemService", "java.lang.String"), main, ["location"], "LocationManager@<id>"),
        _template(cb, _GW["menu"], root, ["Menu@<id>"], "true"),
        _template(api, _android("android.view.MenuInflater", "inflate", "int,android.view.Menu"), menu, ["2131558400", "Menu@<id>"]),
        _template(cb, _GW["select"], root, ["MenuItem@<id>"], "true"),
        _template(api, _android("android.view.MenuItem", "getItemId"), select, [], "2131624076"),
        _template(api, _android("android.app.ProgressDialog", "show"), select),
        _template(api, _android("android.location.LocationManager", "isProviderEnabled", "java.lang.String"), gps, ["gps"], "true"),
    ]
    granted = [
        _template(api, request_updates, gps, ["gps", "0", "0.0", "MainActivity$MyLocationListener@<id>"]),
        _template(cb, _GW["listener"], root, ["Location[gps 45.52,9.21]"]),
        _template(api, _android("android.location.Location", "getLatitude"), listener, [], "45.52"),
        _template(api, _android("android.location.Location", "getLongitude"), listener, [], "9.21"),
        _template(api, _android("android.location.LocationManager", "removeUpdates", "android.location.LocationListener"), listener, ["MainActivity$MyLocationListener@<id>"]),
        _template(api, _android("java.net.URL", "openConnection"), fetch, [], "HttpURLConnection@<id>"),
        _template(api, _android("android.app.ProgressDialog", "dismiss"), fetch),
    ]
    denied = [
        _template(api, check_permission, gps, ["android.permission.ACCESS_FINE_LOCATION"], "DENIED"),
    ]
    suffix = [
        _template(cb, _GW["pause"], root),
        _template(api, _android("android.app.Activity", "onPause"), root + (_GW["pause"],)),
    ]

    def trace(body, env):
        return Trace(
            GW_PACKAGE,
            env,
            [TraceEvent(i, ev.thread, ev.direction, ev.callee, ev.args, ev.ret, ev.stack) for i, ev in enumerate(body)],
        )

    baseline = trace(prefix + granted + suffix, "API 22")
    failure = trace(prefix + denied + suffix, "API 23")
    truth = GroundTruth(
        GW_PACKAGE,
        frozenset({_GW["gps"], _GW["select"]}),
        frozenset(ev.callee for ev in granted + denied),
    )
    return baseline, failure, truth


BUILTIN_SCENARIOS = {"goodweather": goodweather_scenario}


# -- ground-truth files ------------------------------------------------------

TRUTH_MAGIC = "#truth"


def write_truth(truth: GroundTruth) -> str:
    lines = [f"{TRUTH_MAGIC} app={truth.app_package}"]
    lines += [f"fix\t{m}" for m in sorted(map(str, truth.fix_methods))]
    lines += [f"sib\t{m}" for m in sorted(map(str, truth.sib_callees))]
    return "\n".join(lines) + "\n"


def parse_truth(stream: Iterable[str] | str) -> GroundTruth:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    lines = iter(stream)
    header = next(lines, "").strip()
    if not header.startswith(TRUTH_MAGIC + " app="):
        raise MalformedLine(1, f"expected header '{TRUTH_MAGIC} app=<package>'")
    app = header.split("app=", 1)[1]
    fix, sib = set(), set()
    for line_no, line in enumerate(lines, 2):
        line = line.strip()
        if not line:
            continue
        tag, _, text = line.partition("\t")
        try:
            method = MethodRef.parse(text)
        except ValueError:
            raise MalformedLine(line_no, f"bad method reference {text!r}") from None
        if tag == "fix":
            fix.add(method)
        elif tag == "sib":
            sib.add(method)
        else:
            raise MalformedLine(line_no, f"unknown tag {tag!r}")
    if not fix:
        raise MalformedLine(1, "ground truth lists no fix method")
    return GroundTruth(app, frozenset(fix), frozenset(sib))
