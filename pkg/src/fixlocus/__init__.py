"""Fix-locus localization for backward incompatibilities caused by framework upgrades.

Given the boundary-call traces of one test run against the old framework
(passing) and the upgraded one (failing), fixlocus differences the traces into
Suspicious Invocation Blocks, builds the failure call tree and ranks the app
methods most likely to need a change, each with its supporting evidence.
"""

from .anomaly import DiffKey, Hunk, HunkKind, Sib, diff_traces, extract_sibs, project_keys
from .baselines import CoverageMatrix, TopKReport, naive_ranking, ochiai, topk_report
from .calltree import FailureCallTree, TreeNode, build_failure_tree, emit_dot, reachable_sibs
from .estimator import FixLocusLocalizer, NaiveTraceRanker, OchiaiRanker
from .model import (
    Direction,
    MethodRef,
    Origin,
    Trace,
    TraceEvent,
    UNRECORDED,
    VOID,
    validate_trace,
)
from .ranker import NodeScore, RankedCandidate, emit_csv, rank, score_nodes
from .synth import GroundTruth, Kind, ScenarioSpec, generate_scenario, goodweather_scenario
from .trace_io import (
    MethodList,
    filter_boundary_methods,
    normalize_value,
    parse_trace,
    write_trace,
)

__version__ = "0.1.0"
