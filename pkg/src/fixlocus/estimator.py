"""scikit-learn style front ends for the localization techniques.

All three rankers follow the estimator conventions: hyper-parameters are set in
``__init__`` and exposed through ``get_params``/``set_params``, ``fit`` learns
from its inputs and returns ``self``, and fitted state lives in attributes with
a trailing underscore. ``predict`` returns the ranked list of methods.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .anomaly import diff_traces, extract_sibs, format_sib_report
from .baselines import naive_ranking, ochiai
from .calltree import build_failure_tree, emit_dot
from .ranker import emit_csv, rank, score_nodes
from .validation import check_coverage, check_trace_pair


class FixLocusLocalizer(BaseEstimator):
    """Rank the app methods most likely to need a change after a framework upgrade.

    Parameters
    ----------
    value_sensitive : bool, default=False
        Compare argument and return values as well as callee names when
        differencing the traces.
    per_thread : bool, default=False
        Difference each thread's events separately instead of the global order.
    normalize_patterns : sequence of (compiled regex, replacement), optional
        Extra value normalization applied when traces are read from files.

    Attributes
    ----------
    hunks_ : list of Hunk
    sibs_ : list of Sib
    tree_ : FailureCallTree
    node_scores_ : dict mapping tree paths to NodeScore
    ranking_ : list of RankedCandidate
    """

    def __init__(self, value_sensitive=False, per_thread=False, normalize_patterns=None):
        self.value_sensitive = value_sensitive
        self.per_thread = per_thread
        self.normalize_patterns = normalize_patterns

    def detect(self, baseline, failure):
        """Run only the anomaly detection phase; sets ``hunks_`` and ``sibs_``."""
        b, f = check_trace_pair(baseline, failure, self.normalize_patterns or ())
        self.baseline_, self.failure_ = b, f
        self.hunks_ = diff_traces(b, f, self.value_sensitive, self.per_thread)
        self.sibs_ = extract_sibs(self.hunks_, b, f)
        return self

    def fit(self, baseline, failure):
        self.detect(baseline, failure)
        self.tree_ = build_failure_tree(self.failure_, self.sibs_)
        self.node_scores_ = score_nodes(self.tree_)
        self.ranking_ = rank(self.tree_, self.failure_.app_package, self.node_scores_)
        return self

    def predict(self, X=None):
        check_is_fitted(self, "ranking_")
        return [c.method for c in self.ranking_]

    def fit_predict(self, baseline, failure):
        return self.fit(baseline, failure).predict()

    def report(self) -> str:
        check_is_fitted(self, "sibs_")
        return format_sib_report(self.sibs_)

    def to_csv(self) -> str:
        check_is_fitted(self, "ranking_")
        return emit_csv(self.ranking_)

    def to_dot(self) -> str:
        check_is_fitted(self, "tree_")
        return emit_dot(self.tree_)


class NaiveTraceRanker(BaseEstimator):
    """App methods in the order the trace differences mention them."""

    def __init__(self, value_sensitive=False):
        self.value_sensitive = value_sensitive

    def fit(self, baseline, failure):
        b, f = check_trace_pair(baseline, failure)
        self.ranking_ = naive_ranking(b, f, self.value_sensitive)
        return self

    def predict(self, X=None):
        check_is_fitted(self, "ranking_")
        return list(self.ranking_)


class OchiaiRanker(BaseEstimator):
    """Spectrum-based ranking with the Ochiai coefficient.

    ``predict`` drops entities whose suspiciousness is zero, since no failing
    test touches them.
    """

    def __init__(self, keep_zero=False):
        self.keep_zero = keep_zero

    def fit(self, matrix, y=None):
        self.scores_ = ochiai(check_coverage(matrix))
        return self

    def predict(self, X=None):
        check_is_fitted(self, "scores_")
        return [e for e, s in self.scores_ if s > 0 or self.keep_zero]
