"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 empty method filter, 3 no behavioral
differences between the traces, 4 empty ranking.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .baselines import format_report, topk_report, write_coverage
from .errors import (
    AppMismatch,
    EmptyRanking,
    EmptyResult,
    FixLocusError,
    InvalidSpec,
    MalformedLine,
    NoSibs,
)
from .estimator import FixLocusLocalizer, NaiveTraceRanker, OchiaiRanker
from .synth import BUILTIN_SCENARIOS, coverage_for, generate_scenario, load_spec, parse_truth, write_truth
from .trace_io import filter_boundary_methods, load_patterns, read_trace, write_method_list, write_trace

EXIT_OK, EXIT_INPUT, EXIT_EMPTY_FILTER, EXIT_NO_DIFF, EXIT_EMPTY_RANKING = 0, 1, 2, 3, 4
TECHNIQUES = ("filo", "naive", "ochiai")

log = logging.getLogger("fixlocus")


@dataclass
class RunConfig:
    value_sensitive: bool = False
    patterns: list = field(default_factory=list)
    out_csv: Path | None = None
    out_dot: Path | None = None
    out_report: Path | None = None
    jobs: int = 1


def _config(args) -> RunConfig:
    jobs = getattr(args, "jobs", 1)
    if jobs < 1:
        raise FixLocusError(f"--jobs must be >= 1, got {jobs}")
    return RunConfig(
        value_sensitive=getattr(args, "value_sensitive", False),
        patterns=load_patterns(args.normalize) if getattr(args, "normalize", None) else [],
        out_csv=getattr(args, "out_csv", None),
        out_dot=getattr(args, "out_dot", None),
        out_report=getattr(args, "out_report", None),
        jobs=jobs,
    )


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        path.write_text(text, encoding="utf-8", newline="\n")
        log.info("wrote %s", path)


def cmd_filter_methods(args) -> int:
    trace = read_trace(args.trace, validate=False)
    methods = filter_boundary_methods(trace, args.app_package)
    _emit(write_method_list(methods), args.output)
    log.info("%d boundary methods for %s", len(methods), args.app_package)
    return EXIT_OK


def cmd_detect(args) -> int:
    cfg = _config(args)
    est = FixLocusLocalizer(cfg.value_sensitive, normalize_patterns=cfg.patterns)
    est.detect(args.baseline, args.failure)
    if not est.sibs_:
        log.warning("no behavioral differences between the traces")
        return EXIT_NO_DIFF
    _emit(est.report(), cfg.out_report)
    return EXIT_OK


def cmd_rank(args) -> int:
    cfg = _config(args)
    est = FixLocusLocalizer(cfg.value_sensitive, normalize_patterns=cfg.patterns)
    est.detect(args.baseline, args.failure)
    if not est.sibs_:
        log.warning("no behavioral differences between the traces")
        return EXIT_NO_DIFF
    est.fit(est.baseline_, est.failure_)
    csv_text, dot_text = est.to_csv(), est.to_dot()
    _emit(csv_text, cfg.out_csv)
    if cfg.out_dot is not None:
        _emit(dot_text, cfg.out_dot)
    return EXIT_OK


def _evaluate_scenario(job):
    """Rankings of one corpus scenario; runs in worker processes for --jobs > 1."""
    directory, techniques, value_sensitive = job
    directory = Path(directory)
    try:
        truth = parse_truth((directory / "truth.txt").read_text(encoding="utf-8"))
    except (FixLocusError, OSError) as exc:
        return {t: None for t in techniques}, [], [f"{directory.name}: {exc}"]
    rankings, errors = {}, []
    baseline, failure = directory / "baseline.trace", directory / "failure.trace"
    for tech in techniques:
        try:
            if tech == "filo":
                ranked = FixLocusLocalizer(value_sensitive).fit_predict(baseline, failure)
            elif tech == "naive":
                ranked = NaiveTraceRanker(value_sensitive).fit(baseline, failure).predict()
            else:
                cov = directory / "coverage.txt"
                ranked = OchiaiRanker().fit(cov).predict() if cov.exists() else None
        except (FixLocusError, OSError) as exc:
            errors.append(f"{directory.name}: {tech}: {exc}")
            ranked = None
        rankings[tech] = [str(m) for m in ranked] if ranked is not None else None
    return rankings, sorted(map(str, truth.fix_methods)), errors


def cmd_compare(args) -> int:
    cfg = _config(args)
    techniques = [t.strip() for t in args.techniques.split(",") if t.strip()]
    unknown = set(techniques) - set(TECHNIQUES)
    if unknown or not techniques:
        raise FixLocusError(f"unknown techniques {sorted(unknown)}; choose from {TECHNIQUES}")
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        raise FixLocusError(f"corpus directory {corpus} does not exist")
    dirs = sorted(p for p in corpus.iterdir() if (p / "truth.txt").is_file())
    if not dirs:
        raise FixLocusError(f"no scenarios in {corpus}")
    jobs = [(str(d), techniques, cfg.value_sensitive) for d in dirs]
    scenarios, names = [], []
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_evaluate_scenario, jobs))
    else:
        results = [_evaluate_scenario(job) for job in jobs]
    for d, (rankings, truth, errors) in zip(dirs, results):
        for e in errors:
            log.warning("%s", e)
        names.append(d.name)
        scenarios.append((rankings, truth))
    report = topk_report(scenarios, techniques)
    _emit(format_report(report, names), cfg.out_report)
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.spec in BUILTIN_SCENARIOS:
        baseline, failure, truth = BUILTIN_SCENARIOS[args.spec]()
        coverage = None
    else:
        spec = load_spec(args.spec)
        if args.seed is not None:
            spec.seed = args.seed
        baseline, failure, truth = generate_scenario(spec)
        coverage = coverage_for(spec, failure)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "baseline.trace": write_trace(baseline),
        "failure.trace": write_trace(failure),
        "truth.txt": write_truth(truth),
    }
    if coverage is not None:
        files["coverage.txt"] = write_coverage(coverage)
    for name, text in files.items():
        _emit(text, out / name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fixlocus",
        description="Localize the app methods to change after a framework upgrade broke a test.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def pair_options(p):
        p.add_argument("--baseline", required=True, type=Path, help="trace of the passing run")
        p.add_argument("--failure", required=True, type=Path, help="trace of the failing run")
        p.add_argument("--value-sensitive", action="store_true", help="diff argument and return values too")
        p.add_argument("--normalize", type=Path, metavar="PATTERN_FILE", help="extra value normalization patterns")

    p = sub.add_parser("filter-methods", help="list the boundary methods to instrument")
    p.add_argument("trace", type=Path)
    p.add_argument("--app-package", required=True)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_filter_methods)

    p = sub.add_parser("detect", help="report suspicious invocation blocks")
    pair_options(p)
    p.add_argument("--out-report", type=Path)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("rank", help="rank fix-locus candidates (CSV) and emit the call tree (DOT)")
    pair_options(p)
    p.add_argument("--out-csv", type=Path)
    p.add_argument("--out-dot", type=Path)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("compare", help="Top-k comparison of techniques over a scenario corpus")
    p.add_argument("corpus", type=Path)
    p.add_argument("--techniques", default=",".join(TECHNIQUES))
    p.add_argument("--value-sensitive", action="store_true")
    p.add_argument("--out-report", type=Path)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="generate a scenario (spec file or built-in name)")
    p.add_argument("spec", help=f"JSON spec path or one of: {', '.join(BUILTIN_SCENARIOS)}")
    p.add_argument("outdir", type=Path)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)
    return parser


class _Formatter(logging.Formatter):
    COLORS = {logging.WARNING: "\033[33m", logging.ERROR: "\033[31m"}

    def __init__(self, color: bool):
        super().__init__("%(levelname)s: %(message)s")
        self.color = color

    def format(self, record):
        text = super().format(record)
        code = self.COLORS.get(record.levelno)
        return f"{code}{text}\033[0m" if self.color and code else text


def _setup_logging(verbose: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    color = sys.stderr.isatty() and not os.environ.get("FIXLOCUS_NO_COLOR")
    handler.setFormatter(_Formatter(color))
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    log.propagate = False


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    try:
        return args.func(args)
    except EmptyResult as exc:
        log.error("%s", exc)
        return EXIT_EMPTY_FILTER
    except NoSibs as exc:
        log.error("no behavioral differences: %s", exc)
        return EXIT_NO_DIFF
    except EmptyRanking as exc:
        log.error("%s", exc)
        return EXIT_EMPTY_RANKING
    except (MalformedLine, AppMismatch, InvalidSpec) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_INPUT
    except FixLocusError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
