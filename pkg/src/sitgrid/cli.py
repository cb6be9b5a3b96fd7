"""Command-line pipeline: enumerate, coverage, estimate, synthesize, check,
rank, export-prism, sample-log.

Exit codes: 0 success, 1 usage or input error, 2 at least one safety
requirement violated. Every file argument accepts ``-`` for stdin, and
``-o -`` writes to stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import IO

from . import __version__
from .checker import check, rank_situations
from .errors import SitgridError
from .estimate import (
    count_transitions,
    estimate_bayes,
    estimate_mle,
    is_failure_key,
    read_grid_csv,
    sample_log,
)
from .logs import coverage_summary, format_log, parse_log, validate_log
from .markov import synthesize, validate
from .pctl import bounded_eventually, eventually, Atom, load_requirements
from .report import (
    RequirementVerdict,
    export_grid_csv,
    export_prism,
    render_report,
)
from .space import enumerate_situations, load_axes

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for
    # requirement violations here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_with(message))

    @staticmethod
    def exit_with(message: str) -> int:
        print(f"error: {message}", file=sys.stderr)
        return EXIT_ERROR


def _read_text(path: str) -> io.StringIO:
    if path == "-":
        return io.StringIO(sys.stdin.read())
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return io.StringIO(fh.read())
    except OSError as exc:
        raise SitgridError(f"cannot read {path!r}: {exc}") from None


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise SitgridError(f"cannot write {path!r}: {exc}") from None


def _load_space(path: str):
    return load_axes(_read_text(path))


def _load_validated(space, log_path: str):
    log = parse_log(_read_text(log_path))
    return validate_log(log, space)


def _load_model(grid_path: str, initial: str | None):
    grid = read_grid_csv(_read_text(grid_path))
    if initial is None:
        initial = grid.covered[0]
    dtmc = synthesize(grid, initial)
    problems = validate(dtmc)
    if problems:
        raise SitgridError("synthesized model is invalid: " + "; ".join(problems))
    return grid, dtmc


def _seed_value(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sitgrid", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list all situations of an axis space")
    p.add_argument("--axes", required=True, help="axes JSON file")

    p = sub.add_parser("coverage", help="situation coverage of a test log")
    p.add_argument("--axes", required=True)
    p.add_argument("--log", required=True, help="observation log CSV")
    p.add_argument("--plot", help="also render the coverage grid to this image file")

    p = sub.add_parser("estimate", help="estimate the augmented grid from a log")
    p.add_argument("--axes", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--bayes", type=float, metavar="ALPHA",
                   help="Dirichlet smoothing with this alpha instead of plain frequencies")
    p.add_argument("-o", "--output", default="-", help="grid CSV output (default stdout)")

    p = sub.add_parser("synthesize", help="build and validate the DTMC from a grid")
    p.add_argument("--grid", required=True, help="grid CSV file")
    p.add_argument("--initial", required=True, help="initial situation code")

    p = sub.add_parser("check", help="verify PCTL safety requirements against the model")
    p.add_argument("--grid", required=True)
    p.add_argument("--initial", required=True)
    p.add_argument("--requirements", required=True, help="requirements JSON file")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")

    p = sub.add_parser("rank", help="rank situations by probability of reaching a target")
    p.add_argument("--grid", required=True)
    p.add_argument("--target", required=True, help='target proposition (e.g. "fail")')
    p.add_argument("--initial", help="initial code (default: first covered situation)")
    p.add_argument("--horizon", type=int, metavar="K",
                   help="bound the target to K steps (default: unbounded eventually)")
    p.add_argument("--plot", help="also render the ranking chart to this image file")
    p.add_argument("-o", "--output", default="-", help="ranking CSV output (default stdout)")

    p = sub.add_parser("export-prism", help="emit the model in the PRISM language")
    p.add_argument("--grid", required=True)
    p.add_argument("--initial", required=True)
    p.add_argument("-o", "--output", default="-", help="model file (default stdout)")

    p = sub.add_parser("sample-log", help="sample a synthetic log from a known grid (test utility)")
    p.add_argument("--grid", required=True)
    p.add_argument("--initial", required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--steps", type=int, default=50, help="maximum observations per run")
    p.add_argument("--seed", type=_seed_value, default=0)
    p.add_argument("-o", "--output", default="-", help="log CSV output (default stdout)")

    return parser


def _cmd_enumerate(args) -> int:
    space = _load_space(args.axes)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "code"] + [axis.name for axis in space.axes])
    for sit in enumerate_situations(space):
        values = [space.axes[k].values[j] for k, j in enumerate(sit.assignments)]
        writer.writerow([sit.name, sit.code] + values)
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _cmd_coverage(args) -> int:
    space = _load_space(args.axes)
    vlog = _load_validated(space, args.log)
    report = coverage_summary(vlog, space)
    sys.stdout.write(render_report(report, None, None, "text"))
    if args.plot:
        from .plotting import save_coverage_figure

        save_coverage_figure(report, args.plot)
        print(f"coverage figure written to {args.plot}", file=sys.stderr)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    space = _load_space(args.axes)
    vlog = _load_validated(space, args.log)
    report = coverage_summary(vlog, space)
    counts = count_transitions(vlog)
    if args.bayes is not None:
        keys = list(counts.counts)
        keys += sorted({k for row in counts.counts.values() for k in row if is_failure_key(k)})
        support = {code: keys for code in counts.counts}
        grid = estimate_bayes(counts, args.bayes, support, unobserved=report.unobserved)
    else:
        grid = estimate_mle(counts, unobserved=report.unobserved)
    _write_text(args.output, export_grid_csv(grid))
    return EXIT_OK


def _cmd_synthesize(args) -> int:
    grid, dtmc = _load_model(args.grid, args.initial)
    print(f"states: {len(dtmc.states)}")
    print(f"transitions: {dtmc.n_transitions}")
    print(f"initial: {dtmc.initial}")
    print(f"failure states: {' '.join(sorted(dtmc.failure_states)) or '(none)'}")
    print("validation: ok")
    return EXIT_OK


def _cmd_check(args) -> int:
    _, dtmc = _load_model(args.grid, args.initial)
    requirements = load_requirements(_read_text(args.requirements))
    verdicts = []
    for req in requirements:
        result = check(dtmc, req.query)
        verdicts.append(RequirementVerdict.from_check(req, result))
    sys.stdout.write(render_report(None, verdicts, None, args.format, dtmc=dtmc))
    if any(v.passed is False for v in verdicts):
        return EXIT_VIOLATED
    return EXIT_OK


def _cmd_rank(args) -> int:
    _, dtmc = _load_model(args.grid, args.initial)
    goal = Atom(args.target)
    if args.horizon is not None:
        if args.horizon < 0:
            raise SitgridError("--horizon must be non-negative")
        path = bounded_eventually(goal, args.horizon)
    else:
        path = eventually(goal)
    report = rank_situations(dtmc, path)
    _write_text(args.output, render_report(None, None, report, "csv"))
    if args.plot:
        from .plotting import save_ranking_figure

        save_ranking_figure(report, args.plot)
        print(f"ranking figure written to {args.plot}", file=sys.stderr)
    return EXIT_OK


def _cmd_export_prism(args) -> int:
    _, dtmc = _load_model(args.grid, args.initial)
    model_text, labels_text = export_prism(dtmc)
    _write_text(args.output, model_text + "\n" + labels_text)
    return EXIT_OK


def _cmd_sample_log(args) -> int:
    grid = read_grid_csv(_read_text(args.grid))
    if args.runs <= 0 or args.steps <= 0:
        raise SitgridError("--runs and --steps must be positive")
    log = sample_log(grid, args.initial, runs=args.runs, max_steps=args.steps, seed=args.seed)
    _write_text(args.output, format_log(log))
    return EXIT_OK


_COMMANDS = {
    "enumerate": _cmd_enumerate,
    "coverage": _cmd_coverage,
    "estimate": _cmd_estimate,
    "synthesize": _cmd_synthesize,
    "check": _cmd_check,
    "rank": _cmd_rank,
    "export-prism": _cmd_export_prism,
    "sample-log": _cmd_sample_log,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SitgridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
