"""Parsing and validation of situation-labelled test logs.

Log files are CSV with header ``run_id,step,code,event``. Each row is one
step-sampled observation of the situation the vehicle was in. ``event`` is
empty for intermediate steps, ``end`` when the run terminated normally, or
``fail:<label>`` when it terminated in a safety violation. A terminal event
closes its run: no further steps may follow.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import IO

from .errors import LogError
from .space import SituationSpace, decode

LOG_HEADER = ("run_id", "step", "code", "event")
END = "end"
FAIL_PREFIX = "fail:"


@dataclass
class RunRecord:
    run_id: str
    steps: list[tuple[int, str]]
    terminal: str  # "end" or "fail:<label>"

    @property
    def is_violation(self) -> bool:
        return self.terminal.startswith(FAIL_PREFIX)

    @property
    def violation_label(self) -> str | None:
        if self.is_violation:
            return self.terminal[len(FAIL_PREFIX):]
        return None


@dataclass
class ObservationLog:
    runs: list[RunRecord]
    space_hash: str | None = None

    @property
    def codes(self) -> set[str]:
        return {code for run in self.runs for _, code in run.steps}


@dataclass
class ValidatedLog:
    """An observation log checked against a space, with decoded situation ids."""

    log: ObservationLog
    space: SituationSpace
    # run_id -> situation id per step, parallel to RunRecord.steps
    ids: dict[str, tuple[int, ...]] = field(default_factory=dict)


@dataclass
class CoverageReport:
    observed: tuple[str, ...]    # enumeration order
    unobserved: tuple[str, ...]  # enumeration order
    ratio: float


def parse_log(stream: IO[str]) -> ObservationLog:
    """Parse a log CSV stream into runs grouped by run_id.

    Rows of different runs may interleave; step order within a run follows
    row order and step indices must strictly increase. Every run must close
    with an ``end`` or ``fail:<label>`` event. All diagnostics carry the
    1-based line number of the offending row.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        return ObservationLog(runs=[])
    if tuple(h.strip() for h in header) != LOG_HEADER:
        raise LogError(f"line 1: expected header {','.join(LOG_HEADER)!r}, got {','.join(header)!r}")

    order: list[str] = []
    runs: dict[str, RunRecord] = {}
    closed: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise LogError(f"line {lineno}: expected 4 fields, got {len(row)}")
        run_id, step_text, code, event = (f.strip() for f in row)
        if not run_id:
            raise LogError(f"line {lineno}: empty run_id")
        try:
            step = int(step_text)
        except ValueError:
            raise LogError(f"line {lineno}: step {step_text!r} is not an integer") from None
        if step < 0:
            raise LogError(f"line {lineno}: step {step} is negative")
        if not code:
            raise LogError(f"line {lineno}: empty situation code")
        if run_id in closed:
            raise LogError(f"line {lineno}: run {run_id!r} already terminated, extra step {step}")
        if run_id not in runs:
            runs[run_id] = RunRecord(run_id=run_id, steps=[], terminal="")
            order.append(run_id)
        run = runs[run_id]
        if run.steps:
            last_step = run.steps[-1][0]
            if step == last_step:
                raise LogError(f"line {lineno}: duplicate step {step} in run {run_id!r}")
            if step < last_step:
                raise LogError(
                    f"line {lineno}: step {step} in run {run_id!r} not above previous step {last_step}"
                )
        run.steps.append((step, code))
        if event == "":
            continue
        if event == END or event.startswith(FAIL_PREFIX):
            if event.startswith(FAIL_PREFIX) and not event[len(FAIL_PREFIX):]:
                raise LogError(f"line {lineno}: violation event {event!r} has an empty label")
            run.terminal = event
            closed.add(run_id)
        else:
            raise LogError(
                f"line {lineno}: unknown event {event!r} (expected empty, {END!r} or 'fail:<label>')"
            )

    open_runs = [rid for rid in order if rid not in closed]
    if open_runs:
        raise LogError(
            "runs never terminated (missing 'end' or 'fail:<label>' event): "
            + ", ".join(repr(r) for r in open_runs)
        )
    return ObservationLog(runs=[runs[rid] for rid in order])


def format_log(log: ObservationLog) -> str:
    """Serialize a log back to its CSV form (LF endings, UTF-8 friendly)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LOG_HEADER)
    for run in log.runs:
        for i, (step, code) in enumerate(run.steps):
            event = run.terminal if i == len(run.steps) - 1 else ""
            writer.writerow([run.run_id, step, code, event])
    return buf.getvalue()


def validate_log(log: ObservationLog, space: SituationSpace) -> ValidatedLog:
    """Check every code in the log against the space and annotate situation ids."""
    ids: dict[str, tuple[int, ...]] = {}
    for run in log.runs:
        decoded = []
        for step, code in run.steps:
            try:
                decoded.append(decode(code, space).id)
            except Exception as exc:
                raise LogError(f"run {run.run_id!r} step {step}: {exc}") from None
        ids[run.run_id] = tuple(decoded)
    annotated = ObservationLog(runs=log.runs, space_hash=space.digest())
    return ValidatedLog(log=annotated, space=space, ids=ids)


def coverage_summary(log: ObservationLog | ValidatedLog, space: SituationSpace) -> CoverageReport:
    """Partition the enumeration into observed and unobserved codes."""
    obs_log = log.log if isinstance(log, ValidatedLog) else log
    seen = obs_log.codes
    from .space import enumerate_situations

    observed = []
    unobserved = []
    all_codes = set()
    for sit in enumerate_situations(space):
        all_codes.add(sit.code)
        if sit.code in seen:
            observed.append(sit.code)
        else:
            unobserved.append(sit.code)
    unknown = seen - all_codes
    if unknown:
        raise LogError(
            "log contains codes outside the space: " + ", ".join(sorted(unknown))
        )
    return CoverageReport(
        observed=tuple(observed),
        unobserved=tuple(unobserved),
        ratio=len(observed) / space.cardinality,
    )
