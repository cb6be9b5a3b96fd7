"""Transition counting and estimation of the augmented situation coverage grid.

Counting reduces a validated observation log to per-situation successor
counts (the sufficient statistic). Two estimators turn counts into a
row-stochastic augmented grid: plain relative frequencies, or the posterior
mean under a symmetric Dirichlet prior for rows with little or no data.
Successor keys are either situation codes or ``fail:<label>`` keys; the
mass a row puts on failure keys is that situation's empirical violation
probability.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from typing import IO, Mapping, Sequence

from .errors import EstimationError, GridError
from .logs import FAIL_PREFIX, ObservationLog, RunRecord, ValidatedLog

ROW_SUM_TOLERANCE = 1e-9     # rows must be stochastic within this
ROW_RENORM_TOLERANCE = 1e-6  # file rows off by at most this are renormalized
GRID_HEADER = ("from", "to", "prob")


def is_failure_key(key: str) -> bool:
    return key.startswith(FAIL_PREFIX) and len(key) > len(FAIL_PREFIX)


@dataclass
class TransitionCounts:
    """Observed successor counts per situation code.

    ``counts`` has one entry per observed situation, in enumeration order,
    possibly empty when a situation was only ever seen as the last step of a
    normally terminated run.
    """

    counts: dict[str, dict[str, int]]

    @property
    def totals(self) -> dict[str, int]:
        return {code: sum(row.values()) for code, row in self.counts.items()}


@dataclass
class EstimatorMeta:
    method: str  # "mle" | "dirichlet" | "file"
    alpha: float | None = None
    sample_sizes: dict[str, int] = field(default_factory=dict)


@dataclass
class AugmentedGrid:
    """Per-situation categorical distribution over successor keys.

    ``covered`` fixes row order (enumeration order when estimated from a
    log, file order when read from CSV). Every successor situation code is
    itself covered; rows are stochastic within ``ROW_SUM_TOLERANCE``.
    """

    covered: tuple[str, ...]
    rows: dict[str, dict[str, float]]
    meta: EstimatorMeta
    unobserved: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if set(self.covered) != set(self.rows):
            raise GridError("covered list and row keys disagree")
        if len(set(self.covered)) != len(self.covered):
            raise GridError("duplicate codes in covered list")
        covered_set = set(self.covered)
        order = {code: i for i, code in enumerate(self.covered)}
        for code in self.covered:
            row = self.rows[code]
            if not row:
                raise GridError(f"row {code!r} is empty")
            total = 0.0
            for key, p in row.items():
                if not 0.0 <= p <= 1.0:
                    raise GridError(f"row {code!r}: probability {p!r} for {key!r} outside [0, 1]")
                if not is_failure_key(key) and key not in covered_set:
                    raise GridError(
                        f"row {code!r}: successor {key!r} is not a covered situation "
                        "(observing a transition implies observing the target)"
                    )
                total += p
            if abs(total - 1.0) > ROW_SUM_TOLERANCE:
                raise GridError(f"row {code!r} sums to {total!r}, not 1")
            # canonical key order: situation successors in covered order, then failure keys
            self.rows[code] = dict(
                sorted(row.items(), key=lambda kv: (1, kv[0]) if is_failure_key(kv[0]) else (0, order[kv[0]]))
            )

    @property
    def failure_labels(self) -> tuple[str, ...]:
        labels = {k for row in self.rows.values() for k in row if is_failure_key(k)}
        return tuple(sorted(labels))


def count_transitions(vlog: ValidatedLog) -> TransitionCounts:
    """Reduce a validated log to successor counts.

    Each consecutive step pair contributes one count; a run ending in a
    violation adds one count from its final code to the ``fail:<label>``
    key; normal termination contributes nothing for the final step.
    """
    observed: dict[str, int] = {}  # code -> situation id, for ordering
    for run in vlog.log.runs:
        for (_, code), sid in zip(run.steps, vlog.ids[run.run_id]):
            observed.setdefault(code, sid)
    counts: dict[str, dict[str, int]] = {
        code: {} for code in sorted(observed, key=observed.get)
    }
    for run in vlog.log.runs:
        codes = [code for _, code in run.steps]
        for a, b in zip(codes, codes[1:]):
            row = counts[a]
            row[b] = row.get(b, 0) + 1
        if run.is_violation:
            row = counts[codes[-1]]
            row[run.terminal] = row.get(run.terminal, 0) + 1
    return TransitionCounts(counts=counts)


def estimate_mle(counts: TransitionCounts, unobserved: Sequence[str] = ()) -> AugmentedGrid:
    """Relative-frequency estimate: rows[c][k] = counts[c][k] / total[c].

    Every counted situation must have been seen leaving at least once.
    """
    dead_ends = [code for code, row in counts.counts.items() if sum(row.values()) == 0]
    if dead_ends:
        raise EstimationError(
            "dead-end situation(s) observed only as the final step of normally "
            f"terminated runs: {', '.join(dead_ends)}; collect more tests covering "
            "their successors, or use the Bayesian estimator with explicit support"
        )
    rows: dict[str, dict[str, float]] = {}
    sizes: dict[str, int] = {}
    for code, row in counts.counts.items():
        total = sum(row.values())
        rows[code] = {key: k / total for key, k in row.items()}
        sizes[code] = total
    return AugmentedGrid(
        covered=tuple(counts.counts),
        rows=rows,
        meta=EstimatorMeta(method="mle", sample_sizes=sizes),
        unobserved=tuple(unobserved),
    )


def estimate_bayes(
    counts: TransitionCounts,
    alpha: float,
    support: Mapping[str, Sequence[str]],
    unobserved: Sequence[str] = (),
) -> AugmentedGrid:
    """Posterior mean under a symmetric Dirichlet(alpha) prior per row.

    rows[c][k] = (counts[c][k] + alpha) / (total[c] + alpha * |support(c)|)
    for every k in support(c). The support of a row must include every key
    that was actually counted; rows absent from the counts but present in
    the support get the prior-only (uniform) distribution.
    """
    if not alpha > 0:
        raise EstimationError(f"alpha must be positive, got {alpha!r}")
    rows: dict[str, dict[str, float]] = {}
    sizes: dict[str, int] = {}
    row_order = list(counts.counts)
    row_order += [code for code in support if code not in counts.counts]
    for code in row_order:
        row = counts.counts.get(code, {})
        keys = list(support.get(code, ()))
        if len(set(keys)) != len(keys):
            raise EstimationError(f"row {code!r}: duplicate keys in support")
        missing = [k for k in row if k not in keys]
        if missing:
            raise EstimationError(
                f"row {code!r}: support is missing counted key(s) {', '.join(missing)}"
            )
        if not keys:
            raise EstimationError(f"row {code!r}: empty support")
        total = sum(row.values())
        denom = total + alpha * len(keys)
        rows[code] = {key: (row.get(key, 0) + alpha) / denom for key in keys}
        sizes[code] = total
    return AugmentedGrid(
        covered=tuple(row_order),
        rows=rows,
        meta=EstimatorMeta(method="dirichlet", alpha=alpha, sample_sizes=sizes),
        unobserved=tuple(unobserved),
    )


def failure_probability(grid: AugmentedGrid, code: str) -> float:
    """Total mass the row of ``code`` puts on failure keys."""
    if code not in grid.rows:
        raise EstimationError(f"situation {code!r} is not covered by the grid")
    return sum(p for key, p in grid.rows[code].items() if is_failure_key(key))


def read_grid_csv(stream: IO[str]) -> AugmentedGrid:
    """Read a ``from,to,prob`` grid file.

    Row order in the file defines the covered order. Rows whose sum is off
    by at most ``ROW_RENORM_TOLERANCE`` are renormalized (hand-authored
    files with truncated decimals); anything worse is rejected.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise GridError("empty grid file") from None
    if tuple(h.strip() for h in header) != GRID_HEADER:
        raise GridError(f"line 1: expected header {','.join(GRID_HEADER)!r}, got {','.join(header)!r}")
    rows: dict[str, dict[str, float]] = {}
    for lineno, rec in enumerate(reader, start=2):
        if not rec or (len(rec) == 1 and not rec[0].strip()):
            continue
        if len(rec) != 3:
            raise GridError(f"line {lineno}: expected 3 fields, got {len(rec)}")
        src, dst, prob_text = (f.strip() for f in rec)
        if not src or not dst:
            raise GridError(f"line {lineno}: empty from/to field")
        if dst.startswith(FAIL_PREFIX) and not is_failure_key(dst):
            raise GridError(f"line {lineno}: failure key {dst!r} has an empty label")
        if dst == "fail":
            raise GridError(f"line {lineno}: bare 'fail' target; use 'fail:<label>'")
        try:
            p = float(prob_text)
        except ValueError:
            raise GridError(f"line {lineno}: probability {prob_text!r} is not a number") from None
        row = rows.setdefault(src, {})
        if dst in row:
            raise GridError(f"line {lineno}: duplicate entry {src!r} -> {dst!r}")
        row[dst] = p
    for code, row in rows.items():
        total = sum(row.values())
        dev = abs(total - 1.0)
        if dev <= ROW_SUM_TOLERANCE:
            continue
        if dev <= ROW_RENORM_TOLERANCE:
            rows[code] = {k: p / total for k, p in row.items()}
        else:
            raise GridError(f"row {code!r} sums to {total!r}; deviation exceeds {ROW_RENORM_TOLERANCE}")
    return AugmentedGrid(
        covered=tuple(rows),
        rows=rows,
        meta=EstimatorMeta(method="file"),
    )


def sample_log(
    grid: AugmentedGrid,
    initial: str,
    runs: int,
    max_steps: int,
    seed: int,
) -> ObservationLog:
    """Synthesize an observation log by random walks over a known grid.

    Each run starts at ``initial`` and walks until it draws a failure key
    (terminal ``fail:<label>``) or reaches ``max_steps`` observations
    (terminal ``end``). Deterministic for a fixed seed; intended as a test
    utility for estimator validation.
    """
    if initial not in grid.rows:
        raise EstimationError(f"initial situation {initial!r} is not covered by the grid")
    rng = random.Random(seed)
    records: list[RunRecord] = []
    width = len(str(runs))
    for r in range(1, runs + 1):
        code = initial
        steps: list[tuple[int, str]] = []
        terminal = "end"
        for step in range(max_steps):
            steps.append((step, code))
            row = grid.rows[code]
            keys = list(row)
            nxt = rng.choices(keys, weights=[row[k] for k in keys])[0]
            if is_failure_key(nxt):
                terminal = nxt
                break
            code = nxt
        records.append(RunRecord(run_id=f"r{r:0{width}d}", steps=steps, terminal=terminal))
    return ObservationLog(runs=records)
