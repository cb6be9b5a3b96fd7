"""Probabilistic model checking of PCTL queries over a Dtmc.

Until probabilities are computed with the standard two-stage scheme:
qualitative precomputation first (the Prob0/Prob1 sets, by backward graph
fixpoints), then Gauss-Seidel iteration on the remaining states. The
precomputation guarantees the restricted linear system has a unique
solution and pins the probability-0 and probability-1 states exactly, with
no floating drift.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import CheckError
from .markov import Dtmc
from .pctl import (
    And,
    Atom,
    Bound,
    BoundedUntil,
    FalseFormula,
    Next,
    Not,
    PathFormula,
    ProbQuery,
    Query,
    StateFormula,
    TrueFormula,
    Until,
    format_path,
    validate_formula,
)

GS_EPSILON = 1e-10          # stop when the largest per-state update is below this
DEFAULT_MAX_ITERS = 10**6
MAX_ITERS_ENV = "SITGRID_MAX_ITERS"
VERDICT_SLACK = 1e-12       # slack toward satisfaction, absorbs solver noise


@dataclass
class ProbVector:
    """Per-state probabilities for one path formula, clamped to [0, 1]."""

    values: dict[str, float]
    provenance: str

    def __getitem__(self, state: str) -> float:
        return self.values[state]


@dataclass
class CheckResult:
    query: Query
    state: str                      # filter state, or the model's initial state
    value: float
    passed: bool | None             # None for quantitative (=?) queries
    sat_set: frozenset[str] | None  # states satisfying a threshold formula
    values: ProbVector


@dataclass
class RankReport:
    """Situations ordered from most to least critical; ties lexicographic."""

    entries: tuple[tuple[str, float], ...]
    provenance: str


def _satisfies(op: str, value: float, p: float) -> bool:
    if op == "<":
        return value < p + VERDICT_SLACK
    if op == "<=":
        return value <= p + VERDICT_SLACK
    if op == ">":
        return value > p - VERDICT_SLACK
    if op == ">=":
        return value >= p - VERDICT_SLACK
    raise CheckError(f"unknown threshold operator {op!r}")


def _max_iters() -> int:
    raw = os.environ.get(MAX_ITERS_ENV)
    if raw is None:
        return DEFAULT_MAX_ITERS
    try:
        n = int(raw)
    except ValueError:
        raise CheckError(f"{MAX_ITERS_ENV}={raw!r} is not an integer") from None
    if n <= 0:
        raise CheckError(f"{MAX_ITERS_ENV} must be positive, got {n}")
    return n


def _clamp(v: float) -> float:
    return 0.0 if v < 0.0 else 1.0 if v > 1.0 else v


def sat(dtmc: Dtmc, formula: StateFormula) -> frozenset[str]:
    """States satisfying a state formula, by bottom-up set evaluation.

    Threshold-bounded probability operators may be nested; quantitative
    ``=?`` bounds are only meaningful at the root of a query.
    """
    if isinstance(formula, TrueFormula):
        return frozenset(dtmc.states)
    if isinstance(formula, FalseFormula):
        return frozenset()
    if isinstance(formula, Atom):
        return dtmc.states_with(formula.label)
    if isinstance(formula, Not):
        return frozenset(dtmc.states) - sat(dtmc, formula.operand)
    if isinstance(formula, And):
        return sat(dtmc, formula.left) & sat(dtmc, formula.right)
    if isinstance(formula, ProbQuery):
        if formula.bound.is_query:
            raise CheckError("P=? is only allowed at the root of a query; nest a threshold instead")
        vec = path_probabilities(dtmc, formula.path)
        bound = formula.bound
        return frozenset(s for s in dtmc.states if _satisfies(bound.op, vec[s], bound.p))
    raise CheckError(f"cannot evaluate {type(formula).__name__}")


def prob_next(dtmc: Dtmc, target: frozenset[str]) -> ProbVector:
    """value[s] = one-step probability of entering the target set."""
    values = {
        s: _clamp(sum(p for t, p in dtmc.trans[s].items() if t in target))
        for s in dtmc.states
    }
    return ProbVector(values=values, provenance="X <target>")


def prob_bounded_until(
    dtmc: Dtmc, phi1_set: frozenset[str], phi2_set: frozenset[str], k: int
) -> ProbVector:
    """Probability of reaching phi2 within k steps while staying in phi1."""
    if k < 0:
        raise CheckError(f"step bound must be non-negative, got {k}")
    x = {s: 1.0 if s in phi2_set else 0.0 for s in dtmc.states}
    recurse = [s for s in dtmc.states if s in phi1_set and s not in phi2_set]
    for _ in range(k):
        nxt = dict(x)
        for s in recurse:
            nxt[s] = sum(p * x[t] for t, p in dtmc.trans[s].items())
        x = nxt
    return ProbVector(
        values={s: _clamp(v) for s, v in x.items()},
        provenance=f"<phi1> U<={k} <phi2>",
    )


def _backward_closure(
    dtmc: Dtmc, pred: dict[str, list[str]], seed: frozenset[str], through: frozenset[str]
) -> set[str]:
    """Least fixpoint: seed plus states in `through` with a successor in the set."""
    closure = set(seed)
    frontier = list(seed)
    while frontier:
        t = frontier.pop()
        for s in pred.get(t, ()):
            if s in through and s not in closure:
                closure.add(s)
                frontier.append(s)
    return closure


def prob01(
    dtmc: Dtmc, phi1_set: frozenset[str], phi2_set: frozenset[str]
) -> tuple[frozenset[str], frozenset[str]]:
    """Qualitative precomputation for phi1 U phi2.

    Prob0: states that cannot reach phi2 along phi1-states at all.
    Prob1: states that satisfy the until with probability exactly 1
    (those that cannot reach a Prob0 state while staying in phi1 \\ phi2).
    """
    pred: dict[str, list[str]] = {s: [] for s in dtmc.states}
    for s in dtmc.states:
        for t, p in dtmc.trans[s].items():
            if p > 0.0:
                pred[t].append(s)
    through = frozenset(phi1_set - phi2_set)
    can_reach = _backward_closure(dtmc, pred, phi2_set, through)
    prob0 = frozenset(dtmc.states) - can_reach
    reaches_prob0 = _backward_closure(dtmc, pred, prob0, through)
    prob1 = frozenset(dtmc.states) - reaches_prob0
    return prob0, prob1


def prob_until(
    dtmc: Dtmc, phi1_set: frozenset[str], phi2_set: frozenset[str]
) -> ProbVector:
    """Unbounded until probabilities.

    States in Prob0/Prob1 are fixed to exactly 0/1; the rest solve
    x[s] = sum_t P(s,t) x[t] by Gauss-Seidel sweeps until the largest
    per-state update falls below ``GS_EPSILON``.
    """
    prob0, prob1 = prob01(dtmc, phi1_set, phi2_set)
    x: dict[str, float] = {}
    for s in dtmc.states:
        x[s] = 1.0 if s in prob1 else 0.0
    unknown = [s for s in dtmc.states if s not in prob0 and s not in prob1]
    if unknown:
        max_iters = _max_iters()
        rows = {s: list(dtmc.trans[s].items()) for s in unknown}
        delta = None
        for _ in range(max_iters):
            delta = 0.0
            for s in unknown:
                new = sum(p * x[t] for t, p in rows[s])
                d = abs(new - x[s])
                if d > delta:
                    delta = d
                x[s] = new
            if delta < GS_EPSILON:
                break
        else:
            raise CheckError(
                f"until solver did not converge within {max_iters} iterations "
                f"(last residual {delta!r}); raise {MAX_ITERS_ENV} or check the model"
            )
        for s in unknown:
            x[s] = _clamp(x[s])
    return ProbVector(values=x, provenance="<phi1> U <phi2>")


def path_probabilities(dtmc: Dtmc, path: PathFormula) -> ProbVector:
    """Dispatch a path formula to the matching probability computation."""
    if isinstance(path, Next):
        vec = prob_next(dtmc, sat(dtmc, path.operand))
    elif isinstance(path, BoundedUntil):
        vec = prob_bounded_until(dtmc, sat(dtmc, path.left), sat(dtmc, path.right), path.steps)
    elif isinstance(path, Until):
        vec = prob_until(dtmc, sat(dtmc, path.left), sat(dtmc, path.right))
    else:
        raise CheckError(f"cannot evaluate path formula {type(path).__name__}")
    return ProbVector(values=vec.values, provenance=format_path(path))


def check(dtmc: Dtmc, query: Query) -> CheckResult:
    """Evaluate a query; the verdict is taken at the filter state if present,
    at the model's initial state otherwise."""
    problems = validate_formula(query, dtmc)
    if problems:
        raise CheckError("query does not resolve against the model: " + "; ".join(problems))
    root = query.formula
    assert isinstance(root, ProbQuery)  # Query invariant
    vec = path_probabilities(dtmc, root.path)
    state = query.filter_state if query.filter_state is not None else dtmc.initial
    value = vec[state]
    if root.bound.is_query:
        return CheckResult(query=query, state=state, value=value, passed=None, sat_set=None, values=vec)
    bound = root.bound
    sat_set = frozenset(s for s in dtmc.states if _satisfies(bound.op, vec[s], bound.p))
    return CheckResult(
        query=query,
        state=state,
        value=value,
        passed=state in sat_set,
        sat_set=sat_set,
        values=vec,
    )


def rank_situations(dtmc: Dtmc, path: PathFormula) -> RankReport:
    """Order situations by the probability of the path formula, descending.

    Ties break lexicographically by code. Failure states are not ranked.
    """
    if isinstance(path, Next):
        raise CheckError("ranking expects an until/eventually path formula")
    vec = path_probabilities(dtmc, path)
    entries = sorted(
        ((code, vec[code]) for code in dtmc.situation_states),
        key=lambda e: (-e[1], e[0]),
    )
    return RankReport(entries=tuple(entries), provenance=vec.provenance)
