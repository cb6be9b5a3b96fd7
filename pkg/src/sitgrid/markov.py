"""System-level discrete-time Markov chain synthesized from an augmented grid.

States are the covered situation codes plus one absorbing state per
distinct failure label. Each state carries its own identity proposition
(the code, or the full ``fail:<label>`` key); failure states additionally
carry the shared ``fail`` proposition.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ModelError
from .estimate import ROW_SUM_TOLERANCE, AugmentedGrid, is_failure_key

FAIL_PROP = "fail"


@dataclass
class Dtmc:
    """Sparse row-stochastic transition system. Immutable by convention."""

    states: tuple[str, ...]
    initial: str
    trans: dict[str, dict[str, float]]
    labels: dict[str, frozenset[str]]

    @property
    def n_transitions(self) -> int:
        return sum(len(row) for row in self.trans.values())

    def states_with(self, prop: str) -> frozenset[str]:
        return frozenset(s for s in self.states if prop in self.labels[s])

    @property
    def failure_states(self) -> frozenset[str]:
        return self.states_with(FAIL_PROP)

    @property
    def situation_states(self) -> tuple[str, ...]:
        return tuple(s for s in self.states if FAIL_PROP not in self.labels[s])

    @property
    def propositions(self) -> frozenset[str]:
        return frozenset(p for props in self.labels.values() for p in props)


def synthesize(grid: AugmentedGrid, initial: str) -> Dtmc:
    """Build the chain: grid rows verbatim, failure states absorbing.

    State order is the covered order followed by failure labels sorted
    lexicographically. Zero-probability entries are dropped from the sparse
    structure; failure states get a probability-1 self-loop.
    """
    if initial not in grid.rows:
        raise ModelError(f"initial situation {initial!r} is not covered by the grid")
    fail_states = grid.failure_labels
    states = grid.covered + fail_states
    trans: dict[str, dict[str, float]] = {}
    labels: dict[str, frozenset[str]] = {}
    for code in grid.covered:
        trans[code] = {k: p for k, p in grid.rows[code].items() if p > 0.0}
        labels[code] = frozenset({code})
    for f in fail_states:
        trans[f] = {f: 1.0}
        labels[f] = frozenset({f, FAIL_PROP})
    return Dtmc(states=states, initial=initial, trans=trans, labels=labels)


def validate(dtmc: Dtmc) -> list[str]:
    """All structural violations, not just the first. Empty list means ok."""
    problems: list[str] = []
    state_set = set(dtmc.states)
    if len(state_set) != len(dtmc.states):
        problems.append("duplicate state ids")
    if dtmc.initial not in state_set:
        problems.append(f"initial state {dtmc.initial!r} is not a state")
    if set(dtmc.trans) != state_set or set(dtmc.labels) != state_set:
        problems.append("transition/label maps do not cover exactly the state set")

    identities_seen: dict[str, str] = {}
    for s in dtmc.states:
        row = dtmc.trans.get(s, {})
        total = 0.0
        for t, p in row.items():
            if t not in state_set:
                problems.append(f"state {s!r}: transition to unknown state {t!r}")
            if not 0.0 <= p <= 1.0:
                problems.append(f"state {s!r}: probability {p!r} to {t!r} outside [0, 1]")
            total += p
        if abs(total - 1.0) > ROW_SUM_TOLERANCE:
            problems.append(f"state {s!r}: outgoing probabilities sum to {total!r}, not 1")

        props = dtmc.labels.get(s, frozenset())
        identity = [p for p in props if p != FAIL_PROP]
        if len(identity) != 1:
            problems.append(f"state {s!r}: expected exactly one identity proposition, got {sorted(props)}")
        else:
            if identity[0] in identities_seen:
                problems.append(
                    f"states {identities_seen[identity[0]]!r} and {s!r} share identity {identity[0]!r}"
                )
            identities_seen[identity[0]] = s
        if is_failure_key(s) and FAIL_PROP not in props:
            problems.append(f"state {s!r}: failure state missing {FAIL_PROP!r} proposition")

        if FAIL_PROP in props:
            if row.get(s) != 1.0 or len(row) != 1:
                problems.append(
                    f"state {s!r}: failure state must be absorbing (self-loop 1), has {row!r}"
                )
    return problems


def reachable(dtmc: Dtmc, start: str) -> frozenset[str]:
    """Forward closure over positive-probability edges, including ``start``."""
    if start not in set(dtmc.states):
        raise ModelError(f"unknown state {start!r}")
    seen = {start}
    frontier = [start]
    while frontier:
        s = frontier.pop()
        for t, p in dtmc.trans[s].items():
            if p > 0.0 and t not in seen:
                seen.add(t)
                frontier.append(t)
    return frozenset(seen)
