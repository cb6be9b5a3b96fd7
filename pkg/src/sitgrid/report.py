"""Serialization and reporting: grid CSV, PRISM-language export, reports.

All exports are byte-deterministic for the same inputs: stable ordering
everywhere, shortest round-trip float formatting in CSV/JSON, 17
significant digits in the PRISM export so a cross-checking tool sees the
exact same doubles.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass

from .checker import CheckResult, RankReport
from .errors import ReportError
from .estimate import AugmentedGrid, is_failure_key
from .logs import CoverageReport
from .markov import FAIL_PROP, Dtmc
from .pctl import ProbQuery, SafetyRequirement

REPORT_FORMATS = ("text", "csv", "json")


def _fmt_prob(p: float) -> str:
    # shortest representation that parses back to the same double
    return repr(p)


def _fmt_prism_prob(p: float) -> str:
    return "1.0" if p == 1.0 else f"{p:.17g}"


# ---------------------------------------------------------------------------
# Grid CSV


def export_grid_csv(grid: AugmentedGrid) -> str:
    """``from,to,prob`` rows; row order is the covered order, and within a
    row situation successors come before failure keys."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["from", "to", "prob"])
    for code in grid.covered:
        for key, p in grid.rows[code].items():
            writer.writerow([code, key, _fmt_prob(p)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# PRISM modelling language


def export_prism(dtmc: Dtmc, module_name: str = "sitgrid") -> tuple[str, str]:
    """Emit (model text, labels text) in the PRISM modelling language.

    One integer variable ranges over dense state indices; each state
    contributes one guarded command with its full distribution. The labels
    text maps every proposition to a disjunction of ``s=i`` predicates.
    """
    index = {s: i for i, s in enumerate(dtmc.states)}
    n = len(dtmc.states)
    lines = ["dtmc", "", f"module {module_name}"]
    lines.append(f"  s : [0..{n - 1}] init {index[dtmc.initial]};")
    for s in dtmc.states:
        terms = " + ".join(
            f"{_fmt_prism_prob(p)}:(s'={index[t]})" for t, p in dtmc.trans[s].items()
        )
        lines.append(f"  [] s={index[s]} -> {terms};")
    lines.append("endmodule")
    model_text = "\n".join(lines) + "\n"

    prop_states: dict[str, list[int]] = {}
    for s in dtmc.states:
        for prop in sorted(dtmc.labels[s]):
            prop_states.setdefault(prop, []).append(index[s])
    label_lines = []
    for prop in sorted(prop_states):
        preds = " | ".join(f"s={i}" for i in sorted(prop_states[prop]))
        label_lines.append(f'label "{prop}" = {preds};')
    labels_text = "\n".join(label_lines) + ("\n" if label_lines else "")
    return model_text, labels_text


_PRISM_VAR_RE = re.compile(r"^s\s*:\s*\[0\.\.(\d+)\]\s*init\s*(\d+)\s*;$")
_PRISM_CMD_RE = re.compile(r"^\[\]\s*s=(\d+)\s*->\s*(.+);$")
_PRISM_TERM_RE = re.compile(r"^([^:]+):\(s'=(\d+)\)$")
_PRISM_LABEL_RE = re.compile(r'^label\s+"([^"]+)"\s*=\s*(.+);$')


def read_prism(text: str) -> Dtmc:
    """Re-import a model emitted by :func:`export_prism`.

    This is a reader for our own export subset, not a general PRISM parser.
    State identities are recovered from the singleton labels; the shared
    ``fail`` proposition is reattached from its label line.
    """
    n_states: int | None = None
    initial_index: int | None = None
    rows: dict[int, list[tuple[float, int]]] = {}
    prop_states: dict[str, set[int]] = {}
    saw_dtmc = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if line == "dtmc":
            saw_dtmc = True
            continue
        if line.startswith("module") or line == "endmodule":
            continue
        m = _PRISM_VAR_RE.match(line)
        if m:
            n_states = int(m.group(1)) + 1
            initial_index = int(m.group(2))
            continue
        m = _PRISM_CMD_RE.match(line)
        if m:
            src = int(m.group(1))
            if src in rows:
                raise ReportError(f"line {lineno}: duplicate command for state {src}")
            terms = []
            for part in m.group(2).split("+"):
                tm = _PRISM_TERM_RE.match(part.strip())
                if tm is None:
                    raise ReportError(f"line {lineno}: cannot parse term {part.strip()!r}")
                terms.append((float(tm.group(1)), int(tm.group(2))))
            rows[src] = terms
            continue
        m = _PRISM_LABEL_RE.match(line)
        if m:
            name = m.group(1)
            states = set()
            for part in m.group(2).split("|"):
                part = part.strip()
                if not part.startswith("s="):
                    raise ReportError(f"line {lineno}: cannot parse predicate {part!r}")
                states.add(int(part[2:]))
            prop_states[name] = states
            continue
        raise ReportError(f"line {lineno}: unrecognized line {line!r}")

    if not saw_dtmc:
        raise ReportError("missing 'dtmc' model type header")
    if n_states is None or initial_index is None:
        raise ReportError("missing state variable declaration")
    if set(rows) != set(range(n_states)):
        raise ReportError("commands do not cover every state exactly once")

    identities: dict[int, str] = {}
    for name, states in prop_states.items():
        if name == FAIL_PROP:
            continue
        if len(states) == 1:
            (i,) = states
            if i in identities:
                raise ReportError(f"states {identities[i]!r} and {name!r} both claim index {i}")
            identities[i] = name
    if set(identities) != set(range(n_states)):
        raise ReportError("every state needs exactly one singleton identity label")

    fail_indices = prop_states.get(FAIL_PROP, set())
    states = tuple(identities[i] for i in range(n_states))
    labels = {
        identities[i]: frozenset(
            {identities[i]} | ({FAIL_PROP} if i in fail_indices else set())
        )
        for i in range(n_states)
    }
    trans = {
        identities[i]: {identities[j]: p for p, j in rows[i]}
        for i in range(n_states)
    }
    return Dtmc(
        states=states,
        initial=identities[initial_index],
        trans=trans,
        labels=labels,
    )


# ---------------------------------------------------------------------------
# Report document


@dataclass
class RequirementVerdict:
    id: str
    query_text: str
    value: float
    threshold_op: str | None   # None for quantitative queries
    threshold_p: float | None
    passed: bool | None

    @classmethod
    def from_check(cls, req: SafetyRequirement, result: CheckResult) -> "RequirementVerdict":
        root = req.query.formula
        assert isinstance(root, ProbQuery)
        op = None if root.bound.is_query else root.bound.op
        return cls(
            id=req.id,
            query_text=req.query_text,
            value=result.value,
            threshold_op=op,
            threshold_p=root.bound.p,
            passed=result.passed,
        )


@dataclass
class ReportDocument:
    coverage: CoverageReport | None
    verdicts: list[RequirementVerdict]
    ranking: RankReport | None
    n_states: int | None
    n_transitions: int | None


def build_report(
    coverage: CoverageReport | None = None,
    verdicts: list[RequirementVerdict] | None = None,
    ranking: RankReport | None = None,
    dtmc: Dtmc | None = None,
) -> ReportDocument:
    return ReportDocument(
        coverage=coverage,
        verdicts=sorted(verdicts or [], key=lambda v: v.id),
        ranking=ranking,
        n_states=len(dtmc.states) if dtmc else None,
        n_transitions=dtmc.n_transitions if dtmc else None,
    )


def _verdict_word(passed: bool | None) -> str:
    return "value" if passed is None else ("pass" if passed else "FAIL")


def _render_text(doc: ReportDocument) -> str:
    out: list[str] = []
    if doc.coverage is not None:
        cov = doc.coverage
        total = len(cov.observed) + len(cov.unobserved)
        out.append("== coverage ==")
        out.append(f"observed {len(cov.observed)}/{total} situations (ratio {_fmt_prob(cov.ratio)})")
        if cov.unobserved:
            out.append("unobserved: " + " ".join(cov.unobserved))
        out.append("")
    if doc.verdicts:
        out.append("== requirements ==")
        for v in doc.verdicts:
            thr = "" if v.threshold_op is None else f" threshold {v.threshold_op}{_fmt_prob(v.threshold_p)}"
            out.append(f"{v.id}: {_verdict_word(v.passed)} value={_fmt_prob(v.value)}{thr}  [{v.query_text}]")
        out.append("")
    if doc.ranking is not None:
        out.append(f"== ranking: {doc.ranking.provenance} ==")
        for rank, (code, p) in enumerate(doc.ranking.entries, start=1):
            out.append(f"{rank:3d}. {code}  {_fmt_prob(p)}")
        out.append("")
    if doc.n_states is not None:
        out.append("== model ==")
        out.append(f"states: {doc.n_states}")
        out.append(f"transitions: {doc.n_transitions}")
        out.append("")
    return "\n".join(out)


def _render_csv(doc: ReportDocument) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    sections = 0
    if doc.coverage is not None:
        sections += 1
        writer.writerow(["code", "observed"])
        for code in doc.coverage.observed:
            writer.writerow([code, "true"])
        for code in doc.coverage.unobserved:
            writer.writerow([code, "false"])
    if doc.verdicts:
        if sections:
            buf.write("\n")
        sections += 1
        writer.writerow(["id", "query", "value", "threshold", "passed"])
        for v in doc.verdicts:
            thr = "" if v.threshold_op is None else f"{v.threshold_op}{_fmt_prob(v.threshold_p)}"
            passed = "" if v.passed is None else str(v.passed).lower()
            writer.writerow([v.id, v.query_text, _fmt_prob(v.value), thr, passed])
    if doc.ranking is not None:
        if sections:
            buf.write("\n")
        writer.writerow(["rank", "code", "probability"])
        for rank, (code, p) in enumerate(doc.ranking.entries, start=1):
            writer.writerow([rank, code, _fmt_prob(p)])
    return buf.getvalue()


def _render_json(doc: ReportDocument) -> str:
    payload: dict = {}
    if doc.coverage is not None:
        payload["coverage"] = {
            "observed": list(doc.coverage.observed),
            "unobserved": list(doc.coverage.unobserved),
            "ratio": doc.coverage.ratio,
        }
    if doc.verdicts:
        payload["requirements"] = [
            {
                "id": v.id,
                "query": v.query_text,
                "value": v.value,
                "threshold_op": v.threshold_op,
                "threshold": v.threshold_p,
                "passed": v.passed,
            }
            for v in doc.verdicts
        ]
    if doc.ranking is not None:
        payload["ranking"] = [
            {"rank": i, "code": code, "probability": p}
            for i, (code, p) in enumerate(doc.ranking.entries, start=1)
        ]
    if doc.n_states is not None:
        payload["model"] = {"states": doc.n_states, "transitions": doc.n_transitions}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def render_report(
    coverage: CoverageReport | None,
    verdicts: list[RequirementVerdict] | None,
    ranking: RankReport | None,
    fmt: str,
    dtmc: Dtmc | None = None,
) -> str:
    """Render the report document in one of ``text``, ``csv`` or ``json``."""
    if fmt not in REPORT_FORMATS:
        raise ReportError(f"unknown report format {fmt!r} (choose from {', '.join(REPORT_FORMATS)})")
    doc = build_report(coverage=coverage, verdicts=verdicts, ranking=ranking, dtmc=dtmc)
    if fmt == "text":
        return _render_text(doc)
    if fmt == "csv":
        return _render_csv(doc)
    return _render_json(doc)
