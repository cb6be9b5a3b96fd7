#!/usr/bin/env python3
"""Regenerate src/sitgrid/demo/warehouse.csv from the target count table.

Every situation row has exactly 100 outgoing observations, so the
relative frequencies equal the two-decimal probabilities below. The table
realizes the published all-clear row (0.85 stay, 0.05 other-AGV, 0.06
door, 0.03 human, 0.01 failure residual) and the 0.03 human-to-crowded
transition; the remaining rows are plausible one-factor changes.

The log is produced by decomposing the count multigraph into runs
(trails): at each step the walk consumes the most-frequent remaining
outgoing edge (ties prefer situations over failures, then lexicographic).
A consumed failure edge terminates its run with the violation event; a
situation with no remaining outgoing edges terminates with `end`.
Deterministic end to end, so the CSV is reproducible byte for byte.
"""

import csv
import io
from pathlib import Path

FAIL = "fail:collision"

# code order below is the enumeration order of the demo axes
COUNTS = {
    "NNNN": {"NNNN": 85, "NNNY": 5, "YNNN": 6, "NNYN": 3, FAIL: 1},
    "NNNY": {"NNNY": 70, "NNNN": 15, "NNYY": 8, "NYNY": 4, FAIL: 3},
    "NNYN": {"NNYN": 72, "NNNN": 14, "NNYY": 3, "NYYN": 6, FAIL: 5},
    "NNYY": {"NNYY": 64, "NNNY": 12, "NNYN": 10, "NYYY": 6, FAIL: 8},
    "NYNN": {"NYNN": 75, "NNNN": 12, "NYNY": 4, "NYYN": 5, FAIL: 4},
    "NYNY": {"NYNY": 66, "NNNY": 10, "NYNN": 11, "NYYY": 6, FAIL: 7},
    "NYYN": {"NYYN": 63, "NNYN": 9, "NYNN": 12, "NYYY": 7, FAIL: 9},
    "NYYY": {"NYYY": 55, "NNYY": 11, "NYNY": 10, "NYYN": 9, FAIL: 15},
    "YNNN": {"YNNN": 68, "NNNN": 18, "YNNY": 5, "YNYN": 4, FAIL: 5},
    "YNNY": {"YNNY": 60, "NNNY": 14, "YNNN": 8, "YNYY": 6, FAIL: 12},
    "YNYN": {"YNYN": 58, "NNYN": 12, "YNNN": 8, "YNYY": 8, FAIL: 14},
    "YNYY": {"YNYY": 50, "NNYY": 12, "YNNY": 10, "YNYN": 8, FAIL: 20},
}


def build_runs():
    remaining = {src: dict(row) for src, row in COUNTS.items()}
    for src, row in remaining.items():
        assert sum(row.values()) == 100, (src, sum(row.values()))

    def pending(src):
        return sum(remaining[src].values())

    runs = []
    order = list(COUNTS)
    while any(pending(src) for src in order):
        start = next(src for src in order if pending(src))
        trail = [start]
        cur = start
        terminal = "end"
        while True:
            row = remaining[cur]
            live = [(tgt, k) for tgt, k in row.items() if k > 0]
            if not live:
                break
            # most frequent first; prefer situations over failures, then lexicographic
            tgt = min(live, key=lambda e: (-e[1], e[0] == FAIL, e[0]))[0]
            row[tgt] -= 1
            if tgt == FAIL:
                terminal = FAIL
                break
            trail.append(tgt)
            cur = tgt
        runs.append((trail, terminal))
    return runs


def render(runs):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run_id", "step", "code", "event"])
    width = len(str(len(runs)))
    for i, (trail, terminal) in enumerate(runs, start=1):
        run_id = f"r{i:0{width}d}"
        for step, code in enumerate(trail):
            event = terminal if step == len(trail) - 1 else ""
            writer.writerow([run_id, step, code, event])
    return buf.getvalue()


def verify(text):
    """Recount the generated log and compare against the target table."""
    recount = {src: {} for src in COUNTS}
    reader = csv.reader(io.StringIO(text))
    next(reader)
    prev = {}
    for run_id, _, code, event in reader:
        if run_id in prev:
            row = recount[prev[run_id]]
            row[code] = row.get(code, 0) + 1
        if event.startswith("fail:"):
            row = recount[code]
            row[event] = row.get(event, 0) + 1
            prev.pop(run_id, None)
        elif event == "end":
            prev.pop(run_id, None)
        else:
            prev[run_id] = code
    assert recount == COUNTS, "recount does not reproduce the target table"


def main():
    runs = build_runs()
    text = render(runs)
    verify(text)
    out = Path(__file__).resolve().parent.parent / "src" / "sitgrid" / "demo" / "warehouse.csv"
    out.write_text(text, encoding="utf-8")
    n_lines = text.count("\n") - 1
    print(f"wrote {out} ({len(runs)} runs, {n_lines} observations)")


if __name__ == "__main__":
    main()
