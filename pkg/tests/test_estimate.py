import io
import random

import numpy as np
import pytest

import sitgrid as sg
from sitgrid.errors import EstimationError, GridError

AXES_1 = [{"name": "x", "values": ["a", "b", "c", "d"]}]


def vlog_from(text: str, axes=AXES_1) -> sg.ValidatedLog:
    space = sg.build_space(axes)
    return sg.validate_log(sg.parse_log(io.StringIO(text)), space)


def test_count_consecutive_pairs():
    vlog = vlog_from("run_id,step,code,event\nr1,0,a,\nr1,1,a,\nr1,2,b,end\n")
    counts = sg.count_transitions(vlog)
    assert counts.counts["a"] == {"a": 1, "b": 1}
    assert counts.counts["b"] == {}
    assert counts.totals == {"a": 2, "b": 0}


def test_count_single_step_violation():
    vlog = vlog_from("run_id,step,code,event\nr1,0,a,fail:collision_static\n")
    counts = sg.count_transitions(vlog)
    assert counts.counts == {"a": {"fail:collision_static": 1}}


def test_count_rows_in_enumeration_order():
    vlog = vlog_from(
        "run_id,step,code,event\n"
        "r1,0,c,\nr1,1,a,\nr1,2,c,end\n"
        "r2,0,b,\nr2,1,b,end\n"
    )
    assert list(sg.count_transitions(vlog).counts) == ["a", "b", "c"]


def test_mle_frequency_ratios():
    counts = sg.TransitionCounts(counts={"a": {"a": 17, "b": 1, "fail:x": 2}, "b": {"b": 1}})
    grid = sg.estimate_mle(counts)
    assert grid.rows["a"] == {"a": 0.85, "b": 0.05, "fail:x": 0.10}
    assert grid.meta.method == "mle"
    assert grid.meta.sample_sizes == {"a": 20, "b": 1}


def test_mle_degenerate_single_count():
    counts = sg.TransitionCounts(counts={"a": {"a": 1}})
    assert sg.estimate_mle(counts).rows == {"a": {"a": 1.0}}


def test_mle_demo_matches_published_first_row(demo_grid):
    row = demo_grid.rows["NNNN"]
    assert row["NNNN"] == pytest.approx(0.85, abs=1e-12)
    assert row["NNNY"] == pytest.approx(0.05, abs=1e-12)
    assert row["YNNN"] == pytest.approx(0.06, abs=1e-12)
    assert row["NNYN"] == pytest.approx(0.03, abs=1e-12)
    assert row["fail:collision"] == pytest.approx(0.01, abs=1e-12)


def test_mle_rejects_dead_end_situation():
    # 'b' only ever appears as the final step of a normally terminated run
    vlog = vlog_from("run_id,step,code,event\nr1,0,a,\nr1,1,b,end\n")
    counts = sg.count_transitions(vlog)
    with pytest.raises(EstimationError, match="dead-end.*b.*Bayesian"):
        sg.estimate_mle(counts)


def test_mle_entries_are_exact_count_ratios():
    rng = random.Random(7)
    for _ in range(20):
        row = {f"fail:k{i}": rng.randint(1, 50) for i in range(rng.randint(1, 5))}
        row["a"] = rng.randint(1, 50)
        counts = sg.TransitionCounts(counts={"a": row})
        grid = sg.estimate_mle(counts)
        total = sum(row.values())
        for key, k in row.items():
            assert abs(grid.rows["a"][key] - k / total) < 1e-12


def test_bayes_posterior_mean():
    counts = sg.TransitionCounts(counts={"a": {"a": 17, "b": 1, "fail:x": 2}, "b": {"b": 1}})
    support = {"a": ["a", "b", "fail:x"], "b": ["b"]}
    grid = sg.estimate_bayes(counts, alpha=1.0, support=support)
    assert grid.rows["a"]["a"] == pytest.approx(18 / 23)
    assert grid.rows["a"]["b"] == pytest.approx(2 / 23)
    assert grid.rows["a"]["fail:x"] == pytest.approx(3 / 23)
    assert grid.meta.method == "dirichlet"
    assert grid.meta.alpha == 1.0


def test_bayes_prior_only_row_is_uniform():
    counts = sg.TransitionCounts(counts={})
    grid = sg.estimate_bayes(counts, alpha=1.0, support={"a": ["a", "b", "c", "fail:x"],
                                                         "b": ["a"], "c": ["a"]})
    assert all(p == pytest.approx(0.25) for p in grid.rows["a"].values())


def test_bayes_small_alpha_approaches_mle():
    rng = random.Random(99)
    for _ in range(20):
        keys = [f"k{i}" for i in range(rng.randint(1, 4))] + ["fail:x"]
        row = {k: rng.randint(1, 40) for k in keys}
        counts = sg.TransitionCounts(counts={k: {k: 1} for k in keys if not k.startswith("fail:")})
        counts.counts[keys[0]] = row
        mle = sg.estimate_mle(counts)
        bayes = sg.estimate_bayes(counts, alpha=1e-9,
                                  support={c: list(r) for c, r in counts.counts.items()})
        for code in mle.covered:
            for key, p in mle.rows[code].items():
                assert abs(bayes.rows[code][key] - p) < 1e-6


def test_bayes_rejects_support_missing_counted_key():
    counts = sg.TransitionCounts(counts={"a": {"a": 1, "b": 1}, "b": {"b": 1}})
    with pytest.raises(EstimationError, match="missing counted key"):
        sg.estimate_bayes(counts, alpha=1.0, support={"a": ["a"], "b": ["b"]})


def test_bayes_rejects_nonpositive_alpha():
    counts = sg.TransitionCounts(counts={"a": {"a": 1}})
    with pytest.raises(EstimationError, match="alpha"):
        sg.estimate_bayes(counts, alpha=0.0, support={"a": ["a"]})


def test_bayes_shrinkage_all_supported_entries_positive():
    counts = sg.TransitionCounts(counts={"a": {"a": 5}, "b": {"a": 1, "b": 1}})
    grid = sg.estimate_bayes(counts, alpha=0.5,
                             support={"a": ["a", "b", "fail:x"], "b": ["a", "b"]})
    for row in grid.rows.values():
        assert all(p > 0.0 for p in row.values())


def test_estimator_outputs_are_stochastic():
    rng = random.Random(21)
    for _ in range(30):
        codes = [f"c{i}" for i in range(rng.randint(1, 5))]
        counts = sg.TransitionCounts(counts={
            c: {t: rng.randint(0, 20) for t in codes + ["fail:z"]} for c in codes
        })
        for c in codes:  # ensure positive totals
            counts.counts[c][c] = counts.counts[c].get(c, 0) + 1
        for grid in (
            sg.estimate_mle(counts),
            sg.estimate_bayes(counts, 0.7, {c: codes + ["fail:z"] for c in codes}),
        ):
            for row in grid.rows.values():
                assert abs(sum(row.values()) - 1.0) <= 1e-9
                assert all(0.0 <= p <= 1.0 for p in row.values())


def test_replay_sampling_converges_to_known_grid():
    target = sg.AugmentedGrid(
        covered=("a", "b", "c"),
        rows={
            "a": {"a": 0.6, "b": 0.25, "c": 0.05, "fail:z": 0.1},
            "b": {"a": 0.3, "b": 0.5, "fail:z": 0.2},
            "c": {"c": 0.9, "a": 0.02, "fail:z": 0.08},
        },
        meta=sg.EstimatorMeta(method="file"),
    )
    n = 100_000
    rng = np.random.default_rng(20250810)
    counts: dict[str, dict[str, int]] = {}
    for code in target.covered:
        keys = list(target.rows[code])
        probs = [target.rows[code][k] for k in keys]
        draws = rng.multinomial(n, probs)
        counts[code] = {k: int(d) for k, d in zip(keys, draws)}
    grid = sg.estimate_mle(sg.TransitionCounts(counts=counts))
    worst = max(
        abs(grid.rows[c].get(k, 0.0) - p)
        for c in target.covered
        for k, p in target.rows[c].items()
    )
    assert worst < 0.02


def test_sample_log_is_deterministic_and_estimable():
    grid = sg.AugmentedGrid(
        covered=("a", "b"),
        rows={"a": {"a": 0.5, "b": 0.4, "fail:z": 0.1}, "b": {"a": 0.7, "b": 0.3}},
        meta=sg.EstimatorMeta(method="file"),
    )
    log1 = sg.sample_log(grid, "a", runs=200, max_steps=40, seed=13)
    log2 = sg.sample_log(grid, "a", runs=200, max_steps=40, seed=13)
    assert sg.format_log(log1) == sg.format_log(log2)
    space = sg.build_space([{"name": "x", "values": ["a", "b"]}])
    vlog = sg.validate_log(log1, space)
    est = sg.estimate_mle(sg.count_transitions(vlog))
    assert abs(est.rows["a"]["a"] - 0.5) < 0.1


def test_failure_probability_demo(demo_grid):
    assert sg.failure_probability(demo_grid, "NNNN") == pytest.approx(0.01, abs=1e-12)


def test_failure_probability_edge_cases():
    grid = sg.AugmentedGrid(
        covered=("a", "b"),
        rows={"a": {"fail:x": 1.0}, "b": {"b": 1.0}},
        meta=sg.EstimatorMeta(method="file"),
    )
    assert sg.failure_probability(grid, "a") == 1.0
    assert sg.failure_probability(grid, "b") == 0.0
    with pytest.raises(EstimationError, match="not covered"):
        sg.failure_probability(grid, "zz")


def test_grid_rejects_uncovered_successor():
    with pytest.raises(GridError, match="not a covered situation"):
        sg.AugmentedGrid(
            covered=("a",),
            rows={"a": {"a": 0.5, "ghost": 0.5}},
            meta=sg.EstimatorMeta(method="file"),
        )


def test_grid_rejects_bad_row_sum():
    with pytest.raises(GridError, match="sums to"):
        sg.AugmentedGrid(
            covered=("a",),
            rows={"a": {"a": 0.9}},
            meta=sg.EstimatorMeta(method="file"),
        )


def test_read_grid_csv_renormalizes_small_deviation():
    text = "from,to,prob\na,a,0.3333333\na,b,0.3333333\na,c,0.3333333\nb,b,1.0\nc,c,1.0\n"
    grid = sg.read_grid_csv(io.StringIO(text))
    assert sum(grid.rows["a"].values()) == pytest.approx(1.0, abs=1e-15)


def test_read_grid_csv_rejects_large_deviation():
    with pytest.raises(GridError, match="deviation exceeds"):
        sg.read_grid_csv(io.StringIO("from,to,prob\na,a,0.9\n"))


@pytest.mark.parametrize(
    "text, message",
    [
        ("from,to,prob\na,fail,1.0\n", "bare 'fail'"),
        ("from,to,prob\na,fail:,1.0\n", "empty label"),
        ("from,to,prob\na,a,0.5\na,a,0.5\n", "duplicate entry"),
        ("from,to,prob\na,a,maybe\n", "not a number"),
        ("from,to\n", "expected header"),
        ("", "empty grid file"),
    ],
)
def test_read_grid_csv_diagnostics(text, message):
    with pytest.raises(GridError, match=message):
        sg.read_grid_csv(io.StringIO(text))
