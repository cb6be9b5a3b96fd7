import pytest

import sitgrid as sg
from sitgrid import demo


@pytest.fixture(scope="session")
def demo_space():
    with open(demo.axes_path(), encoding="utf-8") as fh:
        return sg.load_axes(fh)


@pytest.fixture(scope="session")
def demo_vlog(demo_space):
    with open(demo.log_path(), encoding="utf-8", newline="") as fh:
        log = sg.parse_log(fh)
    return sg.validate_log(log, demo_space)


@pytest.fixture(scope="session")
def demo_coverage(demo_vlog, demo_space):
    return sg.coverage_summary(demo_vlog, demo_space)


@pytest.fixture(scope="session")
def demo_grid(demo_vlog, demo_coverage):
    counts = sg.count_transitions(demo_vlog)
    return sg.estimate_mle(counts, unobserved=demo_coverage.unobserved)


@pytest.fixture(scope="session")
def demo_dtmc(demo_grid):
    return sg.synthesize(demo_grid, "NNNN")


@pytest.fixture()
def t1():
    """Toy chain: a -> a 0.5 / b 0.3 / fail 0.2; b and fail absorbing."""
    grid = sg.AugmentedGrid(
        covered=("a", "b"),
        rows={"a": {"a": 0.5, "b": 0.3, "fail:crash": 0.2}, "b": {"b": 1.0}},
        meta=sg.EstimatorMeta(method="file"),
    )
    return sg.synthesize(grid, "a")
