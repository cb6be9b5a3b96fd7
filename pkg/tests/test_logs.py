import io

import pytest

import sitgrid as sg
from sitgrid.errors import LogError

AXES_2 = [{"name": "a", "values": ["N", "Y"]}, {"name": "b", "values": ["N", "Y"]}]


def parse(text: str) -> sg.ObservationLog:
    return sg.parse_log(io.StringIO(text))


def test_three_step_run_ending_in_violation():
    log = parse(
        "run_id,step,code,event\n"
        "r1,0,NN,\n"
        "r1,1,NY,\n"
        "r1,2,NY,fail:collision_static\n"
    )
    assert len(log.runs) == 1
    run = log.runs[0]
    assert run.steps == [(0, "NN"), (1, "NY"), (2, "NY")]
    assert run.is_violation
    assert run.violation_label == "collision_static"


def test_empty_file_gives_empty_log():
    log = parse("")
    assert log.runs == []
    assert parse("run_id,step,code,event\n").runs == []


def test_runs_may_interleave():
    log = parse(
        "run_id,step,code,event\n"
        "r1,0,NN,\n"
        "r2,0,NY,\n"
        "r1,1,NN,end\n"
        "r2,1,NN,end\n"
    )
    assert [r.run_id for r in log.runs] == ["r1", "r2"]
    assert log.runs[0].steps == [(0, "NN"), (1, "NN")]


@pytest.mark.parametrize(
    "body, message",
    [
        ("r1,0,NN\n", "expected 4 fields"),
        ("r1,x,NN,end\n", "not an integer"),
        ("r1,-1,NN,end\n", "negative"),
        ("r1,1,NN,\nr1,0,NN,end\n", "not above previous"),
        ("r1,0,NN,\nr1,0,NN,end\n", "duplicate step"),
        ("r1,0,NN,boom\n", "unknown event"),
        ("r1,0,NN,end\nr1,1,NN,end\n", "already terminated"),
        ("r1,0,NN,fail:\n", "empty label"),
        ("r1,0,,end\n", "empty situation code"),
        ("r1,0,NN,\n", "never terminated"),
    ],
)
def test_parse_diagnostics(body, message):
    with pytest.raises(LogError, match=message):
        parse("run_id,step,code,event\n" + body)


def test_header_mismatch_reported_on_line_1():
    with pytest.raises(LogError, match="line 1"):
        parse("run,step,code,event\nr1,0,NN,end\n")


def test_round_trip_parse_format_parse():
    text = (
        "run_id,step,code,event\n"
        "r1,0,NN,\n"
        "r1,2,NY,\n"
        "r1,5,NY,fail:collision\n"
        "r2,0,YY,end\n"
    )
    log = parse(text)
    assert sg.format_log(log) == text
    assert parse(sg.format_log(log)) == log


def test_validate_log_accepts_known_codes():
    space = sg.build_space(AXES_2)
    log = parse("run_id,step,code,event\nr1,0,YY,end\n")
    vlog = sg.validate_log(log, space)
    assert vlog.ids["r1"] == (4,)
    assert vlog.log.space_hash == space.digest()


def test_validate_log_rejects_unknown_code_with_position():
    space = sg.build_space(AXES_2)
    log = parse("run_id,step,code,event\nr1,0,NN,\nr1,1,ZZ,end\n")
    with pytest.raises(LogError, match=r"run 'r1' step 1"):
        sg.validate_log(log, space)


def test_validate_log_rejects_wrong_code_length():
    space_4 = sg.build_space(AXES_2 + [{"name": "c", "values": ["N", "Y"]},
                                       {"name": "d", "values": ["N", "Y"]}])
    log = parse("run_id,step,code,event\nr1,0,NN,end\n")  # written for a 2-axis space
    with pytest.raises(LogError, match="length"):
        sg.validate_log(log, space_4)


def test_coverage_demo_partition(demo_coverage):
    assert len(demo_coverage.observed) == 12
    assert demo_coverage.unobserved == ("YYNN", "YYNY", "YYYN", "YYYY")
    assert demo_coverage.ratio == 12 / 16


def test_coverage_partitions_enumeration_exactly(demo_coverage, demo_space):
    all_codes = {s.code for s in sg.enumerate_situations(demo_space)}
    observed = set(demo_coverage.observed)
    unobserved = set(demo_coverage.unobserved)
    assert observed | unobserved == all_codes
    assert not observed & unobserved


def test_coverage_full():
    space = sg.build_space(AXES_2)
    rows = ["run_id,step,code,event"]
    for i, code in enumerate(["NN", "NY", "YN", "YY"]):
        rows.append(f"r{i},0,{code},end")
    report = sg.coverage_summary(parse("\n".join(rows) + "\n"), space)
    assert report.ratio == 1.0
    assert report.unobserved == ()


def test_coverage_single_step_run(demo_space):
    report = sg.coverage_summary(parse("run_id,step,code,event\nr1,0,NNNN,end\n"), demo_space)
    assert report.observed == ("NNNN",)
    assert report.ratio == 1 / 16
