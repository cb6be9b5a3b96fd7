import random

import pytest

import sitgrid as sg
from sitgrid.errors import PctlError, PctlSyntaxError
from sitgrid.pctl import (
    TRUE,
    And,
    Atom,
    Bound,
    BoundedUntil,
    Next,
    Not,
    ProbQuery,
    Query,
    Until,
)


def test_parse_eventually_collision_static():
    q = sg.parse('P=?[F "collision_static"]')
    assert q == Query(
        formula=ProbQuery(bound=Bound("=?"), path=Until(TRUE, Atom("collision_static"))),
        filter_state=None,
    )


def test_parse_filter_query():
    q = sg.parse('filter(state, P=?[F "fail"], "s3")')
    assert q.filter_state == "s3"
    assert q.formula == ProbQuery(bound=Bound("=?"), path=Until(TRUE, Atom("fail")))


def test_parse_threshold_out_of_range():
    with pytest.raises(PctlSyntaxError, match=r"1\.5"):
        sg.parse('P<=1.5[X "a"]')


def test_parse_reports_offset_and_expected():
    with pytest.raises(PctlSyntaxError) as err:
        sg.parse('P=?[X ]')
    assert err.value.offset == 6
    assert "(" in err.value.expected and "true" in err.value.expected


def test_parse_rejects_unknown_word():
    with pytest.raises(PctlSyntaxError, match="quotes"):
        sg.parse("P=?[F fail]")


def test_parse_rejects_negative_step_bound():
    with pytest.raises(PctlSyntaxError):
        sg.parse('P<=0.5[F<=-1 "a"]')


def test_parse_rejects_non_probquery_root():
    with pytest.raises(PctlError, match="top-level"):
        sg.parse("true")


def test_eventually_desugars_to_until():
    assert sg.parse('P=?[F "g"]').formula.path == Until(TRUE, Atom("g"))
    assert sg.parse('P=?[F<=7 "g"]').formula.path == BoundedUntil(TRUE, Atom("g"), 7)
    assert sg.parse('P=?[true U "g"]') == sg.parse('P=?[F "g"]')


def test_disjunction_desugars():
    q = sg.parse('P>=0.1[X "a" | "b"]')
    assert q.formula.path.operand == Not(And(Not(Atom("a")), Not(Atom("b"))))


def test_precedence_not_over_and_over_or():
    q = sg.parse('P>=0[X !"a" & "b" | "c"]')
    inner = q.formula.path.operand
    # parsed as (!a & b) | c
    assert inner == sg.disjunction(And(Not(Atom("a")), Atom("b")), Atom("c"))


def test_until_binds_full_formulas():
    q = sg.parse('P>=0.5["a" & "b" U "c"]')
    assert q.formula.path == Until(And(Atom("a"), Atom("b")), Atom("c"))


def test_format_examples():
    assert sg.format_query(Query(ProbQuery(Bound("=?"), Next(Atom("a"))))) == 'P=?[X "a"]'
    assert sg.format_query(Query(ProbQuery(Bound("=?"), Until(TRUE, Atom("g"))))) == 'P=?[F "g"]'
    assert (
        sg.format_query(Query(ProbQuery(Bound("<=", 0.5), BoundedUntil(TRUE, Atom("g"), 3))))
        == 'P<=0.5[F<=3 "g"]'
    )


def test_format_parenthesizes_right_nested_and():
    q = Query(ProbQuery(Bound("=?"), Next(And(Atom("a"), And(Atom("b"), Atom("c"))))))
    text = sg.format_query(q)
    assert text == 'P=?[X "a" & ("b" & "c")]'
    assert sg.parse(text) == q


def _random_formula(rng, depth):
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        return rng.choice([TRUE, sg.pctl.FALSE, Atom(rng.choice(["a", "fail", "NNNN", "x1"]))])
    if roll < 0.55:
        return Not(_random_formula(rng, depth - 1))
    if roll < 0.75:
        return And(_random_formula(rng, depth - 1), _random_formula(rng, depth - 1))
    if roll < 0.85:
        return sg.disjunction(_random_formula(rng, depth - 1), _random_formula(rng, depth - 1))
    return ProbQuery(Bound(rng.choice(["<", "<=", ">", ">="]), round(rng.random(), 3)),
                     _random_path(rng, depth - 1))


def _random_path(rng, depth):
    roll = rng.random()
    if roll < 0.25:
        return Next(_random_formula(rng, depth))
    if roll < 0.5:
        return Until(_random_formula(rng, depth), _random_formula(rng, depth))
    if roll < 0.75:
        return BoundedUntil(_random_formula(rng, depth), _random_formula(rng, depth), rng.randint(0, 99))
    if roll < 0.9:
        return sg.eventually(_random_formula(rng, depth))
    return sg.bounded_eventually(_random_formula(rng, depth), rng.randint(0, 99))


def random_query(rng):
    root = ProbQuery(
        Bound("=?") if rng.random() < 0.5 else Bound(rng.choice(["<", "<=", ">", ">="]), rng.random()),
        _random_path(rng, rng.randint(0, 3)),
    )
    state = rng.choice([None, "NNNN", "s3", "fail:collision"])
    return Query(formula=root, filter_state=state)


def test_parse_format_identity_on_random_asts():
    rng = random.Random(424242)
    for _ in range(1000):
        q = random_query(rng)
        assert sg.parse(sg.format_query(q)) == q


def test_format_parse_idempotent_on_canonical_text():
    rng = random.Random(777)
    for _ in range(200):
        text = sg.format_query(random_query(rng))
        assert sg.format_query(sg.parse(text)) == text


def test_validate_formula_against_demo_model(demo_dtmc):
    ok = sg.parse('P=?[F "NNNN"]')
    assert sg.validate_formula(ok, demo_dtmc) == []

    unknown = sg.parse('P=?[F "s99"]')
    assert any("s99" in d for d in sg.validate_formula(unknown, demo_dtmc))

    pruned = sg.parse('filter(state, P=?[F "fail"], "YYNN")')
    assert any("YYNN" in d for d in sg.validate_formula(pruned, demo_dtmc))


def test_load_requirements_demo_file():
    from sitgrid import demo

    with open(demo.requirements_path(), encoding="utf-8") as fh:
        reqs = sg.load_requirements(fh)
    assert [r.id for r in reqs] == ["N-SR1", "N-SR2", "N-SR3"]
    assert all(r.query.filter_state for r in reqs)


def test_load_requirements_rejects_duplicates_and_bad_queries():
    import io

    with pytest.raises(PctlError, match="duplicate id"):
        sg.load_requirements(io.StringIO(
            '[{"id":"R","query":"P=?[F \\"a\\"]"},{"id":"R","query":"P=?[F \\"a\\"]"}]'
        ))
    with pytest.raises(PctlError, match="'R1'"):
        sg.load_requirements(io.StringIO('[{"id":"R1","query":"nope"}]'))


def test_atom_label_must_be_nonempty():
    with pytest.raises(PctlError):
        Atom("")
