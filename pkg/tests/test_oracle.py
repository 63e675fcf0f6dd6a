from math import gcd
from pathlib import Path

import pytest

from ppa.errors import ResourceLimit, UsageError
from ppa.formula import Formula, TRUE, substitute_params
from ppa.oracle import Box, count_bounded, decide_bounded, enumerate_solutions, eval_qf, parse_box
from ppa.parser import parse

DATA = Path(__file__).resolve().parent.parent / "data"


def load(name):
    return parse(open(DATA / name).read())


def ground(name, *u):
    return substitute_params(load(name), u)


def test_eval_qf():
    assert eval_qf(ground("ex_b.ppa", 4, 6), (3, 2))
    assert not eval_qf(parse("vars x\nformula: 2 | x"), (3,))
    assert eval_qf(Formula((), (), TRUE), ())


def test_decide_bounded():
    f = parse("exists x . 2 | x and 3 | x and 5 <= x and x <= 7")
    assert decide_bounded(f, Box.uniform(0, 10))
    assert decide_bounded(parse("forall x . x <= 3"), Box.uniform(0, 3))
    assert not decide_bounded(parse("exists x . 2*x = 3"), Box.uniform(0, 10))


def test_counts_on_examples():
    assert count_bounded(ground("ex_b.ppa", 4, 6), Box.uniform(0, 10)) == 3
    assert count_bounded(ground("ex_c.ppa", 3, 7), Box.uniform(0, 10)) == 4
    assert count_bounded(ground("ex_d.ppa", 9), Box.uniform(0, 20), Box.uniform(0, 20)) == 0


def test_enumerate():
    assert enumerate_solutions(ground("ex_b.ppa", 4, 6), Box.uniform(0, 10)) == [(0, 4), (3, 2), (6, 0)]
    assert enumerate_solutions(parse("vars x\nformula: x = 1 and x = 2"), Box.uniform(0, 5)) == []
    assert enumerate_solutions(ground("ex_d.ppa", 4), Box.uniform(0, 10), Box.uniform(0, 10)) == [(0,), (1,)]


def test_brute_force_agreement_on_gcd_example():
    for t1 in range(1, 7):
        for t2 in range(1, 9):
            n = count_bounded(ground("ex_b.ppa", t1, t2), Box.uniform(-1, 10))
            brute = sum(1 for a in range(0, 11) for b in range(0, 11) if t1 * a + t2 * b == t1 * t2)
            assert n == brute == gcd(t1, t2) + 1


def test_box_errors_and_budget():
    with pytest.raises(UsageError):
        count_bounded(ground("ex_b.ppa", 4, 6), Box({"x1": (0, 3)}))
    with pytest.raises(UsageError):
        Box({"x": (3, 1)})
    with pytest.raises(ResourceLimit):
        count_bounded(parse("vars x y\nformula: x + y >= 0 or x != y"), Box.uniform(0, 200), budget=100)


def test_parse_box():
    assert parse_box("0..30").interval("anything") == (0, 30)
    b = parse_box("x=0..5,y=-2..2")
    assert b.interval("y") == (-2, 2)
    with pytest.raises(UsageError):
        parse_box("x=0-5")


def test_jobs_do_not_change_results():
    g = ground("ex_b.ppa", 6, 9)
    box = Box.uniform(0, 30)
    assert enumerate_solutions(g, box, jobs=1) == enumerate_solutions(g, box, jobs=3)
