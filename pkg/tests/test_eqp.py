from fractions import Fraction
from pathlib import Path

import pytest

from ppa.eqp import (
    InsufficientSamples, QuasiPolynomial, fit_eqp, fit_formula, oracle_counter, qp_eval, verify_fit,
)
from ppa.errors import UsageError
from ppa.parser import parse

DATA = Path(__file__).resolve().parent.parent / "data"
EX_D = parse((DATA / "ex_d.ppa").read_text())
HALF = QuasiPolynomial(2, 2, ((Fraction(0), Fraction(1, 2)), (Fraction(0),)))


def radius(t):
    return 2 * abs(t) + 2


def test_qp_eval():
    assert qp_eval(HALF, 10) == 5 and qp_eval(HALF, 7) == 0
    const = QuasiPolynomial(1, 0, ((Fraction(3),),))
    assert qp_eval(const, -17) == 3


def test_fit_sigma1_example():
    q, _ = fit_formula(EX_D, range(0, 41), radius)
    assert q == HALF
    assert verify_fit(q, oracle_counter(EX_D, radius), range(41, 81))


def test_fit_floor_example_with_frozen_t1():
    counts = [(t2, t2 // 3 + 1) for t2 in range(0, 61)]
    q = fit_eqp(counts)
    assert q.period == 3 and q.degree() == 1
    assert all(qp_eval(q, t) == t // 3 + 1 for t in range(q.threshold, 200))
    # the same counts from the oracle with t1 frozen at 3
    g = parse("params t2\nvars x\nformula: x >= 0 and 3*x <= t2")
    oracle = oracle_counter(g, lambda t: t + 1)
    assert [oracle(t) for t in range(0, 61)] == [c for _, c in counts]


def test_fit_polynomial_samples():
    q = fit_eqp([(t, t * t) for t in range(1, 30)])
    assert (q.period, q.threshold) == (1, 1)
    assert q.constituents == ((Fraction(0), Fraction(0), Fraction(1)),)


def test_verify_detects_corruption_and_empty_range():
    counter = oracle_counter(EX_D, radius)
    bad = QuasiPolynomial(2, 2, ((Fraction(1), Fraction(1, 2)), (Fraction(0),)))
    assert not verify_fit(bad, counter, range(41, 60))
    assert verify_fit(bad, counter, range(0))


def test_infinite_classes():
    samples = [(t, None if t % 2 else t) for t in range(1, 40)]
    q = fit_eqp(samples, max_degree=1)
    assert q.constituents[1] is None and qp_eval(q, 11) is None
    assert QuasiPolynomial.from_json(q.to_json()) == q


def test_errors():
    with pytest.raises(InsufficientSamples):
        fit_eqp([(1, 1), (2, 2)])
    with pytest.raises(UsageError):
        QuasiPolynomial.from_json({"period": 2})
    with pytest.raises(UsageError):
        oracle_counter(parse((DATA / "ex_a.ppa").read_text()), radius)


def test_negative_side():
    q = fit_eqp([(t, -t) for t in range(-30, 0)], side="negative")
    assert q.side == "negative" and qp_eval(q, -50) == 50
