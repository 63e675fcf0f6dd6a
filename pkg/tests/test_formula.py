import random
from pathlib import Path

import pytest

from ppa.errors import ParseError, SortError, UsageError
from ppa.formula import (
    Eq, LinTerm, classify_alternation, dnf_clauses, substitute_params, to_dnf,
    to_prenex_nnf,
)
from ppa.gadgets import PqmInstance, build_phi_prime, build_psi
from ppa.parser import parse, render, render_file
from ppa.randgen import random_formula

DATA = Path(__file__).resolve().parent.parent / "data"


def test_parse_and_render_example():
    f = parse("x >= 0 and t1*x <= t2")
    assert f.params == ("t1", "t2") and f.free == ("x",)
    assert render(f) == "x >= 0 and t1*x <= t2"


def test_product_of_variables_is_a_sort_error():
    with pytest.raises(SortError):
        parse("exists y . x*y = 1")


def test_quantifying_a_parameter_is_rejected():
    with pytest.raises(SortError):
        parse("params t\nvars x\nformula: exists t . x = t")


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse("params t\nvars x\nformula: x >= ")
    assert e.value.line is not None


def test_unordered_mode_rejects_order():
    with pytest.raises(ParseError, match="unordered"):
        parse("vars x\nformula: x <= 3", unordered=True)
    assert parse("vars x\nformula: 3 | x and x != 1", unordered=True).free == ("x",)


def test_substitution_examples():
    f = parse("x >= 0 and t1*x <= t2")
    assert render(substitute_params(f, (3, 7))) == "x >= 0 and 3*x <= 7"
    g = parse(open(DATA / "ex_b.ppa").read())
    assert render(substitute_params(g, (4, 6))) == "x1 >= 0 and x2 >= 0 and 4*x1 + 6*x2 = 24"
    z = parse("params t1\nvars x\nformula: t1 - t1 | x")
    assert isinstance(substitute_params(z, (5,)).body, Eq)
    with pytest.raises(UsageError):
        substitute_params(f, (1,))


def test_prenex_renames_clashing_bound_variables():
    f = parse("vars x\nformula: (exists y1 . x - y1 = 0) and (exists y1 . x + y1 = 2)")
    assert render(to_prenex_nnf(f)) == "exists y1 . exists y2 . x - y1 = 0 and x + y2 = 2"
    qf = parse("vars x\nformula: x >= 1 or 2 | x")
    assert to_prenex_nnf(qf) == qf


def test_dnf_distributes():
    f = parse("vars a b c\nformula: (a = 0 or b = 0) and c = 0")
    clauses = dnf_clauses(f.body)
    assert [[lit.term.coeffs[0][0] for lit in c] for c in clauses] == [["a", "c"], ["b", "c"]]
    lit = parse("vars a\nformula: a = 0")
    assert to_dnf(lit) == lit


def test_alternation_classes():
    inst = PqmInstance(7, 3, 5)
    assert str(classify_alternation(build_psi(inst)[2])) == "Σ2"
    assert str(classify_alternation(build_phi_prime(inst))) == "Σ2"
    assert str(classify_alternation(parse(open(DATA / "ex_d.ppa").read()))) == "Σ1"
    assert str(classify_alternation(parse("x = 1"))) == "quantifier-free"
    assert str(classify_alternation(parse("vars x\nformula: forall y . exists z . x + y - z = 0"))) == "Π2"


def test_linterm_arithmetic():
    t = LinTerm.make([("x", 2), ("y", -1)], 3)
    assert (t - t).coeffs == () and (t - t).const == 0
    assert t.scale(2).coeff("x") == 4
    assert t.drop("x").coeffs == (("y", -1),)


@pytest.mark.parametrize("seed", range(5))
def test_render_is_a_fixpoint(seed):
    rng = random.Random(seed)
    for _ in range(40):
        f = random_formula(rng)
        g = parse(render_file(f))
        assert render(g) == render(f)
        assert parse(render_file(g)) == g
