import random
import time
from pathlib import Path

import pytest

from ppa.checks import unordered_case, unordered_sweep
from ppa.errors import UsageError
from ppa.formula import Bot, Top, substitute_params
from ppa.parser import parse, render_node
from ppa.randgen import random_formula
from ppa.unordered import (
    count_unordered, decide_finite, decide_nonempty, eliminate_exists_unordered, qe_unordered,
)

DATA = Path(__file__).resolve().parent.parent / "data"
GCD = parse((DATA / "gcd_unordered.ppa").read_text(), unordered=True)


def test_elimination_examples():
    assert isinstance(qe_unordered(parse("exists x2 x3 . 3*x2 + 5*x3 = 1")), Top)
    assert isinstance(qe_unordered(parse("exists x2 x3 . 4*x2 + 6*x3 = 1")), Bot)
    out = eliminate_exists_unordered(parse("vars x y\nformula: x = 3*y").body, "y")
    assert render_node(out) == "3 | x"


def test_gcd_example():
    assert decide_nonempty(GCD, (3, 5)) and not decide_nonempty(GCD, (4, 6))
    res = count_unordered(GCD, (3, 5))
    assert res.count == 1 and res.points == ((0,),)
    assert count_unordered(GCD, (4, 6)).count == 0
    assert decide_finite(GCD, (3, 5)) == "finite"


def test_gcd_example_at_256_bits():
    p = 2**255 + 95
    q = p + 2  # consecutive odd numbers are coprime
    t0 = time.perf_counter()
    assert decide_nonempty(GCD, (p, q))
    assert not decide_nonempty(GCD, (3 * p, 3 * q))
    assert time.perf_counter() - t0 < 1.0


def test_finiteness_and_counts():
    assert decide_finite(parse("vars x\nformula: 0 = 0"), ()) == "infinite"
    assert decide_finite(parse("vars x\nformula: x = 1 and x = 2"), ()) == "finite"
    line = parse("vars x1 x2\nformula: 4*x1 + 6*x2 = 24")
    assert count_unordered(line).infinite
    pts = parse("vars x\nformula: 2*x = 6 or x = -1")
    assert count_unordered(pts).points == ((-1,), (3,))


def test_negated_congruences_cover_exactly():
    f = parse("vars x\nformula: exists y . not 2 | y + x and not 2 | y + x + 1")
    assert isinstance(qe_unordered(f), Bot)
    g = parse("vars x\nformula: exists y . x = 4*y and not 3 | y")
    assert count_unordered(g).infinite


def test_order_atoms_rejected():
    with pytest.raises(UsageError):
        count_unordered(parse("vars x\nformula: x <= 1"))


@pytest.mark.parametrize("seed", range(3))
def test_random_formulas_agree_with_oracle(seed):
    rng = random.Random(100 + seed)
    for _ in range(15):
        f = random_formula(rng, n_params=2, n_free=rng.randint(1, 2), n_bound=2, ordered=False, max_atoms=3)
        rep = unordered_case(substitute_params(f, (rng.randint(1, 4), rng.randint(1, 4))))
        assert rep["ok"], rep


def test_seeded_sweep_smoke():
    assert unordered_sweep(10, seed=5)["failures"] == []
