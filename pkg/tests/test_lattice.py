import random
from fractions import Fraction
from itertools import product
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from ppa import lattice
from ppa.lattice import (
    AffineLattice, classify_conjunct, hermite_basis, scalar_quad, snf, solve_system,
    uncovered_density,
)


def test_scalar_quad_examples():
    q = scalar_quad(12, 18)
    assert (q.g, q.gamma, q.gamma_swap, q.alpha, q.beta) == (6, 2, 3, -1, 1)
    q = scalar_quad(7, 7)
    assert (q.g, q.gamma, q.alpha, q.beta) == (7, 1, 0, 1)
    q = scalar_quad(0, 5)
    assert (q.g, q.gamma, q.gamma_swap, q.beta) == (5, 0, 1, 1)
    q = scalar_quad(0, 0)
    assert (q.g, q.gamma) == (0, 0)


ints = st.integers(-(2**512), 2**512) | st.integers(-50, 50)


@given(ints, ints)
def test_scalar_quad_axioms(r, s):
    q = scalar_quad(r, s)
    assert r == q.gamma * q.g
    if (r, s) != (0, 0):
        assert q.alpha * q.gamma + q.beta * q.gamma_swap == 1
        assert q.g == gcd(r, s)


def test_snf_examples():
    U, D, V = snf([[2, 4], [6, 8]])
    assert D == [[2, 0], [0, 4]]
    assert snf([[1, 0], [0, 1]])[1] == [[1, 0], [0, 1]]
    U, D, V = snf([[0, 0], [0, 0]])
    assert U == V == [[1, 0], [0, 1]] and D == [[0, 0], [0, 0]]


@settings(max_examples=60)
@given(st.lists(st.lists(st.integers(-30, 30), min_size=3, max_size=3), min_size=1, max_size=3))
def test_snf_postconditions_random(rows):
    before = lattice.SNF_CHECKS
    snf(rows)  # raises on any violated postcondition
    assert lattice.SNF_CHECKS == before + 1


def test_solve_system_examples():
    lat = solve_system(2, [([4, 6], -24)])
    assert lat.rank == 1 and lat.basis == ((3, -2),)
    for pt in [(6, 0), (3, 2), (0, 4)]:
        assert lat.contains(pt)
    assert solve_system(1, (), [(2, [1], 0), (3, [1], 0)]) == AffineLattice.make(1, [0], [[6]])
    assert solve_system(1, [([1], 0), ([1], -1)]).is_empty


def test_hermite_is_canonical():
    a = hermite_basis([[2, 4], [6, 8]], 2)
    b = hermite_basis([[8, 12], [2, 4], [4, 4]], 2)
    assert a == b == hermite_basis([[2, 0], [0, 4]], 2)


def test_trichotomy_examples():
    z1 = AffineLattice.make(1, [0], [[1]])
    assert classify_conjunct(z1, (), [(2, [1], 0), (2, [1], 1)]).kind == "empty"
    assert classify_conjunct(z1, (), [(2, [1], 0)]).kind == "infinite"
    single = AffineLattice.make(2, [0, 5], [])
    c = classify_conjunct(single, [([0, 1], 0)], ())
    assert c.kind == "singleton" and c.point == (0, 5)
    assert uncovered_density(1, [(2, [1], 0), (3, [1], 0)]) == Fraction(1, 3)


def _holds(x, eqs, congs, neqs, ncongs):
    dot = lambda a: sum(p * q for p, q in zip(a, x))
    return (all(dot(a) + c == 0 for a, c in eqs) and all((dot(a) + c) % m == 0 for m, a, c in congs)
            and all(dot(a) + c != 0 for a, c in neqs) and all((dot(a) + c) % m for m, a, c in ncongs))


def _lattice_points(lat, reach):
    if lat.is_empty:
        return []
    out = []
    for lam in product(range(-reach, reach + 1), repeat=lat.rank):
        out.append(tuple(v + sum(l * b[i] for l, b in zip(lam, lat.basis)) for i, v in enumerate(lat.base)))
    return out


@pytest.mark.parametrize("seed", range(3))
def test_trichotomy_against_census(seed):
    rng = random.Random(seed)
    vec = lambda d: [rng.randint(-3, 3) for _ in range(d)]
    for _ in range(60):
        d = rng.randint(1, 3)
        eqs = [(vec(d), rng.randint(-4, 4)) for _ in range(rng.randint(0, d))]
        congs = [(rng.randint(2, 4), vec(d), rng.randint(-3, 3)) for _ in range(rng.randint(0, 2))]
        neqs = [(vec(d), rng.randint(-3, 3)) for _ in range(rng.randint(0, 1))]
        ncongs = [(rng.randint(2, 4), vec(d), rng.randint(-3, 3)) for _ in range(rng.randint(0, 2))]
        lat = solve_system(d, eqs, congs)
        cl = classify_conjunct(lat, neqs, ncongs)
        box = [x for x in product(range(-5, 6), repeat=d) if _holds(x, eqs, congs, neqs, ncongs)]
        # points of the positive coset, enumerated through its basis
        sols = [x for x in _lattice_points(lat, 6 if d < 3 else 4) if _holds(x, eqs, congs, neqs, ncongs)]
        assert all(lat.contains(x) for x in box)
        if cl.kind == "empty":
            assert box == [] and sols == []
        elif cl.kind == "singleton":
            assert sols == [cl.point] and box in ([], [cl.point])
        else:
            # two solutions plus a lattice direction certify infinitude
            assert lat.rank >= 1 and len(sols) >= 2
