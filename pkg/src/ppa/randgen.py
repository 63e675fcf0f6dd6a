"""Seeded random formula generators used by the test suites and the CLI."""
from __future__ import annotations

import random

from .formula import (
    Dvd, Eq, Exists, ForAll, Formula, Le, LinTerm, Node, Not, conj, disj, free_vars,
)
from .poly import IntPoly


def random_term(rng: random.Random, names, coef_max: int, const_max: int, coef=None) -> LinTerm:
    """Linear term over `names` with at least one nonzero coefficient."""
    coef = coef or (lambda c: c)
    while True:
        pairs = [(v, rng.randint(-coef_max, coef_max)) for v in names]
        pairs = [(v, c) for v, c in pairs if c]
        if pairs:
            break
    return LinTerm.make([(v, coef(c)) for v, c in pairs], coef(rng.randint(-const_max, const_max)))


def random_atom(rng, names, coef_max=5, const_max=10, ordered=True, coef=None) -> Node:
    sub = rng.sample(list(names), rng.randint(1, min(2, len(names))))
    t = random_term(rng, sub, coef_max, const_max, coef)
    kinds = ["le", "eq", "dvd", "ne", "ndvd"] if ordered else ["eq", "dvd", "ne", "ndvd"]
    kind = rng.choice(kinds)
    if kind == "le":
        return Le(t)
    if kind in ("eq", "ne"):
        a = Eq(t)
        return a if kind == "eq" else Not(a)
    m = rng.randint(2, max(2, coef_max))
    a = Dvd(coef(m) if coef else m, t)
    return a if kind == "dvd" else Not(a)


def random_qf(rng, names, n_atoms=3, ordered=True, coef_max=5, const_max=10, coef=None) -> Node:
    """Random and/or tree over `n_atoms` literals."""
    parts = [random_atom(rng, names, coef_max, const_max, ordered, coef) for _ in range(n_atoms)]
    while len(parts) > 1:
        i = rng.randrange(len(parts) - 1)
        a, b = parts[i], parts[i + 1]
        parts[i:i + 2] = [conj(a, b) if rng.random() < 0.5 else disj(a, b)]
    return parts[0]


def random_sentence(rng, max_quantifiers=3, coef_max=5, const_max=10, max_atoms=3) -> Node:
    """Prenex ground sentence with 1..max_quantifiers quantifiers."""
    m = rng.randint(1, max_quantifiers)
    names = [f"y{i + 1}" for i in range(m)]
    body = random_qf(rng, names, rng.randint(1, max_atoms), True, coef_max, const_max)
    for v in names:
        if v not in free_vars(body):
            body = conj(body, random_atom(rng, [v], coef_max, const_max))
    for v in reversed(names):
        body = Exists(v, body) if rng.random() < 0.5 else ForAll(v, body)
    return body


def random_formula(rng, n_params=2, n_free=2, n_bound=2, ordered=True, max_atoms=4) -> Formula:
    """Parametric formula with polynomial coefficients, possibly quantified."""
    params = tuple(f"t{i + 1}" for i in range(n_params))
    free = tuple(f"x{i + 1}" for i in range(n_free))
    bound = [f"z{i + 1}" for i in range(rng.randint(0 if n_free else 1, max(n_bound, 1)))]
    names = list(free) + bound

    def coef(c):
        p = IntPoly.const(n_params, c)
        if n_params and rng.random() < 0.3:
            p = p * IntPoly.var(n_params, rng.randrange(n_params))
        return p

    body = random_qf(rng, names, rng.randint(1, max_atoms), ordered, 3, 5, coef)
    for v in reversed(bound):
        body = Exists(v, body) if rng.random() < 0.5 else ForAll(v, body)
    if rng.random() < 0.3:
        body = Not(body)
    return Formula(params, free, body)
