"""Seeded randomized cross-checks shared by the CLI `sweep` command and the
acceptance suite.  Each sweep returns a JSON-ready report whose `failures`
list is empty on success."""
from __future__ import annotations

import random

from .cooper import certified_box, decide_sentence, growth_report
from .formula import Formula, dnf_clauses, clauses_to_node, prenex_parts, build_prefix, substitute_params
from .oracle import Box, decide_bounded, enumerate_solutions
from .parser import parse, render, render_file
from .randgen import random_formula, random_sentence


def cooper_sweep(n: int = 200, seed: int = 1) -> dict:
    """decide_sentence against the oracle on certified boxes, plus the growth bound."""
    rng = random.Random(seed)
    failures = []
    agree = bound_ok = 0
    for i in range(n):
        s = random_sentence(rng, max_quantifiers=3, coef_max=5, const_max=10)
        exact = decide_sentence(s)
        node, box = certified_box(s)
        bounded = decide_bounded(node, box)
        _, _, ok = growth_report(s)
        agree += exact == bounded
        bound_ok += ok
        if exact != bounded or not ok:
            failures.append({"index": i, "sentence": render(s), "exact": exact,
                             "oracle": bounded, "bound_ok": ok})
    return {"count": n, "seed": seed, "agree": agree, "bound_ok": bound_ok, "failures": failures}


def unordered_case(g: Formula, min_radius: int = 4) -> dict:
    """Compare count_unordered with the oracle on a box holding every singleton.

    Finite answers must match the oracle's solution list exactly.  Infinite
    answers must match the quantifier-free form pointwise on the box.
    """
    from .unordered import count_unordered, qe_unordered

    res = count_unordered(g)
    R = min_radius
    if res.points:
        R = max(R, max(abs(c) for p in res.points for c in p))
    node, qbox = certified_box(g, {v: R for v in g.free})
    fbox = Box.uniform(-R, R)
    sols = enumerate_solutions(Formula((), g.free, node), fbox, qbox)
    if res.infinite:
        qf = enumerate_solutions(Formula((), g.free, qe_unordered(g)), fbox, Box())
        ok = sols == qf and bool(g.free)
    else:
        ok = tuple(sols) == res.points
    return {"ok": ok, "infinite": res.infinite, "count": res.count, "oracle_in_box": len(sols)}


def unordered_sweep(n: int = 200, seed: int = 7) -> dict:
    rng = random.Random(seed)
    failures = []
    finite = 0
    for i in range(n):
        f = random_formula(rng, n_params=2, n_free=rng.randint(1, 3), n_bound=2,
                           ordered=False, max_atoms=3)
        u = (rng.randint(1, 4), rng.randint(1, 4))
        rep = unordered_case(substitute_params(f, u))
        finite += not rep["infinite"]
        if not rep["ok"]:
            failures.append({"index": i, "formula": render(f), "params": list(u), **rep})
    return {"count": n, "seed": seed, "finite_cases": finite, "failures": failures}


def formula_sweep(n: int = 500, seed: int = 3, radius: int = 2) -> dict:
    """parse∘render is the identity on canonical formulas, and the reparsed,
    prenex and DNF forms all agree with f on a box.

    Rendering canonicalizes (for instance the sign of an equation), so the
    structural identity is checked on g = parse(render(f)): parse(render(g))
    must equal g and render(g) must equal render(f).
    """
    rng = random.Random(seed)
    failures = []
    for i in range(n):
        f = random_formula(rng, n_params=2, n_free=rng.randint(0, 2), n_bound=2,
                           ordered=True, max_atoms=4)
        back = parse(render_file(f))
        roundtrip = parse(render_file(back)) == back and render(back) == render(f)
        u = (rng.randint(-3, 3), rng.randint(-3, 3))
        g = substitute_params(f, u)
        box = Box.uniform(-radius, radius)
        want = enumerate_solutions(g, box, box)
        roundtrip = roundtrip and enumerate_solutions(substitute_params(back, u), box, box) == want
        prefix, matrix = prenex_parts(g.body, reserved=set(g.free))
        pren = build_prefix(prefix, matrix)
        dnf = build_prefix(prefix, clauses_to_node(dnf_clauses(matrix)))
        same_prenex = enumerate_solutions(g.with_body(pren), box, box) == want
        same_dnf = enumerate_solutions(g.with_body(dnf), box, box) == want
        if not (roundtrip and same_prenex and same_dnf):
            failures.append({"index": i, "formula": render(f), "roundtrip": roundtrip,
                             "prenex": same_prenex, "dnf": same_dnf})
    return {"count": n, "seed": seed, "failures": failures}
