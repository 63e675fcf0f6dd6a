"""Order-free fragment: equations, divisibility and their negations.

Ground quantifier elimination works clause by clause on a DNF.  Equations in
the eliminated variable are solved by substitution, congruences are merged by
CRT, and negated congruences are handled through the exact density of the
excluded residue classes, so no step enumerates residues.  Counting goes
through `lattice.classify_conjunct`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Sequence

from .cooper import norm_literal, simplify, to_ground_node
from .errors import UsageError
from .formula import (
    FALSE, TRUE, And, Bot, Dvd, Eq, Exists, ForAll, Formula, Le, LinTerm, Node, Not, Or, Top,
    atoms, bound_vars, conj, disj, dnf_clauses, free_vars, nnf, substitute_params,
)
from .lattice import AffineLattice, classify_conjunct, solve_system

INFINITE = "infinite"


def check_unordered(n: Node):
    for a in atoms(n):
        if isinstance(a, Le):
            raise UsageError("order atoms are not allowed in the unordered fragment")


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _lit_parts(lit: Node):
    """(kind, negated, term, modulus) of a normalized literal."""
    neg = isinstance(lit, Not)
    a = lit.arg if neg else lit
    if isinstance(a, Eq):
        return "eq", neg, a.term, None
    if isinstance(a, Dvd):
        return "dvd", neg, a.term, abs(a.modulus)
    raise UsageError(f"unexpected literal {lit!r}")


def _make(kind, neg, term, mod=None) -> Node:
    a = Eq(term) if kind == "eq" else Dvd(mod, term)
    return norm_literal(Not(a) if neg else a)


def _dvd(m: int, term: LinTerm, neg: bool = False) -> Node:
    if m == 0:
        return _make("eq", neg, term)
    return _make("dvd", neg, term, abs(m))


# -- one clause ---------------------------------------------------------------------


def _eliminate_by_equation(lits, x):
    """Some positive equation a*x + e = 0 contains x: substitute a*x = -e."""
    eqs = [l for l in lits if not isinstance(l, Not) and isinstance(l, Eq) and l.term.coeff(x)]
    pick = min(eqs, key=lambda l: abs(l.term.coeff(x)))
    a = pick.term.coeff(x)
    e = pick.term.drop(x)
    out = [_dvd(a, e)]  # a | e
    for l in lits:
        if l is pick:
            continue
        kind, neg, t, m = _lit_parts(l)
        b = t.coeff(x)
        if not b:
            out.append(l)
            continue
        # a*(b x + rest) = -b e + a rest
        new = t.drop(x).scale(a) - e.scale(b)
        if kind == "eq":
            out.append(_make("eq", neg, new))
        else:
            out.append(_make("dvd", neg, new, abs(m * a)))
    return conj(out)


def _crt_merge(c1: LinTerm, m1: int, c2: LinTerm, m2: int):
    """x = c1 (m1) and x = c2 (m2)  ->  (condition, c, lcm)."""
    g = gcd(m1, m2)
    cond = _dvd(g, c2 - c1)
    if m1 == 1:
        return cond, c2, m2
    if m2 == 1:
        return cond, c1, m1
    n = m2 // g
    inv = pow(m1 // g, -1, n) if n > 1 else 0
    c = c1 + (c2 - c1).scale((m1 // g) * inv)
    L = _lcm(m1, m2)
    return cond, _reduce_term(c, L), L


def _reduce_term(t: LinTerm, m: int) -> LinTerm:
    return LinTerm.make([(v, c % m) for v, c in t.coeffs], t.const % m)


def _pattern_conditions(cuts):
    """Disjunction over nonemptiness/compatibility patterns of excluded cosets
    for which the excluded density is below 1.

    cuts: list of (g, p, h, inv): the class {l : n | L*l + h} is nonempty iff
    g | h, and then equals l = -(h/g)*inv (mod p).
    """
    out = []
    count = len(cuts)

    def density(active, compat):
        covered = Fraction(0)
        for size in range(1, len(active) + 1):
            for sub in combinations(active, size):
                if all(compat[(i, j)] for i, j in combinations(sub, 2)):
                    per = 1
                    for i in sub:
                        per = _lcm(per, cuts[i][1])
                    term = Fraction(1, per)
                    covered += term if size % 2 else -term
        return covered

    def rec_nonempty(i, active, lits):
        if i == count:
            pairs = [(a, b) for ai, a in enumerate(active) for b in active[ai + 1:]]
            rec_compat(0, pairs, active, lits, {})
            return
        g, p, h, inv = cuts[i]
        for flag in (True, False):
            lit = _dvd(g, h, neg=not flag)
            if isinstance(lit, Bot):
                continue
            rec_nonempty(i + 1, active + [i] if flag else active, lits + [lit])

    def rec_compat(k, pairs, active, lits, compat):
        if k == len(pairs):
            if density(active, compat) < 1:
                out.append(conj(lits))
            return
        i, j = pairs[k]
        gi, pi, hi, ii = cuts[i]
        gj, pj, hj, ij = cuts[j]
        G = gcd(pi, pj)
        # gcd(pi,pj) | -(hi/gi) ii + (hj/gj) ij, scaled by gi*gj
        term = hj.scale(gi * ij) - hi.scale(gj * ii)
        for flag in (True, False):
            lit = _dvd(G * gi * gj, term, neg=not flag)
            if isinstance(lit, Bot):
                continue
            rec_compat(k + 1, pairs, active, lits + [lit], {**compat, (i, j): flag, (j, i): flag})

    rec_nonempty(0, [], [])
    return disj(out)


def _eliminate_by_congruences(lits, x):
    """No positive equation contains x."""
    keep = [l for l in lits if x not in free_vars(l)]
    mine = [l for l in lits if x in free_vars(l)]
    # negated equations only remove finitely many points of a periodic fiber
    congs = [p for p in map(_lit_parts, mine) if p[0] == "dvd"]
    l_coef = 1
    for _, _, t, _ in congs:
        l_coef = _lcm(l_coef, abs(t.coeff(x)))
    pos, negc = [], []
    for _, neg, t, m in congs:
        c = t.coeff(x)
        k = l_coef // abs(c)
        rest = t.drop(x).scale(k)
        if c < 0:
            rest = -rest
        # m*k | l*x' + rest with x' = x scaled; here coefficient is +1 on X = l*x
        (negc if neg else pos).append((m * k, rest))
    conds = list(keep)
    # X = l*x: l | X;  X + rest = 0 (mod m)  <=>  X = -rest (mod m)
    C, L = LinTerm((), 0), l_coef
    for m, rest in pos:
        cond, C, L = _crt_merge(C, L, _reduce_term(-rest, m), m)
        conds.append(cond)
    # X = C + L*lam; excluded: n | L*lam + (C + rest)
    cuts = []
    for n, rest in negc:
        h = C + rest
        g = gcd(L, n)
        p = n // g
        inv = pow((L // g) % p, -1, p) if p > 1 else 0
        cuts.append((g, p, h, inv))
    if cuts:
        conds.append(_pattern_conditions(cuts))
    return conj(conds)


def _eliminate_clause(lits, x) -> Node:
    lits = [norm_literal(l) for l in lits]
    if any(isinstance(l, Bot) for l in lits):
        return FALSE
    lits = [l for l in lits if not isinstance(l, Top)]
    if not any(x in free_vars(l) for l in lits):
        return conj(lits)
    if any(not isinstance(l, Not) and isinstance(l, Eq) and l.term.coeff(x) for l in lits):
        return _eliminate_by_equation(lits, x)
    return _eliminate_by_congruences(lits, x)


def eliminate_exists_unordered(f: Node, x: str) -> Node:
    """Quantifier-free equivalent of exists x . f over Z (f order-free, ground)."""
    if isinstance(f, Formula):
        f = f.body
    if bound_vars(f):
        raise UsageError("eliminate_exists_unordered expects a quantifier-free formula")
    f = simplify(nnf(to_ground_node(f)))
    check_unordered(f)
    if isinstance(f, (Top, Bot)):
        return f
    parts = [_eliminate_clause(c, x) for c in dnf_clauses(f)]
    return simplify(disj(parts))


def _qe(n: Node) -> Node:
    if isinstance(n, Exists):
        return eliminate_exists_unordered(_qe(n.body), n.var)
    if isinstance(n, ForAll):
        inner = simplify(nnf(_qe(n.body), negate=True))
        return simplify(nnf(eliminate_exists_unordered(inner, n.var), negate=True))
    if isinstance(n, Not):
        return simplify(nnf(_qe(n.arg), negate=True))
    if isinstance(n, (And, Or)):
        parts = [_qe(a) for a in n.args]
        return simplify(conj(parts) if isinstance(n, And) else disj(parts))
    return simplify(n)


def qe_unordered(n) -> Node:
    """Quantifier-free equivalent of a ground order-free node or Formula."""
    if isinstance(n, Formula):
        n = n.body
    n = to_ground_node(n)
    check_unordered(n)
    return _qe(n)


# -- parametric front ends -------------------------------------------------------------


def _ground(f: Formula, t) -> Formula:
    g = substitute_params(f, tuple(t)) if f.params else f
    check_unordered(g.body)
    return g


def ground_qe(f: Formula, t) -> tuple[Node, tuple]:
    g = _ground(f, t)
    return qe_unordered(g.body), g.free


def decide_nonempty(f: Formula, t=()) -> bool:
    body, free = ground_qe(f, t)
    for v in free:
        body = eliminate_exists_unordered(body, v)
    if isinstance(body, Top):
        return True
    if isinstance(body, Bot):
        return False
    raise AssertionError(f"elimination left {body!r}")


def _clause_system(lits, free):
    idx = {v: i for i, v in enumerate(free)}
    d = len(free)

    def vec(t):
        a = [0] * d
        for v, c in t.coeffs:
            a[idx[v]] = c
        return a

    eqs, congs, neqs, ncongs = [], [], [], []
    for l in lits:
        kind, neg, t, m = _lit_parts(l)
        item = (vec(t), t.const) if kind == "eq" else (m, vec(t), t.const)
        if kind == "eq":
            (neqs if neg else eqs).append(item)
        else:
            (ncongs if neg else congs).append(item)
    return solve_system(d, eqs, congs), neqs, ncongs


@dataclass(frozen=True)
class CountResult:
    count: int | None  # None when infinite
    points: tuple = ()

    @property
    def infinite(self) -> bool:
        return self.count is None

    def __str__(self):
        return INFINITE if self.count is None else str(self.count)


def count_unordered(f: Formula, t=()) -> CountResult:
    """|S_t| for an order-free formula: QE, DNF, then the 0/1/infinity split
    of each clause."""
    body, free = ground_qe(f, t)
    body = simplify(nnf(body))
    if isinstance(body, Bot):
        return CountResult(0)
    if isinstance(body, Top):
        return CountResult(None) if free else CountResult(1, ((),))
    points = set()
    for clause in dnf_clauses(body):
        lits = [norm_literal(l) for l in clause]
        if any(isinstance(l, Bot) for l in lits):
            continue
        lits = [l for l in lits if not isinstance(l, Top)]
        lat, neqs, ncongs = _clause_system(lits, free)
        cl = classify_conjunct(lat, neqs, ncongs)
        if cl.kind == "infinite":
            return CountResult(None)
        if cl.kind == "singleton":
            points.add(cl.point)
    return CountResult(len(points), tuple(sorted(points)))


def decide_finite(f: Formula, t=()) -> str:
    return "infinite" if count_unordered(f, t).infinite else "finite"
