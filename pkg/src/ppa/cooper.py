"""Cooper quantifier elimination for ground Presburger formulas.

Coefficients are plain integers.  Each step scales the eliminated variable to a
unit coefficient (lcm normalization plus a divisibility side atom) and then
expands over the smaller of the lower- and upper-bound sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import gcd

from .errors import ResourceLimit, UsageError
from .formula import (
    FALSE, TRUE, And, Bot, Dvd, Eq, Exists, ForAll, Formula, Le, LinTerm, Node, Not, Or, Top,
    atoms, bound_vars, conj, disj, free_vars, is_quantifier_free, nnf, prenex_parts,
)
from .poly import IntPoly

MAX_BITS = 20000
MAX_ATOMS = 2_000_000


def _int(c) -> int:
    if isinstance(c, IntPoly):
        if c.arity:
            raise UsageError("Cooper elimination needs a ground formula (no parameters)")
        return c.constant_value()
    return int(c)


def to_ground_node(n: Node) -> Node:
    """Same tree with plain int coefficients."""
    from .formula import map_atoms

    def fix(a):
        t = LinTerm.make([(v, _int(c)) for v, c in a.term.coeffs], _int(a.term.const))
        if isinstance(a, Dvd):
            m = _int(a.modulus)
            return Eq(t) if m == 0 else Dvd(m, t)
        return type(a)(t)

    return map_atoms(n, fix)


# -- atom normalization ------------------------------------------------------------


def _content(coeffs) -> int:
    g = 0
    for _, c in coeffs:
        g = gcd(g, c)
    return g


def norm_atom(a: Node) -> Node:
    """Canonical form of a ground atom; may fold to TRUE or FALSE."""
    t = a.term
    if isinstance(a, Le):
        if not t.coeffs:
            return TRUE if t.const <= 0 else FALSE
        g = _content(t.coeffs)
        if g > 1:
            t = LinTerm(tuple((v, c // g) for v, c in t.coeffs), -((-t.const) // g))
        return Le(t)
    if isinstance(a, Eq):
        if not t.coeffs:
            return TRUE if t.const == 0 else FALSE
        g = _content(t.coeffs)
        if t.const % g:
            return FALSE
        if t.coeffs[0][1] < 0:
            g = -g
        if g != 1:
            t = LinTerm(tuple((v, c // g) for v, c in t.coeffs), t.const // g)
        return Eq(t)
    m = abs(a.modulus)
    coeffs = tuple((v, c % m) for v, c in t.coeffs if c % m)
    const = t.const % m
    g = gcd(m, gcd(_content(coeffs), const))
    if g > 1:
        m //= g
        coeffs = tuple((v, c // g) for v, c in coeffs)
        const //= g
    if m == 1:
        return TRUE
    if not coeffs:
        return TRUE if const == 0 else FALSE
    return Dvd(m, LinTerm(coeffs, const))


def norm_literal(n: Node) -> Node:
    if isinstance(n, Not):
        inner = norm_atom(n.arg)
        if isinstance(inner, Top):
            return FALSE
        if isinstance(inner, Bot):
            return TRUE
        return Not(inner)
    return norm_atom(n)


def simplify(n: Node) -> Node:
    """Normalize literals, fold constants, drop duplicate operands."""
    if isinstance(n, (Top, Bot)):
        return n
    if isinstance(n, (Le, Eq, Dvd, Not)):
        return norm_literal(n)
    if isinstance(n, (And, Or)):
        parts = []
        seen = set()
        for a in n.args:
            s = simplify(a)
            key = s
            if key in seen:
                continue
            seen.add(key)
            parts.append(s)
        return conj(parts) if isinstance(n, And) else disj(parts)
    raise UsageError("simplify expects a quantifier-free node")


# -- one elimination step -------------------------------------------------------------


def _subst(n: Node, x: str, term: LinTerm) -> Node:
    if isinstance(n, (Top, Bot)):
        return n
    if isinstance(n, Not):
        inner = _subst(n.arg, x, term)
        if isinstance(inner, Top):
            return FALSE
        return TRUE if isinstance(inner, Bot) else Not(inner)
    if isinstance(n, (Le, Eq, Dvd)):
        t = n.term.subst(x, term)
        a = Dvd(n.modulus, t) if isinstance(n, Dvd) else type(n)(t)
        return norm_atom(a)
    parts = [_subst(a, x, term) for a in n.args]
    return conj(parts) if isinstance(n, And) else disj(parts)


def _expand_ne(n: Node, x: str) -> Node:
    """Rewrite t != 0 (t containing x) as t <= -1 or t >= 1."""
    if isinstance(n, Not) and isinstance(n.arg, Eq) and n.arg.term.has(x):
        t = n.arg.term
        return disj(Le(t.add_const(1)), Le((-t).add_const(1)))
    if isinstance(n, (And, Or)):
        parts = [_expand_ne(a, x) for a in n.args]
        return conj(parts) if isinstance(n, And) else disj(parts)
    return n


def _unit_scale(n: Node, x: str, l: int) -> Node:
    """Scale every atom so that x has coefficient +-l, then read l*x as x."""
    if isinstance(n, Not):
        return Not(_unit_scale(n.arg, x, l))
    if isinstance(n, (Le, Eq, Dvd)):
        c = n.term.coeff(x)
        if c == 0:
            return n
        k = l // abs(c)
        rest = n.term.drop(x).scale(k)
        t = LinTerm.make(list(rest.coeffs) + [(x, 1 if c > 0 else -1)], rest.const)
        if isinstance(n, Dvd):
            return Dvd(abs(n.modulus) * k, t)
        return type(n)(t)
    if isinstance(n, (And, Or)):
        parts = [_unit_scale(a, x, l) for a in n.args]
        return conj(parts) if isinstance(n, And) else disj(parts)
    return n


def _collect(n: Node, x: str, lower: list, upper: list, mods: list):
    if isinstance(n, Not):
        _collect(n.arg, x, lower, upper, mods)
        return
    if isinstance(n, Le):
        c = n.term.coeff(x)
        if c == 1:  # x + t <= 0  ->  x <= -t
            upper.append(-n.term.drop(x))
        elif c == -1:  # -x + t <= 0  ->  x >= t
            lower.append(n.term.drop(x))
        return
    if isinstance(n, Eq):
        c = n.term.coeff(x)
        if c:
            val = -n.term.drop(x) if c == 1 else n.term.drop(x)
            lower.append(val)
            upper.append(val)
        return
    if isinstance(n, Dvd):
        if n.term.coeff(x):
            mods.append(abs(n.modulus))
        return
    if isinstance(n, (And, Or)):
        for a in n.args:
            _collect(a, x, lower, upper, mods)


def _at_infinity(n: Node, x: str, sign: int) -> Node:
    """The formula for x -> sign * infinity (order atoms in x become constants)."""
    if isinstance(n, Le):
        c = n.term.coeff(x)
        if c == 0:
            return n
        return TRUE if c * sign < 0 else FALSE
    if isinstance(n, Eq):
        return FALSE if n.term.coeff(x) else n
    if isinstance(n, Not):
        if isinstance(n.arg, Eq) and n.arg.term.coeff(x):
            return TRUE
        return n
    if isinstance(n, (And, Or)):
        parts = [_at_infinity(a, x, sign) for a in n.args]
        return conj(parts) if isinstance(n, And) else disj(parts)
    return n


def _dedupe_terms(terms):
    out, seen = [], set()
    for t in terms:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def eliminate_exists(f: Node, x: str) -> Node:
    """Quantifier-free equivalent of (exists x . f) for quantifier-free ground f."""
    if bound_vars(f):
        raise UsageError("eliminate_exists expects a quantifier-free formula")
    f = simplify(nnf(to_ground_node(f)))
    if x not in free_vars(f):
        return f
    f = _expand_ne(f, x)
    coeffs = [abs(a.term.coeff(x)) for a in atoms(f) if a.term.coeff(x)]
    l = 1
    for c in coeffs:
        l = l * c // gcd(l, c)
    f = _unit_scale(f, x, l)
    if l > 1:
        f = conj(f, Dvd(l, LinTerm(((x, 1),), 0)))
    lower, upper, mods = [], [], []
    _collect(f, x, lower, upper, mods)
    delta = 1
    for m in mods:
        delta = delta * m // gcd(delta, m)
    lower, upper = _dedupe_terms(lower), _dedupe_terms(upper)
    if len(lower) <= len(upper):
        sign, bounds, step = -1, lower, 1
    else:
        sign, bounds, step = 1, upper, -1
    _guard_size(len(bounds) + 1, delta)
    inf = simplify(_at_infinity(f, x, sign))
    parts = []
    for j in range(delta):
        parts.append(_subst(inf, x, LinTerm((), step * j)))
    for b in bounds:
        for j in range(delta):
            parts.append(_subst(f, x, b.add_const(step * j)))
    return simplify(disj(parts))


def _guard_size(copies: int, delta: int):
    if copies * delta > MAX_ATOMS:
        raise ResourceLimit(f"Cooper expansion of {copies} x {delta} copies exceeds the size budget")


def _check_growth(n: Node):
    st = growth_stats(n)
    if st.s.bit_length() > MAX_BITS:
        raise ResourceLimit(f"coefficient size exceeds {MAX_BITS} bits")
    if st.a > MAX_ATOMS:
        raise ResourceLimit(f"formula exceeds {MAX_ATOMS} atoms")


def _qe(n: Node) -> Node:
    if isinstance(n, Exists):
        out = eliminate_exists(_qe(n.body), n.var)
        _check_growth(out)
        return out
    if isinstance(n, ForAll):
        inner = nnf(_qe(n.body), negate=True)
        out = simplify(nnf(eliminate_exists(inner, n.var), negate=True))
        _check_growth(out)
        return out
    if isinstance(n, Not):
        return simplify(nnf(_qe(n.arg), negate=True))
    if isinstance(n, (And, Or)):
        parts = [_qe(a) for a in n.args]
        return simplify(conj(parts) if isinstance(n, And) else disj(parts))
    return simplify(n)


def qe(f):
    """Quantifier-free equivalent; accepts a ground Formula or node.

    Quantifier-free input is returned unchanged.
    """
    if isinstance(f, Formula):
        if f.params:
            raise UsageError("qe needs a ground formula; substitute parameters first")
        return f.with_body(qe(f.body))
    n = to_ground_node(f)
    return n if is_quantifier_free(n) else _qe(n)


def decide_sentence(f) -> bool:
    body = f.body if isinstance(f, Formula) else f
    if free_vars(body):
        raise UsageError(f"not a sentence; free variables {sorted(free_vars(body))}")
    out = simplify(qe(body))
    if isinstance(out, Top):
        return True
    if isinstance(out, Bot):
        return False
    raise AssertionError(f"elimination left a non-constant sentence: {out!r}")


# -- growth measurement ------------------------------------------------------------


@dataclass(frozen=True)
class GrowthStats:
    c: int  # distinct absolute values among coefficients and divisors
    s: int  # largest absolute value among coefficients, divisors, constants
    a: int  # number of atoms

    def to_json(self) -> dict:
        return {"c": self.c, "s": self.s, "a": self.a}


def growth_stats(f) -> GrowthStats:
    body = f.body if isinstance(f, Formula) else f
    vals: set[int] = set()
    s = 0
    a = 0
    for at in atoms(body):
        a += 1
        for _, c in at.term.coeffs:
            c = abs(_int(c))
            vals.add(c)
            s = max(s, c)
        s = max(s, abs(_int(at.term.const)))
        if isinstance(at, Dvd):
            m = abs(_int(at.modulus))
            vals.add(m)
            s = max(s, m)
    return GrowthStats(len(vals), s, a)


def _log2(x: int) -> float:
    return math.log2(x) if x > 0 else float("-inf")


def le_product_of_powers(x: int, factors) -> bool:
    """Exact test of x <= prod(base ** exp) without expanding huge powers."""
    if x <= 0:
        return True
    if any(b == 0 for b, e in factors if e > 0):
        return False
    rhs = 0.0
    for b, e in factors:
        if e == 0 or b == 1:
            continue
        if e.bit_length() > 900:
            return True  # the right side has more than 2**900 bits
        rhs += float(e) * _log2(b)
    lhs = _log2(x)
    if lhs < rhs - 1e-9 * max(1.0, rhs) - 1e-9:
        return True
    if lhs > rhs + 1e-9 * max(1.0, rhs) + 1e-9:
        return False
    prod = 1
    for b, e in factors:
        prod *= b ** e
    return x <= prod


def growth_bound_ok(before: GrowthStats, after: GrowthStats, m: int) -> bool:
    """c' <= c^(4^m), s' <= s^((4c)^(4^m)), a' <= a^(4^m) s^((4c)^(4^m)).

    The bounds are evaluated with c and s floored at 2 and a at 1, since at
    c = 1 or s = 1 the right-hand sides collapse to 1 and no elimination step
    could satisfy them.
    """
    c = max(before.c, 2)
    s = max(before.s, 2)
    a = max(before.a, 1)
    e1 = 4 ** m
    e2 = (4 * c) ** e1
    return (le_product_of_powers(after.c, [(c, e1)])
            and le_product_of_powers(after.s, [(s, e2)])
            and le_product_of_powers(after.a, [(a, e1), (s, e2)]))


def growth_report(f) -> tuple[GrowthStats, GrowthStats, bool]:
    body = f.body if isinstance(f, Formula) else f
    body = to_ground_node(body)
    prefix, _ = prenex_parts(body)
    before = growth_stats(body)
    after = growth_stats(qe(body))
    return before, after, growth_bound_ok(before, after, len(prefix))


# -- certified search boxes ---------------------------------------------------------


def _term_radius(t: LinTerm, radii: dict) -> int:
    return abs(t.const) + sum(abs(c) * radii[v] for v, c in t.coeffs)


def witness_radius(f: Node, x: str, radii: dict) -> int:
    """R such that exists x . f has a witness with |x| <= R whenever it holds,
    for every assignment of the other variables within `radii`.

    After scaling x to a unit coefficient (x' = l*x) every witness class is
    represented within delta of a bound term, or, for the unbounded branch,
    within delta below (or above) all bound terms.
    """
    f = simplify(nnf(to_ground_node(f)))
    if x not in free_vars(f):
        return 0
    f = _expand_ne(f, x)
    l = 1
    for a in atoms(f):
        c = abs(a.term.coeff(x))
        if c:
            l = l * c // gcd(l, c)
    f = _unit_scale(f, x, l)
    lower, upper, mods = [], [], [l]
    _collect(f, x, lower, upper, mods)
    delta = 1
    for m in mods:
        delta = delta * m // gcd(delta, m)
    reach = max((_term_radius(t, radii) for t in lower + upper), default=0)
    return (reach + delta) // l + 1


def certified_box(f, free_radii=None):
    """Per-variable box on which bounded evaluation of the prenex formula f
    agrees with its truth over Z.

    Free variables are assumed to range over |v| <= free_radii[v] (a sentence
    needs none).  Returns (prenex node, Box of the quantified variables).
    Radii are assigned outermost first; each one comes from the eliminated
    form of the formula below its quantifier.
    """
    from .oracle import Box

    body = f.body if isinstance(f, Formula) else f
    body = to_ground_node(body)
    free_radii = dict(free_radii or {})
    missing = free_vars(body) - set(free_radii)
    if missing:
        raise UsageError(f"no radius given for free variables {sorted(missing)}")
    prefix, matrix = prenex_parts(body, reserved=set(free_radii))
    stages = []
    cur = simplify(matrix)
    for q, v in reversed(prefix):
        g = cur if q == "E" else simplify(nnf(cur, negate=True))
        stages.append((v, g))
        out = eliminate_exists(g, v)
        cur = out if q == "E" else simplify(nnf(out, negate=True))
    radii: dict = dict(free_radii)
    for v, g in reversed(stages):
        radii[v] = witness_radius(g, v, radii)
    from .formula import build_prefix

    node = build_prefix(prefix, matrix)
    return node, Box({v: (-radii[v], radii[v]) for _, v in prefix})
