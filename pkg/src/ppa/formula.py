"""Formula trees for parametric Presburger arithmetic and their normal forms.

Coefficients are `IntPoly` values in a parametric formula and plain `int`
values in a ground one; every node class serves both.  Atoms are stored
normalized: ``Le(t)`` is ``t <= 0``, ``Eq(t)`` is ``t = 0``, ``Dvd(m, t)`` is
``m | t``.  Strict comparisons and ``!=`` exist only in the concrete syntax.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from .errors import UsageError
from .poly import IntPoly


def _is_zero(c) -> bool:
    return c == 0


@dataclass(frozen=True)
class LinTerm:
    """sum(c * v for v, c in coeffs) + const, coefficients sorted by variable."""

    coeffs: tuple = ()
    const: object = 0

    @staticmethod
    def make(coeffs, const) -> LinTerm:
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        merged: dict = {}
        for v, c in items:
            merged[v] = merged[v] + c if v in merged else c
        return LinTerm(tuple(sorted((v, c) for v, c in merged.items() if not _is_zero(c))), const)

    @staticmethod
    def var(name: str, one=1, zero=0) -> LinTerm:
        return LinTerm(((name, one),), zero)

    def coeff(self, v: str, default=0):
        for name, c in self.coeffs:
            if name == v:
                return c
        return default

    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def has(self, v: str) -> bool:
        return any(name == v for name, _ in self.coeffs)

    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other: LinTerm) -> LinTerm:
        return LinTerm.make(list(self.coeffs) + list(other.coeffs), self.const + other.const)

    def __neg__(self) -> LinTerm:
        return LinTerm(tuple((v, -c) for v, c in self.coeffs), -self.const)

    def __sub__(self, other: LinTerm) -> LinTerm:
        return self + (-other)

    def scale(self, k) -> LinTerm:
        if _is_zero(k):
            return LinTerm((), self.const * 0)
        return LinTerm.make([(v, c * k) for v, c in self.coeffs], self.const * k)

    def add_const(self, k) -> LinTerm:
        return LinTerm(self.coeffs, self.const + k)

    def drop(self, v: str) -> LinTerm:
        return LinTerm(tuple((n, c) for n, c in self.coeffs if n != v), self.const)

    def subst(self, v: str, term: LinTerm) -> LinTerm:
        c = self.coeff(v)
        if _is_zero(c):
            return self
        return self.drop(v) + term.scale(c)

    def rename(self, mapping: dict) -> LinTerm:
        return LinTerm.make([(mapping.get(v, v), c) for v, c in self.coeffs], self.const)

    def map_coeffs(self, fn: Callable) -> LinTerm:
        return LinTerm.make([(v, fn(c)) for v, c in self.coeffs], fn(self.const))

    def eval(self, env) -> int:
        total = self.const
        for v, c in self.coeffs:
            total += c * env[v]
        return total


# -- nodes -------------------------------------------------------------------


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Node):
    pass


@dataclass(frozen=True)
class Bot(Node):
    pass


TRUE = Top()
FALSE = Bot()


@dataclass(frozen=True)
class Le(Node):
    term: LinTerm


@dataclass(frozen=True)
class Eq(Node):
    term: LinTerm


@dataclass(frozen=True)
class Dvd(Node):
    modulus: object
    term: LinTerm

    def __post_init__(self):
        if _is_zero(self.modulus):
            raise UsageError("divisibility modulus must be nonzero")


@dataclass(frozen=True)
class Not(Node):
    arg: Node


@dataclass(frozen=True)
class And(Node):
    args: tuple

    def __post_init__(self):
        if len(self.args) < 2:
            raise UsageError("And needs at least two operands; use conj()")


@dataclass(frozen=True)
class Or(Node):
    args: tuple

    def __post_init__(self):
        if len(self.args) < 2:
            raise UsageError("Or needs at least two operands; use disj()")


@dataclass(frozen=True)
class Exists(Node):
    var: str
    body: Node


@dataclass(frozen=True)
class ForAll(Node):
    var: str
    body: Node


ATOMS = (Le, Eq, Dvd)
QUANTIFIERS = (Exists, ForAll)


def conj(*args: Node) -> Node:
    """Flattening conjunction with unit/zero simplification."""
    out = []
    for a in _flatten(args):
        if isinstance(a, And):
            out.extend(a.args)
        elif isinstance(a, Bot):
            return FALSE
        elif not isinstance(a, Top):
            out.append(a)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*args: Node) -> Node:
    out = []
    for a in _flatten(args):
        if isinstance(a, Or):
            out.extend(a.args)
        elif isinstance(a, Top):
            return TRUE
        elif not isinstance(a, Bot):
            out.append(a)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def _flatten(args) -> Iterator[Node]:
    for a in args:
        if isinstance(a, (list, tuple)):
            yield from _flatten(a)
        else:
            yield a


def neg(a: Node) -> Node:
    if isinstance(a, Top):
        return FALSE
    if isinstance(a, Bot):
        return TRUE
    if isinstance(a, Not):
        return a.arg
    return Not(a)


def implies(a: Node, b: Node) -> Node:
    return disj(neg(a), b)


def exists(vars_: Sequence[str] | str, body: Node) -> Node:
    if isinstance(vars_, str):
        vars_ = [vars_]
    for v in reversed(list(vars_)):
        body = Exists(v, body)
    return body


def forall(vars_: Sequence[str] | str, body: Node) -> Node:
    if isinstance(vars_, str):
        vars_ = [vars_]
    for v in reversed(list(vars_)):
        body = ForAll(v, body)
    return body


# -- traversal ---------------------------------------------------------------


def children(n: Node) -> tuple:
    if isinstance(n, (And, Or)):
        return n.args
    if isinstance(n, Not):
        return (n.arg,)
    if isinstance(n, QUANTIFIERS):
        return (n.body,)
    return ()


def atoms(n: Node) -> Iterator[Node]:
    if isinstance(n, ATOMS):
        yield n
    else:
        for c in children(n):
            yield from atoms(c)


def terms_of(a: Node) -> LinTerm:
    return a.term


def free_vars(n: Node) -> set[str]:
    if isinstance(n, ATOMS):
        return set(n.term.variables())
    if isinstance(n, QUANTIFIERS):
        return free_vars(n.body) - {n.var}
    out: set[str] = set()
    for c in children(n):
        out |= free_vars(c)
    return out


def all_vars(n: Node) -> set[str]:
    if isinstance(n, ATOMS):
        return set(n.term.variables())
    out: set[str] = set()
    if isinstance(n, QUANTIFIERS):
        out.add(n.var)
    for c in children(n):
        out |= all_vars(c)
    return out


def bound_vars(n: Node) -> list[str]:
    out = []
    if isinstance(n, QUANTIFIERS):
        out.append(n.var)
    for c in children(n):
        out.extend(bound_vars(c))
    return out


def is_quantifier_free(n: Node) -> bool:
    return not bound_vars(n)


def map_atoms(n: Node, fn: Callable[[Node], Node]) -> Node:
    """Rebuild `n` with every atom replaced by fn(atom)."""
    if isinstance(n, ATOMS):
        return fn(n)
    if isinstance(n, (Top, Bot)):
        return n
    if isinstance(n, Not):
        return Not(map_atoms(n.arg, fn))
    if isinstance(n, And):
        return And(tuple(map_atoms(a, fn) for a in n.args))
    if isinstance(n, Or):
        return Or(tuple(map_atoms(a, fn) for a in n.args))
    if isinstance(n, Exists):
        return Exists(n.var, map_atoms(n.body, fn))
    if isinstance(n, ForAll):
        return ForAll(n.var, map_atoms(n.body, fn))
    raise TypeError(n)


def map_terms(n: Node, fn: Callable[[LinTerm], LinTerm]) -> Node:
    def on_atom(a):
        if isinstance(a, Dvd):
            return Dvd(a.modulus, fn(a.term))
        return type(a)(fn(a.term))

    return map_atoms(n, on_atom)


def rename_free(n: Node, mapping: dict) -> Node:
    if not mapping:
        return n
    if isinstance(n, QUANTIFIERS):
        inner = {k: v for k, v in mapping.items() if k != n.var}
        return type(n)(n.var, rename_free(n.body, inner))
    if isinstance(n, ATOMS):
        t = n.term.rename(mapping)
        return Dvd(n.modulus, t) if isinstance(n, Dvd) else type(n)(t)
    if isinstance(n, (Top, Bot)):
        return n
    if isinstance(n, Not):
        return Not(rename_free(n.arg, mapping))
    return type(n)(tuple(rename_free(a, mapping) for a in n.args))


def substitute_var(n: Node, v: str, term: LinTerm) -> Node:
    """Replace free occurrences of v by a linear term (no capture checks)."""
    if isinstance(n, QUANTIFIERS):
        if n.var == v:
            return n
        return type(n)(n.var, substitute_var(n.body, v, term))
    if isinstance(n, ATOMS):
        t = n.term.subst(v, term)
        return Dvd(n.modulus, t) if isinstance(n, Dvd) else type(n)(t)
    return _rebuild(n, lambda c: substitute_var(c, v, term))


def _rebuild(n: Node, fn) -> Node:
    if isinstance(n, (Top, Bot)):
        return n
    if isinstance(n, Not):
        return Not(fn(n.arg))
    if isinstance(n, (And, Or)):
        return type(n)(tuple(fn(a) for a in n.args))
    if isinstance(n, QUANTIFIERS):
        return type(n)(n.var, fn(n.body))
    raise TypeError(n)


def node_size(n: Node) -> int:
    return 1 + sum(node_size(c) for c in children(n))


# -- the sorted wrapper ------------------------------------------------------


@dataclass(frozen=True)
class Formula:
    """A formula together with its sort table.

    `params` are the parameters t (never quantified); `free` lists the free
    group variables in the order used for points and boxes.
    """

    params: tuple
    free: tuple
    body: Node

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "free", tuple(self.free))
        clash = set(self.params) & (set(self.free) | set(bound_vars(self.body)))
        if clash:
            raise UsageError(f"parameters used as group variables: {sorted(clash)}")
        stray = free_vars(self.body) - set(self.free)
        if stray:
            raise UsageError(f"undeclared free variables: {sorted(stray)}")

    @property
    def arity(self) -> int:
        return len(self.params)

    def with_body(self, body: Node) -> Formula:
        return Formula(self.params, self.free, body)

    def is_ground(self) -> bool:
        return not self.params

    def __str__(self):
        from .parser import render

        return render(self)


# -- substitution of parameter values ----------------------------------------


def substitute_params(f: Formula, values: Sequence[int]) -> Formula:
    """Evaluate every coefficient polynomial at `values`; returns a ground formula.

    A divisibility atom whose modulus evaluates to 0 becomes an equation,
    since 0 | e holds exactly when e = 0.
    """
    values = tuple(int(v) for v in values)
    if len(values) != len(f.params):
        raise UsageError(f"expected {len(f.params)} parameter values, got {len(values)}")

    def ev(c):
        return c.eval(values) if isinstance(c, IntPoly) else int(c)

    def on_atom(a):
        t = a.term.map_coeffs(ev)
        if isinstance(a, Dvd):
            m = ev(a.modulus)
            return Eq(t) if m == 0 else Dvd(m, t)
        return type(a)(t)

    return Formula((), f.free, map_atoms(f.body, on_atom))


# -- negation normal form ------------------------------------------------------


def negate_le(a: Le) -> Le:
    """not (t <= 0)  <=>  -t + 1 <= 0 over the integers."""
    return Le((-a.term).add_const(1))


def nnf(n: Node, negate: bool = False) -> Node:
    """Negation normal form; negations survive only on Eq and Dvd atoms."""
    if isinstance(n, Top):
        return FALSE if negate else TRUE
    if isinstance(n, Bot):
        return TRUE if negate else FALSE
    if isinstance(n, Le):
        return negate_le(n) if negate else n
    if isinstance(n, (Eq, Dvd)):
        return Not(n) if negate else n
    if isinstance(n, Not):
        return nnf(n.arg, not negate)
    if isinstance(n, And):
        parts = [nnf(a, negate) for a in n.args]
        return disj(parts) if negate else conj(parts)
    if isinstance(n, Or):
        parts = [nnf(a, negate) for a in n.args]
        return conj(parts) if negate else disj(parts)
    if isinstance(n, Exists):
        body = nnf(n.body, negate)
        return ForAll(n.var, body) if negate else Exists(n.var, body)
    if isinstance(n, ForAll):
        body = nnf(n.body, negate)
        return Exists(n.var, body) if negate else ForAll(n.var, body)
    raise TypeError(n)


# -- prenex form ---------------------------------------------------------------

_TRAILING_DIGITS = re.compile(r"^(.*?)(\d*)$")


class _Fresh:
    """Deterministic fresh names: the base name plus the next free counter."""

    def __init__(self, used: Iterable[str]):
        self.used = set(used)

    def __call__(self, name: str) -> str:
        if name not in self.used:
            self.used.add(name)
            return name
        base = _TRAILING_DIGITS.match(name).group(1) or name
        for i in itertools.count(1):
            cand = f"{base}{i}"
            if cand not in self.used:
                self.used.add(cand)
                return cand
        raise AssertionError


def _merge_prefixes(a: list, b: list) -> list:
    """Interleave two quantifier prefixes keeping each one's internal order,
    minimizing the number of alternation blocks."""

    def blocks(p):
        out = []
        for q, v in p:
            if out and out[-1][0] == q:
                out[-1][1].append(v)
            else:
                out.append((q, [v]))
        return out

    ba, bb = blocks(a), blocks(b)
    # shortest common supersequence over block types
    na, nb = len(ba), len(bb)
    best = [[0] * (nb + 1) for _ in range(na + 1)]
    for i in range(na, -1, -1):
        for j in range(nb, -1, -1):
            if i == na:
                best[i][j] = nb - j
            elif j == nb:
                best[i][j] = na - i
            elif ba[i][0] == bb[j][0]:
                best[i][j] = 1 + best[i + 1][j + 1]
            else:
                best[i][j] = 1 + min(best[i + 1][j], best[i][j + 1])
    out = []
    i = j = 0
    while i < na or j < nb:
        if i < na and j < nb and ba[i][0] == bb[j][0]:
            out += [(ba[i][0], v) for v in ba[i][1]] + [(bb[j][0], v) for v in bb[j][1]]
            i += 1
            j += 1
        elif j == nb or (i < na and best[i + 1][j] <= best[i][j + 1]):
            out += [(ba[i][0], v) for v in ba[i][1]]
            i += 1
        else:
            out += [(bb[j][0], v) for v in bb[j][1]]
            j += 1
    return out


def _prenex(n: Node, fresh: _Fresh, renaming: dict) -> tuple[list, Node]:
    if isinstance(n, ATOMS):
        t = n.term.rename(renaming)
        return [], (Dvd(n.modulus, t) if isinstance(n, Dvd) else type(n)(t))
    if isinstance(n, (Top, Bot)):
        return [], n
    if isinstance(n, Not):
        prefix, body = _prenex(n.arg, fresh, renaming)
        assert not prefix, "prenex expects negation normal form"
        return [], Not(body)
    if isinstance(n, QUANTIFIERS):
        new = fresh(n.var)
        inner = dict(renaming)
        inner[n.var] = new
        prefix, body = _prenex(n.body, fresh, inner)
        q = "E" if isinstance(n, Exists) else "A"
        return [(q, new)] + prefix, body
    prefix: list = []
    parts = []
    for a in n.args:
        p, b = _prenex(a, fresh, renaming)
        prefix = _merge_prefixes(prefix, p)
        parts.append(b)
    return prefix, (conj(parts) if isinstance(n, And) else disj(parts))


def prenex_parts(n: Node, reserved: Iterable[str] = ()) -> tuple[list, Node]:
    """Return (prefix, matrix) of the prenex negation normal form."""
    n = nnf(n)
    fresh = _Fresh(set(reserved) | free_vars(n))
    return _prenex(n, fresh, {})


def build_prefix(prefix: list, matrix: Node) -> Node:
    for q, v in reversed(prefix):
        matrix = Exists(v, matrix) if q == "E" else ForAll(v, matrix)
    return matrix


def to_prenex_nnf(f):
    """Prenex form with a negation-normal matrix. Accepts a Formula or a Node."""
    if isinstance(f, Formula):
        prefix, matrix = prenex_parts(f.body, reserved=set(f.params) | set(f.free))
        return f.with_body(build_prefix(prefix, matrix))
    prefix, matrix = prenex_parts(f)
    return build_prefix(prefix, matrix)


def split_prefix(n: Node) -> tuple[list, Node]:
    """Peel the leading quantifiers off a node (no normalization)."""
    prefix = []
    while isinstance(n, QUANTIFIERS):
        prefix.append(("E" if isinstance(n, Exists) else "A", n.var))
        n = n.body
    return prefix, n


# -- disjunctive normal form -----------------------------------------------------


def dnf_clauses(n: Node) -> list[list[Node]]:
    """Clauses (lists of literals) of a quantifier-free node's DNF.

    Literals are atoms or negated Eq/Dvd atoms.  Trivially false clauses are
    dropped; an empty clause means true.
    """
    if not is_quantifier_free(n):
        raise UsageError("to_dnf needs a quantifier-free formula")
    return _dnf(nnf(n))


def _dnf(n: Node) -> list[list[Node]]:
    if isinstance(n, Top):
        return [[]]
    if isinstance(n, Bot):
        return []
    if isinstance(n, ATOMS) or isinstance(n, Not):
        return [[n]]
    if isinstance(n, Or):
        out = []
        for a in n.args:
            out.extend(_dnf(a))
        return out
    if isinstance(n, And):
        result = [[]]
        for a in n.args:
            sub = _dnf(a)
            result = [c1 + c2 for c1 in result for c2 in sub]
            if not result:
                return []
        return result
    raise TypeError(n)


def clauses_to_node(clauses: list[list[Node]]) -> Node:
    return disj([conj(c) for c in clauses])


def to_dnf(f):
    if isinstance(f, Formula):
        return f.with_body(clauses_to_node(dnf_clauses(f.body)))
    return clauses_to_node(dnf_clauses(f))


# -- quantifier alternation ------------------------------------------------------


@dataclass(frozen=True)
class Alternation:
    kind: str  # "Sigma", "Pi" or "QF"
    level: int

    def __str__(self):
        if self.kind == "QF":
            return "quantifier-free"
        return ("Σ" if self.kind == "Sigma" else "Π") + str(self.level)


def classify_alternation(f) -> Alternation:
    body = f.body if isinstance(f, Formula) else f
    prefix, _ = prenex_parts(body)
    if not prefix:
        return Alternation("QF", 0)
    level = 1
    for (q1, _), (q2, _) in zip(prefix, prefix[1:]):
        if q1 != q2:
            level += 1
    return Alternation("Sigma" if prefix[0][0] == "E" else "Pi", level)
