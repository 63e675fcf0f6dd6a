"""Multivariate polynomials over the integers, in parameters t1..tk.

Values are immutable and canonical: zero coefficients are never stored, so two
polynomials are equal exactly when their term mappings are equal.
"""
from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .errors import UsageError

Exponent = tuple[int, ...]


def _grlex_key(exp: Exponent):
    return (sum(exp), exp)


class IntPoly:
    __slots__ = ("arity", "_terms", "_hash")

    def __init__(self, arity: int, terms: Mapping[Exponent, int] | Iterable = ()):
        if arity < 0:
            raise UsageError("arity must be nonnegative")
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[Exponent, int] = {}
        for exp, c in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != arity or any(e < 0 for e in exp):
                raise UsageError(f"bad exponent {exp} for arity {arity}")
            c = int(c)
            if c:
                c += clean.get(exp, 0)
                if c:
                    clean[exp] = c
                else:
                    clean.pop(exp, None)
        self.arity = arity
        self._terms = clean
        self._hash = None

    # constructors

    @classmethod
    def const(cls, arity: int, c: int) -> IntPoly:
        return cls(arity, {(0,) * arity: c})

    @classmethod
    def zero(cls, arity: int) -> IntPoly:
        return cls(arity, {})

    @classmethod
    def var(cls, arity: int, i: int) -> IntPoly:
        if not 0 <= i < arity:
            raise UsageError(f"parameter index {i} out of range for arity {arity}")
        exp = [0] * arity
        exp[i] = 1
        return cls(arity, {tuple(exp): 1})

    # inspection

    @property
    def terms(self) -> dict[Exponent, int]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_value(self) -> int:
        """The integer value of a constant polynomial."""
        if not self.is_constant():
            raise UsageError("polynomial is not constant")
        return self._terms.get((0,) * self.arity, 0)

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def sorted_terms(self) -> list[tuple[Exponent, int]]:
        """Terms in descending graded-lexicographic order."""
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def leading_coefficient(self) -> int:
        st = self.sorted_terms()
        return st[0][1] if st else 0

    def coefficients(self) -> list[int]:
        return list(self._terms.values())

    # arithmetic

    def _check(self, other: IntPoly):
        if self.arity != other.arity:
            raise UsageError(f"arity mismatch: {self.arity} vs {other.arity}")

    def _coerce(self, other) -> IntPoly:
        if isinstance(other, IntPoly):
            self._check(other)
            return other
        if isinstance(other, int):
            return IntPoly.const(self.arity, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return IntPoly(self.arity, out)

    __radd__ = __add__

    def __neg__(self):
        return IntPoly(self.arity, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exponent, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return IntPoly(self.arity, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise UsageError("exponent must be a nonnegative integer")
        result = IntPoly.const(self.arity, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, point: Sequence[int]) -> int:
        return self.eval(point)

    def eval(self, point: Sequence[int]) -> int:
        if len(point) != self.arity:
            raise UsageError(f"expected {self.arity} parameter values, got {len(point)}")
        total = 0
        for exp, c in self._terms.items():
            v = c
            for a, e in zip(point, exp):
                if e:
                    v *= a ** e
            total += v
        return total

    # equality / hashing

    def __eq__(self, other):
        if isinstance(other, int):
            return self.is_constant() and self.constant_value() == other
        if not isinstance(other, IntPoly):
            return NotImplemented
        return self.arity == other.arity and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.arity, frozenset(self._terms.items())))
        return self._hash

    def sign_normalized(self) -> tuple[int, IntPoly]:
        """Return (sign, p) with p having a positive leading coefficient."""
        if self.leading_coefficient() < 0:
            return -1, -self
        return 1, self

    # text

    def render(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"t{i + 1}" for i in range(self.arity)]
        if not self._terms:
            return "0"
        parts = []
        for exp, c in self.sorted_terms():
            mono = []
            for name, e in zip(names, exp):
                if e == 1:
                    mono.append(name)
                elif e > 1:
                    mono.append(f"{name}^{e}")
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = "*".join(mono)
            else:
                body = f"{a}*" + "*".join(mono)
            parts.append(("-" if c < 0 else "+", body))
        sign, first = parts[0]
        out = ("-" if sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def is_atomic_text(self) -> bool:
        """True when the rendering needs no parentheses as a factor."""
        if len(self._terms) != 1:
            return False
        (_, c), = self._terms.items()
        return c > 0

    def __repr__(self):
        return f"IntPoly({self.render()!r})"

    def __str__(self):
        return self.render()


def poly_arith(a: IntPoly, b: IntPoly | None, op: str) -> IntPoly:
    if op == "neg":
        return -a
    if b is None:
        raise UsageError(f"operation {op!r} needs two operands")
    a._check(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise UsageError(f"unknown operation {op!r}")


def poly_eval(p: IntPoly, point: Sequence[int]) -> int:
    return p.eval(point)


def parse_poly(text: str, names: Sequence[str]) -> IntPoly:
    """Parse polynomial text over the given parameter names."""
    from .parser import parse_expression

    term = parse_expression(text, params=list(names), variables=[])
    return term.const
