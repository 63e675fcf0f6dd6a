"""Concrete syntax: tokenizer, recursive-descent parser and canonical printer.

File format::

    # comment
    params t1 t2
    vars x
    formula: x >= 0 and t1*x <= t2

Without a header, identifiers named ``t`` or ``t<digits>`` are parameters and
every other unbound identifier is a free variable, in order of appearance.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .errors import ParseError, SortError
from .formula import (
    ATOMS, And, Bot, Dvd, Eq, Exists, ForAll, Formula, Le, LinTerm, Node, Not, Or,
    QUANTIFIERS, Top,
)
from .poly import IntPoly

KEYWORDS = {"and", "or", "not", "exists", "forall", "true", "false"}
_PARAM_NAME = re.compile(r"^t\d*$")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|!=|<|>|=|\||\+|-|\*|\^|\(|\)|\.|:)
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, tokens, params, free, infer, unordered=False):
        self.unordered = unordered
        self.toks = tokens
        self.i = 0
        self.params = list(params)
        self.free = list(free)
        self.infer = infer
        self.scope: list[str] = []
        self.arity = len(self.params)

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None, cls=ParseError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col)

    def accept(self, text) -> Token | None:
        if self.tok.text == text and self.tok.kind in ("op", "id"):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text) -> Token:
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return t

    # sorts

    def poly_const(self, c: int) -> IntPoly:
        return IntPoly.const(self.arity, c)

    def resolve(self, tok: Token) -> LinTerm:
        name = tok.text
        if name in KEYWORDS:
            raise self.error(f"unexpected keyword {name!r}", tok)
        zero = self.poly_const(0)
        if name in self.scope or name in self.free:
            return LinTerm(((name, self.poly_const(1)),), zero)
        if name in self.params:
            return LinTerm((), IntPoly.var(self.arity, self.params.index(name)))
        if self.infer:
            if _PARAM_NAME.match(name):
                raise _NewParam(name)
            self.free.append(name)
            return LinTerm(((name, self.poly_const(1)),), zero)
        raise self.error(f"undeclared identifier {name!r}", tok)

    # formulas

    def formula(self) -> Node:
        if self.tok.text in ("exists", "forall") and self.tok.kind == "id":
            return self.quantified()
        return self.disjunction()

    def quantified(self) -> Node:
        qtok = self.tok
        self.i += 1
        names = []
        while self.tok.kind == "id" and self.tok.text not in KEYWORDS:
            t = self.tok
            name = t.text
            if name in self.params or (self.infer and _PARAM_NAME.match(name)):
                raise self.error(f"parameter {name!r} cannot be quantified", t, SortError)
            if name in self.scope or name in self.free or name in names:
                raise self.error(f"variable {name!r} is already bound or free", t, SortError)
            names.append(name)
            self.i += 1
        if not names:
            raise self.error("expected a variable after quantifier")
        self.expect(".")
        self.scope.extend(names)
        body = self.formula()
        del self.scope[-len(names):]
        cls = Exists if qtok.text == "exists" else ForAll
        for name in reversed(names):
            body = cls(name, body)
        return body

    def disjunction(self) -> Node:
        parts = [self.conjunction()]
        while self.accept("or"):
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Node:
        parts = [self.negation()]
        while self.accept("and"):
            parts.append(self.negation())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def negation(self) -> Node:
        if self.accept("not"):
            return Not(self.negation())
        return self.primary()

    def primary(self) -> Node:
        tok = self.tok
        if tok.kind == "id" and tok.text in ("exists", "forall"):
            return self.quantified()
        if self.accept("true"):
            return Top()
        if self.accept("false"):
            return Bot()
        if tok.text == "(":
            # either a parenthesized formula or an atom whose left side starts with '('
            save = self.i
            try:
                return self.atom()
            except _NewParam:
                raise
            except ParseError as e:
                if isinstance(e, SortError):
                    raise
                self.i = save
            self.expect("(")
            inner = self.formula()
            self.expect(")")
            return inner
        return self.atom()

    def atom(self) -> Node:
        lhs_tok = self.tok
        lhs = self.expr()
        op = self.tok
        if op.text == "|" and op.kind == "op":
            self.i += 1
            if lhs.coeffs:
                raise self.error("divisibility modulus must not contain variables", lhs_tok, SortError)
            rhs = self.expr()
            if lhs.const.is_zero():
                return Eq(rhs)
            return Dvd(lhs.const, rhs)
        if op.text not in ("<=", ">=", "<", ">", "=", "!=") or op.kind != "op":
            raise self.error(f"expected a comparison, found {op.text or 'end of input'!r}")
        if self.unordered and op.text in ("<=", ">=", "<", ">"):
            raise self.error(f"order comparison {op.text!r} is not allowed in unordered mode")
        self.i += 1
        rhs = self.expr()
        one = self.poly_const(1)
        if op.text == "<=":
            return Le(lhs - rhs)
        if op.text == ">=":
            return Le(rhs - lhs)
        if op.text == "<":
            return Le((lhs - rhs).add_const(one))
        if op.text == ">":
            return Le((rhs - lhs).add_const(one))
        if op.text == "=":
            return Eq(lhs - rhs)
        return Not(Eq(lhs - rhs))

    # expressions

    def expr(self) -> LinTerm:
        t = self.term()
        while True:
            if self.accept("+"):
                t = t + self.term()
            elif self.accept("-"):
                t = t - self.term()
            else:
                return t

    def term(self) -> LinTerm:
        t = self.unary()
        while True:
            tok = self.tok
            if not self.accept("*"):
                return t
            rhs = self.unary()
            if t.coeffs and rhs.coeffs:
                raise self.error("product of two group variables is not allowed", tok, SortError)
            if t.coeffs:
                t = t.scale(rhs.const)
            else:
                t = rhs.scale(t.const)

    def unary(self) -> LinTerm:
        if self.accept("-"):
            return -self.unary()
        return self.power()

    def power(self) -> LinTerm:
        base = self.base()
        tok = self.tok
        if self.accept("^"):
            exp_tok = self.tok
            if exp_tok.kind != "int":
                raise self.error("exponent must be a nonnegative integer literal", exp_tok)
            self.i += 1
            if base.coeffs:
                raise self.error("cannot raise a group variable to a power", tok, SortError)
            return LinTerm((), base.const ** int(exp_tok.text))
        return base

    def base(self) -> LinTerm:
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return LinTerm((), self.poly_const(int(tok.text)))
        if tok.kind == "id" and tok.text not in KEYWORDS:
            self.i += 1
            return self.resolve(tok)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        raise self.error(f"unexpected {tok.text or 'end of input'!r} in expression")


class _NewParam(Exception):
    def __init__(self, name):
        self.name = name


def _split_header(text: str):
    """Return (params, vars, body_text, body_line_offset) or None without a header."""
    lines = text.split("\n")
    params = free = None
    for idx, raw in enumerate(lines):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word = line.split()[0]
        if word == "params":
            params = line.split()[1:]
        elif word == "vars":
            free = line.split()[1:]
        elif line.startswith("formula:") or word == "formula" or word.startswith("formula:"):
            head, _, rest = raw.partition(":")
            body = "\n" * idx + " " * (len(head) + 1) + rest + "\n" + "\n".join(lines[idx + 1:])
            return params or [], free or [], body
        else:
            if params is None and free is None:
                return None
            raise ParseError(f"unexpected header line {line!r}", idx + 1, 1)
    if params is None and free is None:
        return None
    raise ParseError("missing 'formula:' section")


def _check_names(names, what):
    for n in names:
        if n in KEYWORDS or not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", n):
            raise ParseError(f"invalid {what} name {n!r}")
    if len(set(names)) != len(names):
        raise ParseError(f"duplicate {what} names")


def parse(text: str, params: Sequence[str] | None = None, free: Sequence[str] | None = None,
          unordered: bool = False) -> Formula:
    """Parse formula text (with or without a header) into a `Formula`.

    With `unordered`, the order comparisons <=, <, >=, > are rejected.
    """
    header = _split_header(text)
    if header is not None:
        hp, hf, text = header
        params = hp if params is None else params
        free = hf if free is None else free
    infer = params is None and free is None
    params = list(params or [])
    free = list(free or [])
    _check_names(params, "parameter")
    _check_names(free, "variable")
    if set(params) & set(free):
        raise SortError("a name is declared both as parameter and variable")
    tokens = tokenize(text)
    while True:
        p = _Parser(tokens, params, free, infer, unordered)
        try:
            body = p.formula()
        except _NewParam as e:
            params = sorted(set(params) | {e.name}, key=_param_sort_key)
            free = list(free) if not infer else []
            continue
        if p.tok.kind != "eof":
            raise p.error(f"unexpected {p.tok.text!r} after formula")
        return Formula(tuple(params), tuple(p.free), body)


def _param_sort_key(name):
    digits = name[1:]
    return (len(digits) > 0, int(digits) if digits else 0, name)


def parse_expression(text: str, params: Sequence[str], variables: Sequence[str]) -> LinTerm:
    p = _Parser(tokenize(text), params, variables, infer=False)
    t = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after expression")
    return t


# -- printing ------------------------------------------------------------------


def _sign(c) -> int:
    if isinstance(c, IntPoly):
        lc = c.leading_coefficient()
    else:
        lc = c
    return (lc > 0) - (lc < 0)


def _coef_text(c, names) -> str:
    """Text of a coefficient known to have positive sign, as a factor."""
    if isinstance(c, IntPoly):
        text = c.render(names)
        return text if c.is_atomic_text() else f"({text})"
    return str(c)


def _is_one(c) -> bool:
    return c == 1


def _linear_text(coeffs, const, names) -> str:
    pieces: list[tuple[int, str]] = []
    for v, c in coeffs:
        s = _sign(c)
        mag = -c if s < 0 else c
        pieces.append((s, v if _is_one(mag) else f"{_coef_text(mag, names)}*{v}"))
    if not (const == 0) or not pieces:
        s = _sign(const)
        mag = -const if s < 0 else const
        pieces.append((s, _coef_text(mag, names) if s else "0"))
    out = ("-" if pieces[0][0] < 0 else "") + pieces[0][1]
    for s, text in pieces[1:]:
        out += (" - " if s < 0 else " + ") + text
    return out


def _value_text(c, names) -> str:
    return c.render(names) if isinstance(c, IntPoly) else str(c)


def _relation_text(term: LinTerm, op: str, names) -> str:
    """Write `term op 0` with variables on the left, leading coefficient positive."""
    coeffs, const = term.coeffs, term.const
    if coeffs and _sign(coeffs[0][1]) < 0:
        lhs = _linear_text(tuple((v, -c) for v, c in coeffs), 0 * const, names)
        rhs = _value_text(const, names)
        op = {"<=": ">=", "=": "="}[op]
    else:
        lhs = _linear_text(coeffs, 0 * const, names) if coeffs else _linear_text((), const, names)
        rhs = _value_text(-const, names) if coeffs else "0"
    return f"{lhs} {op} {rhs}"


def _atom_text(a: Node, names) -> str:
    if isinstance(a, Le):
        return _relation_text(a.term, "<=", names)
    if isinstance(a, Eq):
        return _relation_text(a.term, "=", names)
    m = a.modulus
    if isinstance(m, IntPoly):
        mtext = m.render(names)
        if not m.is_atomic_text():
            mtext = f"({mtext})"
    else:
        mtext = str(m) if m > 0 else f"({m})"
    return f"{mtext} | {_linear_text(a.term.coeffs, a.term.const, names)}"


def render_node(n: Node, names: Sequence[str] = ()) -> str:
    if isinstance(n, Top):
        return "true"
    if isinstance(n, Bot):
        return "false"
    if isinstance(n, ATOMS):
        return _atom_text(n, names)
    if isinstance(n, Not):
        if isinstance(n.arg, Eq):
            return _relation_text(n.arg.term, "=", names).replace(" = ", " != ", 1)
        inner = render_node(n.arg, names)
        if isinstance(n.arg, (And, Or) + QUANTIFIERS):
            inner = f"({inner})"
        return f"not {inner}"
    if isinstance(n, QUANTIFIERS):
        q = "exists" if isinstance(n, Exists) else "forall"
        return f"{q} {n.var} . {render_node(n.body, names)}"
    if isinstance(n, And):
        parts = []
        for a in n.args:
            t = render_node(a, names)
            if isinstance(a, (And, Or) + QUANTIFIERS):
                t = f"({t})"
            parts.append(t)
        return " and ".join(parts)
    if isinstance(n, Or):
        parts = []
        for a in n.args:
            t = render_node(a, names)
            if isinstance(a, (Or,) + QUANTIFIERS):
                t = f"({t})"
            parts.append(t)
        return " or ".join(parts)
    raise TypeError(n)


def render(f) -> str:
    """Canonical text of a formula body (a `Formula` or a bare node)."""
    if isinstance(f, Formula):
        return render_node(f.body, f.params)
    return render_node(f)


def render_file(f: Formula) -> str:
    lines = []
    if f.params:
        lines.append("params " + " ".join(f.params))
    lines.append("vars " + " ".join(f.free) if f.free else "vars")
    lines.append("formula: " + render(f))
    return "\n".join(lines) + "\n"
