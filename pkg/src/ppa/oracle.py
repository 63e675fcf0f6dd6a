"""Reference semantics for ground formulas over explicit finite boxes.

Quantifiers range over the box interval of their variable.  The search is
exhaustive but prunes with interval propagation: inside an existential block
the top-level conjuncts of the body narrow each variable's range before it is
enumerated, and the block's variables are chosen smallest-range first.
Pruning only skips values where some conjunct is already false, so the answer
is the exact box-relativized truth value.  Universal blocks are evaluated as
the negation of an existential block over the negated body.
"""
from __future__ import annotations

import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Mapping, Sequence

from .errors import ResourceLimit, UsageError
from .formula import (
    And, Bot, Dvd, Eq, Exists, ForAll, Formula, Le, Node, Not, Or, Top,
    bound_vars, free_vars, nnf,
)
from .poly import IntPoly

DEFAULT_BUDGET = 10**8


@dataclass(frozen=True)
class Box:
    """Closed integer intervals per variable, with an optional default."""

    bounds: Mapping[str, tuple[int, int]] = field(default_factory=dict)
    default: tuple[int, int] | None = None

    def __post_init__(self):
        clean = {}
        for v, (lo, hi) in dict(self.bounds).items():
            lo, hi = int(lo), int(hi)
            if lo > hi:
                raise UsageError(f"empty interval for {v}: [{lo}, {hi}]")
            clean[v] = (lo, hi)
        object.__setattr__(self, "bounds", clean)
        if self.default is not None:
            lo, hi = self.default
            if lo > hi:
                raise UsageError(f"empty default interval [{lo}, {hi}]")
            object.__setattr__(self, "default", (int(lo), int(hi)))

    def interval(self, v: str) -> tuple[int, int]:
        if v in self.bounds:
            return self.bounds[v]
        if self.default is not None:
            return self.default
        raise UsageError(f"box does not cover variable {v!r}")

    def covers(self, v: str) -> bool:
        return v in self.bounds or self.default is not None

    def merged(self, other: Box) -> Box:
        bounds = dict(other.bounds)
        bounds.update(self.bounds)
        return Box(bounds, self.default if self.default is not None else other.default)

    @staticmethod
    def uniform(lo: int, hi: int) -> Box:
        return Box({}, (lo, hi))


_RANGE = re.compile(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")


def parse_box(text: str) -> Box:
    """`0..30` (every variable) or `x=0..5,y=-2..2` (per variable)."""
    m = _RANGE.match(text)
    if m:
        return Box.uniform(int(m.group(1)), int(m.group(2)))
    bounds = {}
    for part in text.split(","):
        name, sep, rng = part.partition("=")
        m = _RANGE.match(rng)
        if not sep or not m:
            raise UsageError(f"bad box entry {part!r}; expected name=lo..hi")
        bounds[name.strip()] = (int(m.group(1)), int(m.group(2)))
    return Box(bounds)


def as_box(spec) -> Box:
    if isinstance(spec, Box):
        return spec
    if spec is None:
        return Box()
    if isinstance(spec, str):
        return parse_box(spec)
    if isinstance(spec, tuple) and len(spec) == 2 and all(isinstance(x, int) for x in spec):
        return Box.uniform(*spec)
    if isinstance(spec, Mapping):
        return Box(spec)
    raise UsageError(f"cannot interpret {spec!r} as a box")


# -- compiled evaluation tree ---------------------------------------------------


class _Atom:
    __slots__ = ("kind", "negated", "coeffs", "const", "mod", "vars")

    def __init__(self, kind, negated, coeffs, const, mod=None):
        self.kind = kind
        self.negated = negated
        self.coeffs = coeffs
        self.const = const
        self.mod = mod
        self.vars = frozenset(v for v, _ in coeffs)

    @property
    def key(self):
        return (self.kind, self.negated, self.coeffs, self.const, self.mod)


class _Const:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


class _And:
    __slots__ = ("children", "cons")

    def __init__(self, children):
        self.children = children
        cons = []
        for c in children:
            cons.extend(_top_cons(c))
        self.cons = cons


class _Or:
    __slots__ = ("children", "cons")

    def __init__(self, children):
        self.children = children
        # atoms shared by every disjunct constrain the whole disjunction
        common = None
        for c in children:
            keyed = {a.key: a for a in _top_cons(c)}
            common = keyed if common is None else {k: a for k, a in common.items() if k in keyed}
            if not common:
                break
        self.cons = list(common.values()) if common else []


def _top_cons(n) -> list:
    if isinstance(n, _Atom):
        return [] if n.negated else [n]
    if isinstance(n, (_And, _Or)):
        return n.cons
    return []


class _Block:
    """Existential block over `vars`; a universal block stores the negated body."""

    __slots__ = ("universal", "vars", "body", "cons")

    def __init__(self, universal, vars_, body):
        self.universal = universal
        self.vars = vars_
        self.body = body
        self.cons = _top_cons(body)


def _ground_int(c) -> int:
    if isinstance(c, IntPoly):
        if c.arity:
            raise UsageError("formula still has parameters; substitute values first")
        return c.constant_value()
    return int(c)


def _compile(n: Node):
    if isinstance(n, Top):
        return _Const(True)
    if isinstance(n, Bot):
        return _Const(False)
    if isinstance(n, (Le, Eq, Dvd)) or (isinstance(n, Not) and isinstance(n.arg, (Eq, Dvd))):
        negated = isinstance(n, Not)
        a = n.arg if negated else n
        coeffs = tuple((v, _ground_int(c)) for v, c in a.term.coeffs)
        const = _ground_int(a.term.const)
        if isinstance(a, Le):
            return _Atom("le", negated, coeffs, const)
        if isinstance(a, Eq):
            return _Atom("eq", negated, coeffs, const)
        m = abs(_ground_int(a.modulus))
        return _Atom("dvd", negated, coeffs, const, m)
    if isinstance(n, And):
        return _And([_compile(a) for a in n.args])
    if isinstance(n, Or):
        return _Or([_compile(a) for a in n.args])
    if isinstance(n, Exists):
        vars_ = []
        while isinstance(n, Exists):
            vars_.append(n.var)
            n = n.body
        return _Block(False, tuple(vars_), _compile(n))
    if isinstance(n, ForAll):
        vars_ = []
        while isinstance(n, ForAll):
            vars_.append(n.var)
            n = n.body
        return _Block(True, tuple(vars_), _compile(nnf(n, negate=True)))
    raise TypeError(f"unexpected node {n!r}")


def _floordiv(a, b):
    return a // b


def _ceildiv(a, b):
    return -((-a) // b)


class _Engine:
    def __init__(self, box: Box, budget: int):
        self.box = box
        self.budget = budget
        self.used = 0

    def tick(self, k=1):
        self.used += k
        if self.used > self.budget:
            raise ResourceLimit(f"node budget of {self.budget} atom evaluations exceeded")

    # evaluation

    def atom_value(self, a: _Atom, env) -> bool:
        self.tick()
        val = a.const
        for v, c in a.coeffs:
            val += c * env[v]
        if a.kind == "le":
            return val <= 0
        if a.kind == "eq":
            res = val == 0
        else:
            res = val % a.mod == 0
        return not res if a.negated else res

    def ev(self, n, env) -> bool:
        if isinstance(n, _Atom):
            return self.atom_value(n, env)
        if isinstance(n, _And):
            return all(self.ev(c, env) for c in n.children)
        if isinstance(n, _Or):
            return any(self.ev(c, env) for c in n.children)
        if isinstance(n, _Block):
            doms = {v: self.box.interval(v) for v in n.vars}
            found = self.search(n.vars, n.body, n.cons, env, doms, count=False)
            return (not found) if n.universal else bool(found)
        if isinstance(n, _Const):
            return n.value
        raise TypeError(n)

    # propagation

    def propagate(self, cons, env, doms) -> bool:
        """Narrow `doms` in place; False if some constraint is unsatisfiable."""
        for _ in range(len(doms) + 3):
            changed = False
            for a in cons:
                self.tick()
                known = a.const
                unknown = []
                for v, c in a.coeffs:
                    if v in doms:
                        unknown.append((v, c))
                    else:
                        known += c * env[v]
                if a.kind == "dvd":
                    if not unknown:
                        if known % a.mod:
                            return False
                    elif len(unknown) == 1:
                        res = self._snap_dvd(unknown[0], known, a.mod, doms)
                        if res is None:
                            return False
                        changed |= res
                    continue
                sides = ((1,), (1, -1))[a.kind == "eq"]
                for sign in sides:
                    res = self._narrow_le(unknown, sign * known, sign, doms)
                    if res is None:
                        return False
                    changed |= res
            if not changed:
                return True
        return True

    @staticmethod
    def _narrow_le(unknown, known, sign, doms):
        """sign * sum(c*v) + known <= 0."""
        if not unknown:
            return None if known > 0 else False
        mins = []
        total_min = known
        for v, c in unknown:
            c *= sign
            lo, hi = doms[v]
            m = c * lo if c > 0 else c * hi
            mins.append(m)
            total_min += m
        if total_min > 0:
            return None
        changed = False
        for (v, c), m in zip(unknown, mins):
            c *= sign
            slack = -(total_min - m)  # c*v <= slack
            lo, hi = doms[v]
            if c > 0:
                nh = _floordiv(slack, c)
                if nh < hi:
                    if nh < lo:
                        return None
                    doms[v] = (lo, nh)
                    changed = True
            else:
                nl = _ceildiv(-slack, -c)
                if nl > lo:
                    if nl > hi:
                        return None
                    doms[v] = (nl, hi)
                    changed = True
        return changed

    @staticmethod
    def _snap_dvd(unknown, known, mod, doms):
        v, c = unknown
        g = gcd(c, mod)
        if known % g:
            return None
        step = mod // g
        c1, k1 = (c // g) % step, (-known // g) % step
        target = (k1 * pow(c1, -1, step)) % step if step > 1 else 0
        lo, hi = doms[v]
        nl = lo + (target - lo) % step
        nh = hi - (hi - target) % step
        if nl > nh:
            return None
        if (nl, nh) != (lo, hi):
            doms[v] = (nl, nh)
            return True
        return False

    # search

    def search(self, vars_, body, cons, env, doms, count, collect=None):
        """Existential search (count=False) or model counting (count=True)."""
        doms = dict(doms)
        if not self.propagate(cons, env, doms):
            return 0
        pending = [v for v in vars_ if v in doms]
        if not pending:
            ok = self.ev(body, env)
            if ok and collect is not None:
                collect.append(dict(env))
            return 1 if ok else 0
        # all fixed variables are assigned first, then the smallest range
        best = min(pending, key=lambda v: doms[v][1] - doms[v][0])
        lo, hi = doms.pop(best)
        rest = [v for v in pending if v != best]
        total = 0
        for val in range(lo, hi + 1):
            env[best] = val
            if not rest:
                ok = self.ev(body, env)
                r = 1 if ok else 0
                if ok and collect is not None:
                    collect.append(dict(env))
            else:
                r = self.search(rest, body, cons, env, doms, count, collect)
            if r:
                if not count:
                    del env[best]
                    return 1
                total += r
        del env[best]
        return total


# -- public API ----------------------------------------------------------------


def _ground_body(f) -> tuple[Node, tuple]:
    if isinstance(f, Formula):
        if f.params:
            raise UsageError("formula has parameters; use substitute_params first")
        return f.body, f.free
    return f, tuple(sorted(free_vars(f)))


def _check_cover(box: Box, names: Iterable[str]):
    for v in names:
        if not box.covers(v):
            raise UsageError(f"box does not cover variable {v!r}")


def _point_env(free, point) -> dict:
    if isinstance(point, Mapping):
        env = {v: int(point[v]) for v in point}
    else:
        point = tuple(point)
        if len(point) != len(free):
            raise UsageError(f"expected {len(free)} coordinates, got {len(point)}")
        env = dict(zip(free, (int(x) for x in point)))
    missing = [v for v in free if v not in env]
    if missing:
        raise UsageError(f"assignment misses variables {missing}")
    return env


def eval_qf(f, point) -> bool:
    """Truth value of a quantifier-free ground formula at a point."""
    body, free = _ground_body(f)
    if bound_vars(body):
        raise UsageError("eval_qf needs a quantifier-free formula")
    env = _point_env(free, point)
    return _Engine(Box(), DEFAULT_BUDGET).ev(_compile(nnf(body)), env)


def decide_bounded(f, box, point=None, budget: int = DEFAULT_BUDGET) -> bool:
    """Truth of the box-relativized formula; free variables are existential
    unless `point` assigns them."""
    body, free = _ground_body(f)
    box = as_box(box)
    _check_cover(box, bound_vars(body))
    eng = _Engine(box, budget)
    c = _compile(nnf(body))
    if point is not None:
        return eng.ev(c, _point_env(free, point))
    _check_cover(box, free)
    if not free:
        return eng.ev(c, {})
    cons = _top_cons(c)
    doms = {v: box.interval(v) for v in free}
    return bool(eng.search(tuple(free), c, cons, {}, doms, count=False))


def _count_task(args):
    body, free, box, budget, collect, split = args
    eng = _Engine(box, budget)
    c = _compile(nnf(body))
    cons = _top_cons(c)
    doms = {v: box.interval(v) for v in free}
    if split is not None:
        doms[free[0]] = split
    sink = [] if collect else None
    n = eng.search(tuple(free), c, cons, {}, doms, count=True, collect=sink)
    if collect:
        return n, [tuple(env[v] for v in free) for env in sink]
    return n, None


def _run_counting(f, free_box, quant_box, budget, jobs, collect):
    body, free = _ground_body(f)
    free_box, quant_box = as_box(free_box), as_box(quant_box)
    _check_cover(free_box, free)
    _check_cover(quant_box, bound_vars(body))
    # free variables use free_box; quantified ones quant_box
    box = Box({v: free_box.interval(v) for v in free}).merged(quant_box)
    if not free:
        ok = decide_bounded(body, box, point=(), budget=budget)
        return (1 if ok else 0), ([()] if ok and collect else [])
    tasks = [(body, free, box, budget, collect, None)]
    if jobs and jobs > 1:
        lo, hi = box.interval(free[0])
        n = hi - lo + 1
        parts = min(jobs * 4, n)
        edges = [lo + (n * i) // parts for i in range(parts + 1)]
        tasks = [(body, free, box, budget, collect, (edges[i], edges[i + 1] - 1))
                 for i in range(parts) if edges[i] <= edges[i + 1] - 1]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_count_task, tasks))
    else:
        results = [_count_task(t) for t in tasks]
    total = sum(r[0] for r in results)
    points = sorted(p for r in results for p in (r[1] or [])) if collect else None
    return total, points


def count_bounded(f, free_box, quant_box=None, budget: int = DEFAULT_BUDGET, jobs: int = 1) -> int:
    """Number of free-variable points in free_box satisfying the formula with
    quantifiers relativized to quant_box."""
    return _run_counting(f, free_box, quant_box, budget, jobs, collect=False)[0]


def enumerate_solutions(f, free_box, quant_box=None, budget: int = DEFAULT_BUDGET,
                        jobs: int = 1) -> list[tuple[int, ...]]:
    """Satisfying points in lexicographic order (coordinates in `free` order)."""
    return _run_counting(f, free_box, quant_box, budget, jobs, collect=True)[1]
