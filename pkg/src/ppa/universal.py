"""Counting reduction from a k-parametric family to a 2-parametric one.

The pipeline has three steps.
  1. `build_tilde` bounds every quantifier and windows the free variables, using
     user-supplied bound polynomials, and adds the dummy coordinate x~ that
     turns a solution in the outer shell into infinitely many.
  2. The scalar terms of that formula are packed as base-t digits of a single
     number s (`derive_eta`, `reduce`).
  3. Every product of a scalar term with a variable becomes a digit variable
     tied to the variable by Div_{s,t}.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import UsageError
from .formula import (
    FALSE, TRUE, And, Bot, Dvd, Eq, Exists, ForAll, Formula, Le, LinTerm, Node, Not, Or, Top,
    all_vars, atoms, build_prefix, classify_alternation, conj, disj, nnf, prenex_parts,
    substitute_params,
)
from .oracle import Box, count_bounded, decide_bounded
from .poly import IntPoly, parse_poly


# -- bound specification -------------------------------------------------------------


@dataclass(frozen=True)
class BoundSpec:
    """mu <= |x|_inf <= mu' is the shell, nu[i] bounds the i-th quantified variable."""

    mu: IntPoly
    mu_prime: IntPoly
    nu: tuple = ()

    @staticmethod
    def parse(mu: str, mu_prime: str, nu: Sequence[str], params: Sequence[str]) -> BoundSpec:
        return BoundSpec(parse_poly(mu, params), parse_poly(mu_prime, params),
                         tuple(parse_poly(p, params) for p in nu))

    @staticmethod
    def from_json(data, params: Sequence[str]) -> BoundSpec:
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return BoundSpec.parse(str(data["mu"]), str(data["mu_prime"]),
                                   [str(p) for p in data.get("nu", [])], params)
        except KeyError as e:
            raise UsageError(f"bound spec misses field {e}") from None

    def to_json(self, params: Sequence[str]) -> dict:
        return {"mu": self.mu.render(params), "mu_prime": self.mu_prime.render(params),
                "nu": [p.render(params) for p in self.nu]}

    def values(self, u: Sequence[int]) -> tuple[int, int, tuple]:
        mu, mup = self.mu.eval(u), self.mu_prime.eval(u)
        nus = tuple(p.eval(u) for p in self.nu)
        for name, val in [("mu", mu), ("mu_prime", mup)] + [(f"nu[{i}]", v) for i, v in enumerate(nus)]:
            if val <= 0:
                raise UsageError(f"bound polynomial {name} is {val} at u={tuple(u)}; must be positive")
        return mu, mup, nus

    def zmax(self, u: Sequence[int]) -> int:
        _, mup, nus = self.values(u)
        return max((mup,) + nus)


# -- the tilde formula -----------------------------------------------------------------


def _fresh(base: str, used: set) -> str:
    name, i = base, 0
    while name in used:
        i += 1
        name = f"{base}_{i}"
    used.add(name)
    return name


def _prenex(f: Formula):
    prefix, matrix = prenex_parts(f.body, reserved=set(f.params) | set(f.free))
    return prefix, matrix


def _one(k):
    return IntPoly.const(k, 1)


def _norm_window(free, mu_lo: IntPoly | None, mu_hi: IntPoly | None, k: int) -> Node:
    """mu_lo <= |x|_inf (when given) and |x|_inf <= mu_hi (when given)."""
    one = _one(k)
    parts = []
    if mu_hi is not None:
        for v in free:
            parts.append(Le(LinTerm(((v, one),), -mu_hi)))
            parts.append(Le(LinTerm(((v, -one),), -mu_hi)))
    if mu_lo is not None:
        if not free:
            parts.append(FALSE)  # the norm of the empty vector is 0 < mu
        else:
            parts.append(disj([d for v in free for d in (
                Le(LinTerm(((v, -one),), mu_lo)), Le(LinTerm(((v, one),), mu_lo)))]))
    return conj(parts)


def _relativize(prefix, guards, inner: Node) -> Node:
    """Guards folded into the matrix: exists -> B and chi, forall -> not B or chi."""
    chi = inner
    for (q, v), g in reversed(list(zip(prefix, guards))):
        chi = conj(g, chi) if q == "E" else disj(nnf(g, negate=True), chi)
    return chi


@dataclass(frozen=True)
class Tilde:
    formula: Formula
    dummy: str  # name of x~
    prefix: tuple  # ((q, y), ...) shared by both disjuncts
    shell: Node  # relativized matrix of the shell disjunct
    core: Node  # relativized matrix of the inner disjunct


def build_tilde_parts(f: Formula, b: BoundSpec) -> Tilde:
    prefix, matrix = _prenex(f)
    if len(b.nu) != len(prefix):
        raise UsageError(f"bound spec has {len(b.nu)} nu polynomials for {len(prefix)} quantifiers")
    for p in (b.mu, b.mu_prime) + tuple(b.nu):
        if p.arity != f.arity:
            raise UsageError("bound polynomials must use the formula's parameters")
    k = f.arity
    one = _one(k)
    guards = [conj(Le(LinTerm(((v, one),), -nu)), Le(LinTerm(((v, -one),), -nu)))
              for (_, v), nu in zip(prefix, b.nu)]
    used = set(f.params) | set(f.free) | all_vars(f.body) | {v for _, v in prefix}
    dummy = _fresh("xt", used)
    shell = _relativize(prefix, guards, conj(_norm_window(f.free, b.mu, b.mu_prime, k), matrix))
    core = _relativize(prefix, guards, conj(_norm_window(f.free, None, b.mu, k), matrix))
    xt = LinTerm(((dummy, one),), IntPoly.zero(k))
    body = disj(conj(Le(-xt), build_prefix(prefix, shell)),
                conj(Eq(xt), build_prefix(prefix, core)))
    formula = Formula(f.params, tuple(f.free) + (dummy,), body)
    return Tilde(formula, dummy, tuple(prefix), shell, core)


def build_tilde(f: Formula, b: BoundSpec) -> Formula:
    return build_tilde_parts(f, b).formula


# -- scalar terms ---------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarTerms:
    delta: tuple  # IntPoly, sign-normalized, pairwise distinct

    @property
    def r(self) -> int:
        return len(self.delta) - 1

    def index(self, p: IntPoly) -> tuple[int, int]:
        """(sign, j) with p = sign * delta_j."""
        sign, q = p.sign_normalized()
        for j, d in enumerate(self.delta):
            if d == q:
                return sign, j
        raise KeyError(p)


def _poly_key(p: IntPoly):
    return (p.degree(), [(sum(e), e, c) for e, c in p.sorted_terms()])


def extract_scalar_terms(f, extra: Sequence[IntPoly] = ()) -> ScalarTerms:
    """Every nonzero coefficient and constant polynomial, up to sign.

    Moduli of divisibility atoms are not scalar terms of the reduction; they
    stay integers in the reduced formula.
    """
    body = f.body if isinstance(f, Formula) else f
    found = {}
    polys = list(extra)
    for a in atoms(body):
        polys.extend(c for _, c in a.term.coeffs)
        polys.append(a.term.const)
    for p in polys:
        if not isinstance(p, IntPoly):
            raise UsageError("scalar terms need polynomial coefficients")
        if p.is_zero():
            continue
        _, q = p.sign_normalized()
        found[q] = True
    return ScalarTerms(tuple(sorted(found, key=_poly_key)))


def derive_eta(st: ScalarTerms, b: BoundSpec, mode: str = "numeric", u: Sequence[int] | None = None):
    """Digit base t.

    numeric: least odd t > 2 * max_j |delta_j(u)| * max(1, Zmax(u)).
    certified: the polynomial 2 (sum_j delta_j^2 + 1)(Z^2 + 1) + 1 with
    Z = mu' + sum_i nu_i, which dominates the numeric value everywhere.
    """
    if mode == "numeric":
        if u is None:
            raise UsageError("numeric mode needs a parameter point u")
        m = max((abs(d.eval(u)) for d in st.delta), default=0)
        z = max(1, b.zmax(u))
        return 2 * max(m, 1) * z + 1
    if mode == "certified":
        k = b.mu.arity
        sq = IntPoly.zero(k)
        for d in st.delta:
            sq = sq + d * d
        z = b.mu_prime
        for p in b.nu:
            z = z + p
        return (sq + 1) * (z * z + 1) * 2 + 1
    raise UsageError(f"unknown eta mode {mode!r}")


# -- the reduced formula ----------------------------------------------------------------

PSI_PARAMS = ("s", "t")


def _st_poly(s_exp: int, t_exp: int, c: int = 1) -> IntPoly:
    return IntPoly(2, {(s_exp, t_exp): c})


def div_node(z: str | None, digits: Sequence[str], overflow: str | None) -> Node:
    """s*z = sum_j t^j w_j (+ t^(r+1) h) and -t/2 < w_j < t/2 for every j.

    z = None encodes the constant 1.
    """
    coeffs = [(w, -_st_poly(0, j)) for j, w in enumerate(digits)]
    if overflow is not None:
        coeffs.append((overflow, -_st_poly(0, len(digits))))
    const = IntPoly.zero(2)
    if z is None:
        const = _st_poly(1, 0)
    else:
        coeffs.append((z, _st_poly(1, 0)))
    parts = [Eq(LinTerm.make(coeffs, const))]
    two = IntPoly.const(2, 2)
    low = IntPoly.const(2, 1) - _st_poly(0, 1)  # 1 - t
    for w in digits:
        parts.append(Le(LinTerm(((w, two),), low)))
        parts.append(Le(LinTerm(((w, -two),), low)))
    return conj(parts)


@dataclass
class Reduction:
    s: int
    t: int
    psi: Formula  # params (s, t)
    scalar_terms: ScalarTerms
    tilde: Formula
    dummy: str
    digits: dict = field(default_factory=dict)  # var -> digit names; "1" for the constants
    overflow: dict = field(default_factory=dict)  # free var -> overflow digit
    quantified_digits: bool = True

    def map(self) -> tuple[int, int]:
        return (self.s, self.t)

    def ground(self) -> Formula:
        return substitute_params(self.psi, (self.s, self.t))


def _substitute_scalars(n: Node, st: ScalarTerms, digits: dict) -> Node:
    """delta_j * z -> w_zj and delta_j -> v_j; unit coefficients keep z itself."""
    if isinstance(n, (Top, Bot)):
        return n
    if isinstance(n, Not):
        return Not(_substitute_scalars(n.arg, st, digits))
    if isinstance(n, (And, Or)):
        parts = [_substitute_scalars(a, st, digits) for a in n.args]
        return conj(parts) if isinstance(n, And) else disj(parts)
    if isinstance(n, (Le, Eq, Dvd)):
        coeffs = []
        for v, c in n.term.coeffs:
            if c.is_constant() and abs(c.constant_value()) == 1:
                coeffs.append((v, c.constant_value()))
                continue
            sign, j = st.index(c)
            coeffs.append((digits[v][j], sign))
        if not n.term.const.is_zero():
            sign, j = st.index(n.term.const)
            coeffs.append((digits["1"][j], sign))
        t = LinTerm.make([(v, IntPoly.const(2, c)) for v, c in coeffs], IntPoly.zero(2))
        if isinstance(n, Dvd):
            if not n.modulus.is_constant():
                raise UsageError("the reduction supports divisibility atoms with integer moduli only")
            return Dvd(IntPoly.const(2, n.modulus.constant_value()), t)
        return type(n)(t)
    raise UsageError(f"unexpected node in matrix: {type(n).__name__}")


def reduce(f: Formula, b: BoundSpec, u: Sequence[int], mode: str = "numeric") -> Reduction:
    """Build Psi_{s,t} and the parameter point (s, t) for u."""
    u = tuple(int(x) for x in u)
    if len(u) != f.arity:
        raise UsageError(f"expected {f.arity} parameter values, got {len(u)}")
    parts = build_tilde_parts(f, b)
    tilde = parts.formula
    st = extract_scalar_terms(tilde)
    r = st.r
    mu, mup, nus = b.values(u)
    t = derive_eta(st, b, mode, u) if mode == "numeric" else derive_eta(st, b, mode).eval(u)
    zmax = max(1, b.zmax(u))
    for d in st.delta:
        if not 2 * abs(d.eval(u)) * zmax < t:
            raise AssertionError(f"digit window violated: |{d}| * {zmax} >= t/2 with t={t}")
    s = sum(d.eval(u) * t ** j for j, d in enumerate(st.delta))

    used = set(all_vars(tilde.body)) | set(tilde.free) | set(PSI_PARAMS)
    xs = list(f.free)
    ys = [v for _, v in parts.prefix]
    digits = {}
    for i, x in enumerate(xs):
        digits[x] = [_fresh(f"w{i + 1}_{j}", used) for j in range(r + 1)]
    for i, y in enumerate(ys):
        digits[y] = [_fresh(f"wp{i + 1}_{j}", used) for j in range(r + 1)]
    digits["1"] = [_fresh(f"v{j}", used) for j in range(r + 1)]
    overflow = {x: _fresh(f"h{i + 1}", used) for i, x in enumerate(xs)}

    star_parts = [div_node(x, digits[x], overflow[x]) for x in xs]
    star_parts += [div_node(y, digits[y], None) for y in ys]
    star_parts.append(div_node(None, digits["1"], None))
    star = conj(star_parts)
    new_vars = [w for x in xs for w in digits[x] + [overflow[x]]]
    new_vars += [w for y in ys for w in digits[y]] + digits["1"]

    one = IntPoly.const(2, 1)
    xt = LinTerm(((parts.dummy, one),), IntPoly.zero(2))
    m = len(parts.prefix)
    last = parts.prefix[-1][0] if m else "E"

    def finish(chi: Node) -> Node:
        chi = _substitute_scalars(chi, st, digits)
        if m == 0:
            return conj(star, chi)
        if last == "E":
            inner = conj(star, chi)
            for w in reversed(new_vars):
                inner = Exists(w, inner)
        else:
            inner = disj(nnf(star, negate=True), chi)
            for w in reversed(new_vars):
                inner = ForAll(w, inner)
        return build_prefix(list(parts.prefix), inner)

    body = disj(conj(Le(-xt), finish(parts.shell)), conj(Eq(xt), finish(parts.core)))
    free = tuple(xs) + (parts.dummy,)
    if m == 0:
        free = free + tuple(new_vars)
    psi = Formula(PSI_PARAMS, free, body)
    return Reduction(s, t, psi, st, tilde, parts.dummy, digits, overflow, m > 0)


# -- verification ----------------------------------------------------------------------


def _half(t: int) -> int:
    return (t - 1) // 2


def count_original(f: Formula, b: BoundSpec, u, budget=None, jobs: int = 1):
    """(count, infinite) for S_u using the bound spec's boxes."""
    mu, mup, nus = b.values(u)
    g = substitute_params(f, u)
    prefix, matrix = prenex_parts(g.body, reserved=set(g.free))
    g = g.with_body(build_prefix(prefix, matrix))
    qbox = Box({v: (-n, n) for (_, v), n in zip(prefix, nus)})
    kw = {} if budget is None else {"budget": budget}
    outer = count_bounded(g, Box.uniform(-mup, mup), qbox, jobs=jobs, **kw)
    inner = count_bounded(g, Box.uniform(-(mu - 1), mu - 1), qbox, jobs=jobs, **kw) if mu > 0 else 0
    return inner, outer > inner


def count_reduced(red: Reduction, b: BoundSpec, u, budget=None, jobs: int = 1):
    """(count, infinite) for F_{s,t} by the bounded oracle.

    Digits range over (-t/2, t/2); overflow digits over [-1, 1] (inside the
    windows they are 0); quantified variables one beyond their nu bound.
    """
    mu, mup, nus = b.values(u)
    g = red.ground()
    half = _half(red.t)
    bounds = {}
    for x, ws in red.digits.items():
        for w in ws:
            bounds[w] = (-half, half)
    for h in red.overflow.values():
        bounds[h] = (-1, 1)
    ys = [v for v in red.digits if v != "1" and v not in red.overflow]
    xs = list(red.overflow)
    for y, n in zip(ys, nus):
        bounds[y] = (-n - 1, n + 1)
    for x in xs:
        bounds[x] = (-mup - 1, mup + 1)
    kw = {} if budget is None else {"budget": budget}
    box1 = Box({**bounds, red.dummy: (1, 1)})
    infinite = decide_bounded(g, box1, **kw)
    box0 = Box({**bounds, red.dummy: (0, 0)})
    free_box = Box({v: box0.interval(v) for v in g.free})
    n = count_bounded(g, free_box, box0, jobs=jobs, **kw)
    return n, infinite


def verify_counting_reduction(f: Formula, b: BoundSpec, u, mode: str = "numeric",
                              budget=None, jobs: int = 1) -> dict:
    u = tuple(int(x) for x in u)
    red = reduce(f, b, u, mode)
    n_s, inf_s = count_original(f, b, u, budget, jobs)
    n_f, inf_f = count_reduced(red, b, u, budget, jobs)
    alt_f, alt_psi = classify_alternation(f), classify_alternation(red.psi)
    same_alt = str(alt_f) == str(alt_psi)
    if inf_s or inf_f:
        ok = inf_s and inf_f
    else:
        ok = n_s == n_f
    return {
        "u": list(u), "s": red.s, "t": red.t, "r": red.scalar_terms.r,
        "S_count": "infinite" if inf_s else n_s,
        "F_count": "infinite" if inf_f else n_f,
        "alternation_f": str(alt_f), "alternation_psi": str(alt_psi),
        "alternation_preserved": same_alt,
        "digits_quantified": red.quantified_digits,
        "pass": bool(ok and same_alt),
    }


def div_unique(delta_vals: Sequence[int], t: int, z_range) -> bool:
    """Exhaustive check that balanced base-t digits of s*z equal delta_j*z."""
    s = sum(d * t ** j for j, d in enumerate(delta_vals))
    for z in z_range:
        n = s * z
        digits = []
        for _ in delta_vals:
            d = ((n + _half(t)) % t) - _half(t)
            digits.append(d)
            n = (n - d) // t
        if n != 0 or digits != [d * z for d in delta_vals]:
            return False
    return True


# -- heuristic bounds -----------------------------------------------------------------


def empirical_bounds(f: Formula, u_samples, search_radius: int, budget=None) -> dict:
    """Heuristic, not certified: fit bounds that dominate the observed extents.

    For each sample u the solutions within `search_radius` (quantifiers over
    the same radius) are scanned for their largest |x|_inf.  mu' is the least
    polynomial of the form a + c * (t1 + ... + tk) (a, c small nonnegative
    integers, c >= 1 preferred) that dominates every extent with margin; mu
    is mu' - 1 clipped at 1 and every nu equals mu'.  With no solution in any sample every bound
    is the constant 1.
    """
    from .oracle import enumerate_solutions

    k = f.arity
    prefix, _ = _prenex(f)
    extents = []
    seen_any = False
    for u in u_samples:
        g = substitute_params(f, u)
        prefix_g, matrix = prenex_parts(g.body, reserved=set(g.free))
        g = g.with_body(build_prefix(prefix_g, matrix))
        kw = {} if budget is None else {"budget": budget}
        sols = enumerate_solutions(g, Box.uniform(-search_radius, search_radius),
                                   Box.uniform(-search_radius, search_radius), **kw)
        seen_any = seen_any or bool(sols)
        ext = max((max((abs(c) for c in p), default=0) for p in sols), default=0)
        extents.append((tuple(u), ext))
    if not seen_any:
        one = IntPoly.const(k, 1)
        spec = BoundSpec(one, one, tuple(one for _ in prefix))
        return {"spec": spec, "extents": extents, "label": "heuristic, not certified"}
    total = IntPoly.zero(k)
    for i in range(k):
        total = total + IntPoly.var(k, i)
    best = None
    for c in (1, 2, 3, 0):  # growing candidates first; they extrapolate safely
        for a in range(1, 64):
            cand = IntPoly.const(k, a) + total * c
            if all(cand.eval(u) >= e + 2 for u, e in extents):
                best = cand
                break
        if best is not None:
            break
    if best is None:
        best = IntPoly.const(k, search_radius + 2)
    mu = best - 1
    if all(mu.eval(u) < 1 for u, _ in extents):
        mu = IntPoly.const(k, 1)
    spec = BoundSpec(mu, best, tuple(best for _ in prefix))
    return {"spec": spec, "extents": extents, "label": "heuristic, not certified"}
