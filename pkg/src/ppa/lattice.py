"""Integer lattice algebra: Bezout quadruples, Smith and Hermite forms, and
affine lattices (cosets) as solution sets of equations and congruences."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Sequence

from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp

from .errors import UsageError

# When set, every snf call recomputes U*A*V and the unimodularity of U and V.
CHECK_SNF = True
SNF_CHECKS = 0


# -- scalar operations ----------------------------------------------------------------


@dataclass(frozen=True)
class ScalarQuad:
    g: int
    alpha: int
    beta: int
    gamma: int  # gamma(r, s) = r / g
    gamma_swap: int  # gamma(s, r) = s / g


def _balanced(a: int, m: int) -> int:
    """Residue of a modulo m in (-m/2, m/2]."""
    r = a % m
    return r - m if 2 * r > m else r


def scalar_quad(r: int, s: int) -> ScalarQuad:
    """g = gcd, gamma(r,s) = r/g, and a Bezout pair: 1 = alpha*gamma(r,s) + beta*gamma(s,r).

    alpha is reduced to the residue of smallest absolute value modulo
    |gamma(s,r)| (ties to the positive side); at (0,0) everything is 0.
    """
    r, s = int(r), int(s)
    g = gcd(r, s)
    if g == 0:
        return ScalarQuad(0, 0, 0, 0, 0)
    gr, gs = r // g, s // g
    if gs == 0:
        return ScalarQuad(g, gr, 0, gr, 0)  # gr = +-1
    m = abs(gs)
    if m == 1:
        alpha = 0
    else:
        alpha = _balanced(pow(gr, -1, m), m)
    beta = (1 - alpha * gr) // gs
    return ScalarQuad(g, alpha, beta, gr, gs)


# -- Smith normal form -----------------------------------------------------------------


def _det(M: Matrix) -> int:
    return int(M.det()) if M.rows else 1


def snf(A: Sequence[Sequence[int]]):
    """(U, D, V) as lists of rows with U*A*V = D, U and V unimodular, D diagonal
    with nonnegative entries d1 | d2 | ...."""
    global SNF_CHECKS
    rows = [list(map(int, r)) for r in A]
    n = len(rows)
    m = len(rows[0]) if rows else 0
    M = Matrix(n, m, [x for r in rows for x in r])
    if n == 0 or m == 0 or all(x == 0 for r in rows for x in r):
        U, D, V = Matrix.eye(n), Matrix.zeros(n, m), Matrix.eye(m)
    else:
        D, U, V = smith_normal_decomp(M)
        for i in range(min(n, m)):
            if D[i, i] < 0:
                D[i, :] = -D[i, :]
                U[i, :] = -U[i, :]
    if CHECK_SNF:
        SNF_CHECKS += 1
        if U * M * V != D:
            raise AssertionError("snf: U*A*V != D")
        if abs(_det(U)) != 1 or abs(_det(V)) != 1:
            raise AssertionError("snf: transform not unimodular")
        diag = [int(D[i, i]) for i in range(min(n, m))]
        for i in range(n):
            for j in range(m):
                if i != j and D[i, j] != 0:
                    raise AssertionError("snf: D not diagonal")
        for a, b in zip(diag, diag[1:]):
            if a < 0 or (a == 0 and b != 0) or (a and b % a):
                raise AssertionError("snf: divisibility chain broken")
    to_rows = lambda X: [[int(x) for x in X.row(i)] for i in range(X.rows)]
    return to_rows(U), to_rows(D), to_rows(V)


# -- Hermite form and cosets -----------------------------------------------------------


def hermite_basis(vectors: Sequence[Sequence[int]], dim: int) -> tuple:
    """Canonical echelon basis of the lattice spanned by `vectors`.

    Rows have strictly increasing pivot columns, positive pivots, and the
    entries above each pivot reduced into [0, pivot).
    """
    rows = [list(map(int, v)) for v in vectors if any(v)]
    basis = []
    col = 0
    while rows and col < dim:
        nz = [r for r in rows if r[col] != 0]
        zero = [r for r in rows if r[col] == 0]
        if not nz:
            col += 1
            continue
        # Euclid on the pivot column
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            nxt = [p]
            for r in nz[1:]:
                q = r[col] // p[col]
                r = [a - q * b for a, b in zip(r, p)]
                (nxt if r[col] else zero).append(r)
            nz = nxt
        p = nz[0]
        if p[col] < 0:
            p = [-a for a in p]
        basis.append(p)
        rows = [r for r in zero if any(r)]
        col += 1
    # reduce entries above pivots
    pivots = [next(j for j, a in enumerate(b) if a) for b in basis]
    for i in range(len(basis)):
        for k in range(i + 1, len(basis)):
            pc = pivots[k]
            q = basis[i][pc] // basis[k][pc]
            if q:
                basis[i] = [a - q * b for a, b in zip(basis[i], basis[k])]
    return tuple(tuple(b) for b in basis)


def _pivots(basis) -> list:
    return [next(j for j, a in enumerate(b) if a) for b in basis]


@dataclass(frozen=True)
class AffineLattice:
    """Either empty (base is None) or base + span_Z(basis), canonical."""

    dim: int
    base: tuple | None
    basis: tuple = ()

    @staticmethod
    def empty(dim: int) -> AffineLattice:
        return AffineLattice(dim, None, ())

    @staticmethod
    def make(dim: int, base, generators) -> AffineLattice:
        basis = hermite_basis(generators, dim)
        v = list(map(int, base))
        for b, p in zip(basis, _pivots(basis)):
            q = v[p] // b[p]
            if q:
                v = [a - q * c for a, c in zip(v, b)]
        return AffineLattice(dim, tuple(v), basis)

    @property
    def is_empty(self) -> bool:
        return self.base is None

    @property
    def rank(self) -> int:
        return len(self.basis)

    def index(self) -> int:
        """Index in Z^dim of a full-rank lattice (product of pivots)."""
        if self.rank != self.dim:
            raise UsageError("index of a lower-rank lattice is infinite")
        out = 1
        for b, p in zip(self.basis, _pivots(self.basis)):
            out *= b[p]
        return out

    def contains(self, point) -> bool:
        if self.base is None:
            return False
        v = [int(a) - b for a, b in zip(point, self.base)]
        for b, p in zip(self.basis, _pivots(self.basis)):
            if v[p] % b[p]:
                return False
            q = v[p] // b[p]
            v = [a - q * c for a, c in zip(v, b)]
        return not any(v)

    def to_json(self) -> dict:
        if self.base is None:
            return {"dim": self.dim, "status": "empty"}
        return {"dim": self.dim, "status": "coset", "base": list(self.base),
                "basis": [list(b) for b in self.basis]}


def solve_system(dim: int, equations=(), congruences=()) -> AffineLattice:
    """Solutions in Z^dim of  a.x + c = 0  (equations as (a, c)) and
    m | a.x + c  (congruences as (m, a, c))."""
    eqs = [(list(map(int, a)), int(c)) for a, c in equations]
    congs = [(int(m), list(map(int, a)), int(c)) for m, a, c in congruences]
    congs = [(abs(m), a, c) for m, a, c in congs if abs(m) != 1]
    for m, _, _ in congs:
        if m == 0:
            raise UsageError("congruence modulus must be nonzero")
    n_aux = len(congs)
    width = dim + n_aux
    rows, rhs = [], []
    for a, c in eqs:
        rows.append(a + [0] * n_aux)
        rhs.append(-c)
    for i, (m, a, c) in enumerate(congs):
        aux = [0] * n_aux
        aux[i] = -m
        rows.append(a + aux)
        rhs.append(-c)
    if not rows:
        return AffineLattice.make(dim, [0] * dim, [[int(i == j) for j in range(dim)] for i in range(dim)])
    U, D, V = snf(rows)
    ub = [sum(u * b for u, b in zip(row, rhs)) for row in U]
    z = [0] * width
    rank = 0
    for i in range(min(len(rows), width)):
        if D[i][i]:
            rank += 1
    for i, val in enumerate(ub):
        d = D[i][i] if i < width else 0
        if d:
            if val % d:
                return AffineLattice.empty(dim)
            z[i] = val // d
        elif val:
            return AffineLattice.empty(dim)
    y0 = [sum(V[r][c] * z[c] for c in range(width)) for r in range(width)]
    gens = [[V[r][c] for r in range(dim)] for c in range(rank, width)]
    return AffineLattice.make(dim, y0[:dim], gens)


# -- trichotomy ------------------------------------------------------------------------


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def uncovered_density(k: int, congruences) -> Fraction:
    """Density in Z^k of points with m not dividing a.l + c for every (m, a, c).

    Exact inclusion-exclusion over subsets of the excluded cosets.
    """
    covered = Fraction(0)
    items = list(congruences)
    for size in range(1, len(items) + 1):
        for sub in combinations(items, size):
            lat = solve_system(k, (), sub)
            if lat.is_empty:
                continue
            term = Fraction(1, lat.index())
            covered += term if size % 2 else -term
    return 1 - covered


@dataclass(frozen=True)
class Classification:
    kind: str  # "empty" | "singleton" | "infinite"
    point: tuple | None = None


def classify_conjunct(positive: AffineLattice, negated_equations=(), negated_congruences=()) -> Classification:
    """0, 1 or infinitely many points of  positive  minus the negated literals.

    Negated equations are (a, c) meaning a.x + c != 0; negated congruences
    (m, a, c) meaning m does not divide a.x + c.
    """
    neq = [(list(a), int(c)) for a, c in negated_equations]
    ncg = [(abs(int(m)), list(a), int(c)) for m, a, c in negated_congruences]
    if positive.is_empty:
        return Classification("empty")
    v = positive.base
    if positive.rank == 0:
        for a, c in neq:
            if _dot(a, v) + c == 0:
                return Classification("empty")
        for m, a, c in ncg:
            if (_dot(a, v) + c) % m == 0:
                return Classification("empty")
        return Classification("singleton", tuple(v))
    B = positive.basis
    k = len(B)
    # literals restricted to the parametrization x = v + sum(l_i * B_i)
    for a, c in neq:
        coeffs = [_dot(a, b) for b in B]
        if not any(coeffs) and _dot(a, v) + c == 0:
            return Classification("empty")
    cut = []
    for m, a, c in ncg:
        coeffs = [_dot(a, b) for b in B]
        const = _dot(a, v) + c
        cut.append((m, coeffs, const))
    if uncovered_density(k, cut) > 0:
        return Classification("infinite")
    return Classification("empty")
