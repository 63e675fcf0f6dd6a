"""Eventual quasi-polynomials: exact fitting from counts and evaluation."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from sympy import Poly, Rational, interpolate, symbols

from .errors import UsageError

INF = "infinite"
_T = symbols("t")


class InsufficientSamples(UsageError):
    pass


@dataclass(frozen=True)
class QuasiPolynomial:
    """g(t) = f_{t mod m}(t) for t >= threshold (t <= -threshold on the negative side).

    constituents[i] is an ascending coefficient list of Fractions, or None
    when the class is infinite.
    """

    period: int
    threshold: int
    constituents: tuple
    side: str = "positive"

    def __post_init__(self):
        if self.period < 1 or len(self.constituents) != self.period:
            raise UsageError("period must be >= 1 with one constituent per class")

    def applies(self, t: int) -> bool:
        return t >= self.threshold if self.side == "positive" else t <= -self.threshold

    def degree(self) -> int:
        return max((len(c) - 1 for c in self.constituents if c is not None), default=0)

    def to_json(self) -> dict:
        out = {"period": self.period, "threshold": self.threshold,
               "constituents": [INF if c is None else [f"{x.numerator}/{x.denominator}" for x in c]
                                for c in self.constituents]}
        if self.side != "positive":
            out["side"] = self.side
        return out

    @staticmethod
    def from_json(data) -> QuasiPolynomial:
        if isinstance(data, str):
            data = json.loads(data)
        try:
            cons = tuple(None if c == INF else tuple(Fraction(x) for x in c) for c in data["constituents"])
            return QuasiPolynomial(int(data["period"]), int(data["threshold"]), cons,
                                   data.get("side", "positive"))
        except (KeyError, ValueError, TypeError) as e:
            raise UsageError(f"bad EQP JSON: {e}") from None


def _poly_eval(coeffs, t: int) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def qp_eval(q: QuasiPolynomial, t: int):
    """f_{t mod m}(t); None for an infinite class."""
    c = q.constituents[t % q.period]
    return None if c is None else _poly_eval(c, t)


def _interp(points) -> tuple:
    if len(points) == 1:
        return (Fraction(points[0][1]),)
    p = Poly(interpolate([(Rational(a), Rational(b)) for a, b in points], _T), _T)
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(p.all_coeffs())]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def _fit_class(points, max_degree: int):
    """Least-degree exact fit of all points, or None."""
    for d in range(0, max_degree + 1):
        if len(points) < d + 2:
            return None
        coeffs = _interp(points[:d + 1])
        if all(_poly_eval(coeffs, t) == v for t, v in points):
            return coeffs
    return None


def _normalize(samples, side: str):
    data = {}
    for t, c in samples:
        t = int(t)
        if c is None or c == INF:
            data[t] = None
        else:
            data[t] = int(c)
    ts = sorted(t for t in data if (t > 0 if side == "positive" else t < 0))
    if ts and ts != list(range(ts[0], ts[-1] + 1)):
        raise UsageError("samples must be at consecutive integers")
    return [(t, data[t]) for t in ts]


def fit_eqp(samples, max_period: int = 6, max_degree: int = 3, side: str = "positive"):
    """Smallest (period, threshold, degree) quasi-polynomial matching every
    sample beyond the threshold; None when nothing fits within the limits.

    Each sign side is fitted on its own and t = 0 belongs to neither.  The
    threshold runs over positive multiples of the period (on the negative side
    it bounds |t|) up to the middle of the sample window, so that at least half
    of the samples confirm any accepted fit.  A class whose samples beyond the threshold are all
    infinite gets no constituent; a class mixing finite and infinite samples
    rejects the candidate.
    """
    if side not in ("positive", "negative"):
        raise UsageError("side is positive or negative")
    pts = _normalize(samples, side)
    if not pts:
        raise InsufficientSamples("no samples on this side")
    absmax = max(abs(t) for t, _ in pts)
    absmin = min(abs(t) for t, _ in pts)
    enough = False
    for m in range(1, max_period + 1):
        T = m * max(1, -(-absmin // m))
        while T <= (absmin + absmax) // 2:
            tail = [(t, v) for t, v in pts if abs(t) >= T]
            classes = [[(t, v) for t, v in tail if t % m == i] for i in range(m)]
            if any(len(c) < max_degree + 2 for c in classes):
                break
            enough = True
            cons = []
            for cls in classes:
                vals = [v for _, v in cls]
                if all(v is None for v in vals):
                    cons.append(None)
                elif any(v is None for v in vals):
                    cons = None
                    break
                else:
                    fit = _fit_class(cls, max_degree)
                    if fit is None:
                        cons = None
                        break
                    cons.append(fit)
            if cons is not None:
                return QuasiPolynomial(m, T, tuple(cons), side)
            T += m
    if not enough:
        raise InsufficientSamples(
            f"need at least {max_degree + 2} samples per residue class beyond the threshold")
    return None


def verify_fit(q: QuasiPolynomial, counts: Callable[[int], object], ts: Sequence[int]) -> bool:
    """True iff q matches counts(t) at every t of ts where q applies."""
    for t in ts:
        if not q.applies(t):
            continue
        want = counts(t)
        got = qp_eval(q, t)
        if want is None or want == INF:
            if got is not None:
                return False
        elif got is None or got != want:
            return False
    return True


def oracle_counter(f, radius: Callable[[int], int], quant_radius: Callable[[int], int] | None = None,
                   budget=None) -> Callable[[int], int]:
    """t -> |S_t| by the bounded oracle on the box [-radius(t), radius(t)]."""
    from .formula import substitute_params
    from .oracle import Box, count_bounded

    if f.arity != 1:
        raise UsageError("EQP fitting needs a 1-parametric formula")
    qr = quant_radius or radius

    def count(t: int) -> int:
        g = substitute_params(f, (t,))
        kw = {} if budget is None else {"budget": budget}
        r, s = max(0, radius(t)), max(0, qr(t))
        return count_bounded(g, Box.uniform(-r, r), Box.uniform(-s, s), **kw)

    return count


def fit_formula(f, ts: Sequence[int], radius, quant_radius=None, max_period=6, max_degree=3):
    counter = oracle_counter(f, radius, quant_radius)
    samples = [(t, counter(t)) for t in ts]
    side = "negative" if ts and max(ts) < 0 else "positive"
    return fit_eqp(samples, max_period, max_degree, side), samples
