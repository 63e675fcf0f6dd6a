"""Hardness gadgets: the best-approximation sail, the three-parameter formula
in (p, q, M), its two-parameter encoding in t1 = pM, t2 = pqM^2 + M, and
AP-COVER reference semantics.

Formulas are assembled as text in the formula grammar and parsed, so each
builder reads like the displayed formula it implements.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

from .errors import UsageError
from .formula import Formula, classify_alternation
from .oracle import DEFAULT_BUDGET, Box, enumerate_solutions
from .parser import parse


@dataclass(frozen=True)
class PqmInstance:
    p: int
    q: int
    M: int

    def __post_init__(self):
        p, q, M = self.p, self.q, self.M
        if not (isinstance(p, int) and isinstance(q, int) and isinstance(M, int)):
            raise UsageError("p, q, M must be integers")
        if not p > q >= 2:
            raise UsageError(f"need p > q >= 2, got p={p}, q={q}")
        if gcd(p, q) != 1:
            raise UsageError(f"need gcd(p, q) = 1, got gcd({p}, {q}) = {gcd(p, q)}")
        if M < 1:
            raise UsageError(f"need M >= 1, got {M}")

    @property
    def t1(self) -> int:
        return self.p * self.M

    @property
    def t2(self) -> int:
        return self.p * self.q * self.M ** 2 + self.M

    @property
    def floor_pq(self) -> int:
        return self.p // self.q


def valid_instances(p_max: int, M_max: int, p_min: int = 3) -> list[PqmInstance]:
    out = []
    for p in range(p_min, p_max + 1):
        for q in range(2, p):
            if gcd(p, q) == 1:
                out.extend(PqmInstance(p, q, M) for M in range(1, M_max + 1))
    return out


# -- sail --------------------------------------------------------------------


def approx_witness(inst: PqmInstance, y1: int, y2: int):
    """A point (x1, x2) with 0 < x2 < y2 and 0 <= p*x1 - q*x2 <= p*y1 - q*y2, or None."""
    p, q = inst.p, inst.q
    gap = p * y1 - q * y2
    for x2 in range(1, y2):
        lo = -((-q * x2) // p)  # least x1 with p*x1 - q*x2 >= 0
        if p * lo - q * x2 <= gap:
            return (lo, x2)
    return None


def best_approx_below(inst: PqmInstance, y1: int, y2: int) -> bool:
    if inst.q * y2 >= inst.p * y1:
        return False
    return approx_witness(inst, y1, y2) is None


@dataclass(frozen=True)
class Sail:
    inst: PqmInstance
    points: tuple[tuple[int, int], ...]

    @property
    def t1(self) -> int:
        return self.inst.t1

    @property
    def t2(self) -> int:
        return self.inst.t2


def sail_candidates(inst: PqmInstance) -> list[tuple[int, int]]:
    """Candidates from the lowest lattice point under the line in each row.

    For y2 >= 2 only the least y1 with q*y2 < p*y1 can pass, since any larger
    y1 leaves a gap of at least p, which (1, 1) already undercuts.  Row y2 = 1
    has an empty witness range, so every y1 in [1, q] passes there.
    """
    out = [(y1, 1) for y1 in range(1, inst.q + 1)] if inst.p > 1 else []
    for y2 in range(2, inst.p):
        y1 = inst.q * y2 // inst.p + 1
        if y1 <= inst.q:
            out.append((y1, y2))
    return out


def sail(inst: PqmInstance) -> Sail:
    pts = sorted(((y1, y2) for y1, y2 in sail_candidates(inst) if best_approx_below(inst, y1, y2)),
                 key=lambda pt: (pt[1], pt[0]))
    return Sail(inst, tuple(pts))


def sail_exhaustive(inst: PqmInstance) -> list[tuple[int, int]]:
    """Reference membership scan over the whole window 1 <= y1 <= q, 0 < y2 < p."""
    return sorted(((y1, y2) for y2 in range(1, inst.p) for y1 in range(1, inst.q + 1)
                   if best_approx_below(inst, y1, y2)), key=lambda pt: (pt[1], pt[0]))


def residues_on_sail(inst: PqmInstance) -> set[int]:
    return {y2 % inst.M for _, y2 in sail(inst).points if inst.floor_pq <= y2 < inst.p}


def reference_set(inst: PqmInstance) -> list[int]:
    res = residues_on_sail(inst)
    return [z for z in range(1, inst.floor_pq + 1) if z % inst.M in res]


# -- gadget formulas ----------------------------------------------------------


def _check_names(names: Sequence[str]):
    if len(set(names)) != len(names):
        raise UsageError(f"gadget variable names must be distinct: {list(names)}")
    for n in names:
        if n in ("t1", "t2"):
            raise UsageError(f"{n!r} is a parameter name")


def div_text(j: str, r: str, s: str) -> str:
    return f"t2*{j} = t1*{r} + {s} and 0 <= {r} and 0 <= {s} and {s} < t1"


def cong_text(b: str, c: str, w1: str, w2: str) -> str:
    return f"{b} - {c} - t1*{w1} - t2*{w2} = 0"


def equalp_text(v: str, u: str, v_aux: str, u_aux: str) -> str:
    return (f"{u} > 0 and t2*{v} = t1*{u} and "
            f"(forall {v_aux} {u_aux} . not (0 < {v_aux} and {v_aux} < {v}) or t2*{v_aux} != t1*{u_aux})")


def build_div_gadget(j="j", r="r", s="s") -> Formula:
    _check_names([j, r, s])
    return parse(div_text(j, r, s), params=["t1", "t2"], free=[j, r, s])


def build_cong_gadget(b="b", c="c", w1="w1", w2="w2") -> Formula:
    _check_names([b, c, w1, w2])
    return parse(cong_text(b, c, w1, w2), params=["t1", "t2"], free=[b, c, w1, w2])


def build_equalp_gadget(v="v", u="u", v_aux="vp", u_aux="up") -> Formula:
    _check_names([v, u, v_aux, u_aux])
    return parse(equalp_text(v, u, v_aux, u_aux), params=["t1", "t2"], free=[v, u])


def div_decode(t1: int, t2: int, j: int) -> tuple[int, int]:
    """The unique (r, s) with t2*j = t1*r + s, r >= 0, 0 <= s < t1 (j >= 0)."""
    if j < 0:
        raise UsageError("Div decoding needs j >= 0")
    return divmod(t2 * j, t1)


def equalp_values(t1: int, t2: int) -> tuple[int, int]:
    """(v, u): v the least positive integer with t1 | t2*v, u = t2*v/t1."""
    v = t1 // gcd(t1, t2)
    return v, t2 * v // t1


def cong_witness(t1: int, t2: int, b: int, c: int):
    """(w1, w2) with b - c = t1*w1 + t2*w2 and 0 <= w2 < t1/gcd, or None."""
    diff = b - c
    g = gcd(t1, t2)
    if diff % g:
        return None
    if diff == 0:
        return (0, 0)
    a1, a2, d = t1 // g, t2 // g, diff // g
    # a2*w2 = d (mod a1)
    w2 = (d * pow(a2, -1, a1)) % a1 if a1 > 1 else 0
    w1 = (diff - t2 * w2) // t1
    return (w1, w2)


def floor_identity(inst: PqmInstance) -> bool:
    return inst.t1 ** 2 // inst.t2 == inst.p // inst.q


# -- the formulas in (p, q, M) and in (t1, t2) ------------------------------------


def phi_prime_text() -> str:
    return (
        "exists y1 y2 k . "
        "0 < q*z and q*z <= p "
        "and y2 - z = M*k "
        "and p < q*(y2 + 1) and y2 + 1 <= p "
        "and q*M*y2 < p*M*y1 "
        "and (forall x1 x2 . not (p*M*y1 - q*M*y2 >= p*M*x1 - q*M*x2 "
        "and p*M*x1 - q*M*x2 >= 0 and y2 > x2 and x2 > 0))"
    )


def build_phi_prime(inst: PqmInstance | None = None) -> Formula:
    """Cleared three-parameter formula in (p, q, M) with free variable z.

    The congruence y2 = z (mod M) carries an existential multiplier k.
    """
    return parse(phi_prime_text(), params=["p", "q", "M"], free=["z"])


def psi_text() -> str:
    return (
        "exists y1 y2 w1 w2 u v r s . "
        "0 < t2*z and t2*z <= t1^2 "
        f"and {cong_text('y2', 'z', 'w1', 'w2')} "
        f"and {equalp_text('v', 'u', 'vp', 'up')} and t1^2 < t2*(y2 + 1) and t2*(y2 + 1) <= t2*v "
        f"and {div_text('y2', 'r', 's')} and r < t1*y1 "
        f"and (forall x1 x2 rp sp . not (0 < x2 and x2 < y2 and {div_text('x2', 'rp', 'sp')}) "
        "or not (0 <= t1*x1 - rp and t1*x1 - rp <= t1*y1 - r))"
    )


def build_psi(inst: PqmInstance) -> tuple[int, int, Formula]:
    return inst.t1, inst.t2, parse(psi_text(), params=["t1", "t2"], free=["z"])


def build_psi_prime(inst: PqmInstance) -> Formula:
    text = f"0 < t2*z and t2*z <= t1^2 and not ({psi_text()})"
    return parse(text, params=["t1", "t2"], free=["z"])


def certified_boxes(inst: PqmInstance) -> dict[str, Box]:
    """Quantifier boxes under which the bounded oracle gives the unbounded answer."""
    p, q, M, t1, t2 = inst.p, inst.q, inst.M, inst.t1, inst.t2
    z = (0, p)
    phi = Box({"z": z, "y1": (1, q), "y2": (inst.floor_pq, p - 1), "k": (-p, p),
               "x1": (0, 2 * q), "x2": (1, p - 1)})
    psi = Box({"z": z, "y1": (1, q), "y2": (inst.floor_pq, p - 1),
               "w1": (-(t2 // M), t2 // M), "w2": (0, t1 // M - 1),
               "u": (p * q * M + 1, p * q * M + 1), "v": (p, p),
               "r": (0, t2), "s": (0, t1 - 1),
               "x1": (0, 2 * q), "x2": (1, p - 1), "rp": (0, t2), "sp": (0, t1 - 1),
               "vp": (0, p), "up": (0, t2)})
    return {"phi_prime": phi, "psi": psi}


def solution_set(f: Formula, values: Sequence[int], box: Box, budget: int = DEFAULT_BUDGET,
                 jobs: int = 1) -> list[int]:
    from .formula import substitute_params

    g = substitute_params(f, values)
    return [pt[0] for pt in enumerate_solutions(g, Box({"z": box.interval("z")}), box,
                                                budget=budget, jobs=jobs)]


def verify_equivalence(inst: PqmInstance, budget: int = DEFAULT_BUDGET, jobs: int = 1,
                       boxes: dict | None = None) -> dict:
    boxes = boxes or certified_boxes(inst)
    phi_set = solution_set(build_phi_prime(inst), (inst.p, inst.q, inst.M), boxes["phi_prime"], budget, jobs)
    t1, t2, psi = build_psi(inst)
    psi_set = solution_set(psi, (t1, t2), boxes["psi"], budget, jobs)
    ref = reference_set(inst)
    return {
        "p": inst.p, "q": inst.q, "M": inst.M, "t1": t1, "t2": t2,
        "sail": [list(pt) for pt in sail(inst).points],
        "residues": sorted(residues_on_sail(inst)),
        "phi_prime_set": phi_set,
        "psi_set": psi_set,
        "reference_set": ref,
        "pass": phi_set == psi_set == ref,
    }


def psi_prime_set(inst: PqmInstance, budget: int = DEFAULT_BUDGET, jobs: int = 1) -> list[int]:
    return solution_set(build_psi_prime(inst), (inst.t1, inst.t2), certified_boxes(inst)["psi"], budget, jobs)


# -- AP-COVER -------------------------------------------------------------------


@dataclass(frozen=True)
class ApCoverInstance:
    mu: int
    nu: int
    progressions: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        if not 1 <= self.mu <= self.nu:
            raise UsageError(f"need 1 <= mu <= nu, got mu={self.mu}, nu={self.nu}")
        aps = tuple(tuple(int(x) for x in ap) for ap in self.progressions)
        for g, h, e in aps:
            if h < 1:
                raise UsageError(f"progression length h must be >= 1, got {h}")
        object.__setattr__(self, "progressions", aps)

    @staticmethod
    def from_json(data) -> ApCoverInstance:
        if isinstance(data, str):
            data = json.loads(data)
        try:
            aps = tuple((int(a["g"]), int(a["h"]), int(a["e"])) for a in data.get("aps", []))
            return ApCoverInstance(int(data["mu"]), int(data["nu"]), aps)
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"bad AP-COVER instance: {exc}") from exc

    def to_json(self) -> dict:
        return {"mu": self.mu, "nu": self.nu,
                "aps": [{"g": g, "h": h, "e": e} for g, h, e in self.progressions]}


def apcover_union(inst: ApCoverInstance) -> set[int]:
    out = set()
    for g, h, e in inst.progressions:
        for i in range(h + 1):
            z = g + i * e
            if inst.mu <= z <= inst.nu:
                out.add(z)
    return out


def apcover_decide(inst: ApCoverInstance) -> bool:
    """True iff some z in [mu, nu] is not covered."""
    return len(apcover_union(inst)) < inst.nu - inst.mu + 1


def alternation_report(inst: PqmInstance) -> dict:
    return {"phi_prime": str(classify_alternation(build_phi_prime(inst))),
            "psi": str(classify_alternation(build_psi(inst)[2]))}
