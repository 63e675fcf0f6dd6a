"""Command-line front end.

Exit codes: 0 success, 1 a checked property is false, 2 usage or parse
error, 3 resource limit.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import ParseError, PPAError, ResourceLimit, UsageError
from .formula import Formula, classify_alternation, substitute_params

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3


class _Fail(Exception):
    """A verification finished and reported failure."""


# -- helpers ------------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from None


def _load_formula(path: str, unordered: bool = False) -> Formula:
    from .parser import parse

    try:
        return parse(_read(path), unordered=unordered)
    except ParseError as e:
        raise ParseError(f"{path}:{e}") from None


def _load_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON: {e}") from None


def _param_values(f: Formula, text: str | None) -> tuple:
    vals = {}
    if text:
        for part in text.split(","):
            name, sep, val = part.partition("=")
            name = name.strip()
            if not sep:
                raise UsageError(f"bad --set item {part!r}; expected name=value")
            try:
                vals[name] = int(val)
            except ValueError:
                raise UsageError(f"bad value for {name}: {val!r}") from None
    unknown = set(vals) - set(f.params)
    if unknown:
        raise UsageError(f"unknown parameters {sorted(unknown)}")
    missing = [p for p in f.params if p not in vals]
    if missing:
        raise UsageError(f"missing parameter values for {missing}")
    return tuple(vals[p] for p in f.params)


def _ground(args, unordered=False) -> Formula:
    f = _load_formula(args.file, unordered)
    return substitute_params(f, _param_values(f, args.set))


def _box(text: str | None, default: str | None = None):
    from .oracle import parse_box

    text = text or default
    if text is None:
        raise UsageError("a box is required (e.g. 0..30 or x=0..5,y=-2..2)")
    return parse_box(text)


def _range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        return range(int(lo), int(hi) + 1)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected lo..hi") from None


def _emit(obj):
    print(json.dumps(obj, indent=2, ensure_ascii=False))


def _instance(args):
    from .gadgets import PqmInstance

    return PqmInstance(args.p, args.q, args.M)


# -- commands --------------------------------------------------------------------------


def cmd_parse(args):
    from .parser import render_file

    f = _load_formula(args.file, args.unordered)
    sys.stdout.write(render_file(f))
    if args.alternation:
        print(f"# alternation: {classify_alternation(f)}")


def cmd_count(args):
    from .oracle import count_bounded

    g = _ground(args)
    print(count_bounded(g, _box(args.free_box), _box(args.quant_box, args.free_box),
                        budget=args.budget, jobs=args.jobs))


def cmd_enumerate(args):
    from .oracle import enumerate_solutions

    g = _ground(args)
    for pt in enumerate_solutions(g, _box(args.free_box), _box(args.quant_box, args.free_box),
                                  budget=args.budget, jobs=args.jobs):
        print(" ".join(map(str, pt)))


def cmd_decide(args):
    g = _ground(args)
    if args.box:
        from .oracle import decide_bounded

        res = decide_bounded(g, _box(args.box), budget=args.budget)
    else:
        from .cooper import decide_sentence

        if g.free:
            raise UsageError("exact decision needs a sentence; pass --box for bounded mode")
        res = decide_sentence(g)
    print("true" if res else "false")


def cmd_gadget(args):
    from .parser import render_file

    if args.which == "verify":
        from .gadgets import alternation_report, verify_equivalence

        inst = _instance(args)
        rep = verify_equivalence(inst, budget=args.budget, jobs=args.jobs)
        rep["alternation"] = alternation_report(inst)
        _emit(rep)
        if not rep["pass"]:
            raise _Fail()
        return
    if args.which == "sail":
        from .gadgets import residues_on_sail, sail

        inst = _instance(args)
        _emit({"p": inst.p, "q": inst.q, "M": inst.M,
               "sail": [list(pt) for pt in sail(inst).points],
               "residues": sorted(residues_on_sail(inst))})
        return
    from .gadgets import build_phi_prime, build_psi, build_psi_prime

    if args.which == "phi":
        f = build_phi_prime()
    else:
        inst = _instance(args)
        f = build_psi(inst)[2] if args.which == "psi" else build_psi_prime(inst)
    sys.stdout.write(render_file(f))


def cmd_apcover(args):
    from .gadgets import ApCoverInstance, apcover_decide

    inst = ApCoverInstance.from_json(_load_json(args.file))
    print("true" if apcover_decide(inst) else "false")


def cmd_reduce(args):
    from .universal import BoundSpec, reduce, verify_counting_reduction

    f = _load_formula(args.file)
    b = BoundSpec.from_json(_load_json(args.bounds), f.params)
    u = _param_values(f, args.set)
    if args.emit:
        from .parser import render_file

        red = reduce(f, b, u, args.eta)
        print(f"# s = {red.s}")
        print(f"# t = {red.t}")
        sys.stdout.write(render_file(red.psi))
        return
    rep = verify_counting_reduction(f, b, u, args.eta, budget=args.budget, jobs=args.jobs)
    _emit(rep)
    if not rep["pass"]:
        raise _Fail()


def _radius(f, text):
    from .poly import parse_poly

    p = parse_poly(text, f.params)
    return lambda t: p.eval((t,))


def cmd_eqp(args):
    from .eqp import QuasiPolynomial, fit_eqp, oracle_counter, verify_fit

    f = _load_formula(args.file)
    if f.arity != 1:
        raise UsageError("EQP commands need a 1-parametric formula")
    rad = _radius(f, args.radius)
    qrad = _radius(f, args.quant_radius) if args.quant_radius else None
    counter = oracle_counter(f, rad, qrad, budget=args.budget)
    ts = _range(args.range)
    if args.which == "fit":
        samples = [(t, counter(t)) for t in ts]
        side = "negative" if ts and ts[-1] < 0 else "positive"
        q = fit_eqp(samples, args.max_period, args.max_degree, side)
        if q is None:
            print("no fit")
            raise _Fail()
        _emit(q.to_json())
        return
    if not args.eqp:
        raise UsageError("eqp verify needs --eqp FILE")
    q = QuasiPolynomial.from_json(_load_json(args.eqp))
    ok = verify_fit(q, counter, ts)
    print("pass" if ok else "fail")
    if not ok:
        raise _Fail()


def cmd_unordered(args):
    from .unordered import count_unordered, decide_finite, decide_nonempty

    f = _load_formula(args.file, unordered=True)
    t = _param_values(f, args.set)
    if args.which == "count":
        print(count_unordered(f, t))
    elif args.which == "nonempty":
        print("true" if decide_nonempty(f, t) else "false")
    else:
        print(decide_finite(f, t))


def cmd_qe(args):
    g = _ground(args)
    if args.which == "cooper":
        from .cooper import qe
        from .parser import render_file

        sys.stdout.write(render_file(qe(g)))
        return
    from .cooper import growth_report

    before, after, ok = growth_report(g)
    _emit({"before": before.to_json(), "after": after.to_json(), "bound_ok": ok})
    if not ok:
        raise _Fail()


def cmd_sweep(args):
    """Seeded randomized cross-checks against the bounded oracle."""
    from . import checks

    fn = {"cooper": checks.cooper_sweep, "unordered": checks.unordered_sweep,
          "formulas": checks.formula_sweep}[args.which]
    rep = fn(args.count, args.seed)
    _emit(rep)
    if rep["failures"]:
        raise _Fail()


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ppa", description="Parametric Presburger arithmetic toolkit.")
    ap.add_argument("--version", action="version", version=f"ppa {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, params=True, jobs=False):
        if params:
            p.add_argument("--set", help="parameter values, e.g. t1=4,t2=6")
        p.add_argument("--budget", type=int, default=10**8, help="oracle node budget")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("parse", help="parse and print a formula in canonical form")
    p.add_argument("file")
    p.add_argument("--unordered", action="store_true", help="reject order comparisons")
    p.add_argument("--alternation", action="store_true", help="also print the alternation class")
    p.set_defaults(func=cmd_parse)

    for name, func, hlp in [("count", cmd_count, "count solutions in a box"),
                            ("enumerate", cmd_enumerate, "list solutions in a box")]:
        p = sub.add_parser(name, help=hlp)
        p.add_argument("file")
        p.add_argument("--free-box", required=True)
        p.add_argument("--quant-box", help="box for quantified variables (default: free box)")
        common(p, jobs=True)
        p.set_defaults(func=func)

    p = sub.add_parser("decide", help="decide a sentence (exact) or a formula on a box")
    p.add_argument("file")
    p.add_argument("--box", help="bounded mode: box for every variable")
    common(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("gadget", help="hardness gadget formulas and checks")
    p.add_argument("which", choices=["phi", "psi", "psi-prime", "verify", "sail"])
    p.add_argument("--p", type=int, default=7)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--M", type=int, default=5)
    common(p, params=False, jobs=True)
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("apcover", help="AP-COVER instances")
    p.add_argument("which", choices=["decide"])
    p.add_argument("file")
    p.set_defaults(func=cmd_apcover)

    p = sub.add_parser("reduce", help="counting reduction to two parameters")
    p.add_argument("which", choices=["universal"])
    p.add_argument("file")
    p.add_argument("--bounds", required=True, help="bound spec JSON file")
    p.add_argument("--eta", choices=["numeric", "certified"], default="numeric")
    p.add_argument("--emit", action="store_true", help="print the reduced formula instead of verifying")
    common(p, jobs=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("eqp", help="eventual quasi-polynomial fitting")
    p.add_argument("which", choices=["fit", "verify"])
    p.add_argument("file")
    p.add_argument("--range", required=True, help="parameter range lo..hi")
    p.add_argument("--radius", required=True, help="polynomial in the parameter bounding free variables")
    p.add_argument("--quant-radius", help="polynomial bounding quantified variables")
    p.add_argument("--max-period", type=int, default=6)
    p.add_argument("--max-degree", type=int, default=3)
    p.add_argument("--eqp", help="EQP JSON file (verify)")
    common(p, params=False)
    p.set_defaults(func=cmd_eqp)

    p = sub.add_parser("unordered", help="order-free fragment algorithms")
    p.add_argument("which", choices=["count", "nonempty", "finite"])
    p.add_argument("file")
    p.add_argument("--set", help="parameter values, e.g. t1=3,t2=5")
    p.set_defaults(func=cmd_unordered)

    p = sub.add_parser("qe", help="Cooper quantifier elimination")
    p.add_argument("which", choices=["cooper", "growth"])
    p.add_argument("file")
    p.add_argument("--set", help="parameter values")
    p.set_defaults(func=cmd_qe)

    p = sub.add_parser("sweep", help="seeded randomized cross-checks")
    p.add_argument("which", choices=["cooper", "unordered", "formulas"])
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        args.func(args)
    except _Fail:
        return EXIT_FAIL
    except ResourceLimit as e:
        print(f"ppa: resource limit: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except (UsageError, PPAError) as e:
        print(f"ppa: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
