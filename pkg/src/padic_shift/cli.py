"""Command-line front end.

Exit status: 0 on success or a passing verdict, 1 on a failing verdict,
2 on usage, parse or precision errors.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .conjugacy import phi_digits, phi_table, verify_bijectivity_on_residues, verify_conjugacy
from .errors import PadicError, ParseError, PreconditionFailed, ScalingAssumptionViolated
from .mahler import (
    binom_eval,
    binomial_series,
    empirical_lipschitz,
    evaluate_series,
    read_mahler_file,
)
from .maps import ResidueMap
from .padic_core import (
    PadicInt,
    chop,
    distance,
    encode_integer,
    first_difference,
    format_padic_int,
    hensel_lift,
    parse_padic_int,
    parse_padic_number,
    qp_scale,
    ring_arithmetic,
    unit_invert,
    is_prime,
    vp,
)
from .scaling_dynamics import (
    class_check,
    iterated_preimage,
    iterated_preimage_structure,
    mixing_measure,
    parse_ball,
    perturbation_check,
    preimage_ball,
    verify_locally_scaling,
)
from .shift_maps import (
    ChopMap,
    ShiftMap,
    WoodcockSmartMap,
    f_a_apply,
    shift_iterate,
    shift_mahler_direct,
    shift_mahler_series,
    verify_coefficient_theorem,
    woodcock_smart,
)

SCHEMA = "padic-shift/1"


class UsageError(Exception):
    pass


@dataclass
class CommandConfig:
    prime: int
    json: bool
    workers: int
    precision: int
    map_spec: Optional[str] = None


def prime(text: str) -> int:
    p = int(text)
    if not is_prime(p):
        raise ValueError(text)
    return p


def render_rational(q: Fraction, p: int) -> str:
    """num/p^e for a rational whose denominator is a power of p."""
    e = vp(q.denominator, p) or 0
    if q.denominator != p**e:
        return f"{q.numerator}/{q.denominator}"
    return f"{q.numerator}/{p}^{e}"


def build_map(spec: str, cfg: CommandConfig) -> ResidueMap:
    p = cfg.prime
    kind, _, arg = spec.partition(":")
    try:
        if kind == "shift":
            return ShiftMap(p, int(arg) if arg else 1)
        if kind == "mahler":
            if not arg:
                raise UsageError("mahler map needs a file path: mahler:PATH")
            return read_mahler_file(arg, p, cfg.precision)
        if kind == "binom":
            return binomial_series(p, int(arg), cfg.precision)
        if kind == "fa":
            v, sep, digits = arg.partition(";")
            if not sep:
                raise ParseError(f"f_a parameter must be 'v;digits', got {arg!r}", token=arg)
            a = parse_padic_number(f"v={int(v)};{p}adic:{digits}", p)
            return ChopMap(a)
        if kind in ("woodcock-smart", "ws"):
            return WoodcockSmartMap(p)
    except OSError as exc:
        raise UsageError(f"cannot read {arg!r}: {exc.strerror}") from exc
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"bad map specification {spec!r}: {exc}", token=spec) from exc
    raise ParseError(f"unknown map kind {kind!r}", token=kind)


def parse_value(text: str, cfg: CommandConfig, digits: int) -> PadicInt:
    try:
        return encode_integer(int(text), cfg.prime, digits)
    except ValueError:
        return parse_padic_int(text, cfg.prime)


# -- subcommands; each returns (exit code, payload dict, human text) ------------------

def cmd_shift_coeffs(a, cfg):
    p = cfg.prime
    out = {"prime": p, "k": a.k, "Nmax": a.nmax, "j": a.j}
    direct = shift_mahler_direct(p, a.k, a.nmax, a.j) if a.method in ("direct", "both") else None
    series = shift_mahler_series(p, a.k, a.nmax, a.j) if a.method in ("series", "both") else None
    coeffs = direct if direct is not None else series
    out["coefficients"] = coeffs
    code = 0
    if direct is not None and series is not None:
        agree = direct == series
        out["algorithms_agree"] = agree
        code = 0 if agree else 1
    text = "\n".join(f"a_{n} = {c} mod {p}^{a.j}" for n, c in enumerate(coeffs))
    return code, out, text


def cmd_verify_theorem(a, cfg):
    r = verify_coefficient_theorem(cfg.prime, a.k, a.nmax, a.jmax)
    clauses = [{"clause": c.name, "passed": c.passed, "witness": c.witness} for c in r.clauses]
    out = {"prime": r.prime, "k": r.k, "Nmax": r.nmax, "j": r.j, "clauses": clauses,
           "witnesses": [c.witness for c in r.clauses if not c.passed],
           "corollary": {"max_weight_exponent": r.corollary_max_exponent,
                         "maximizers": list(r.corollary_maximizers)},
           "passed": r.passed}
    text = "\n".join(f"{'PASS' if c.passed else 'FAIL'}  {c.name}"
                     + ("" if c.passed else f"  (n = {c.witness})") for c in r.clauses)
    return (0 if r.passed else 1), out, text


def cmd_class_check(a, cfg):
    s = build_map(a.map, cfg)
    if not hasattr(s, "terms"):
        raise UsageError("class-check needs a mahler:PATH or binom:n map")
    r = class_check(s)
    out = {"prime": r.prime, "series": r.series_name,
           "weights": {str(n): render_rational(Fraction(r.prime) ** w, r.prime)
                       for n, w in sorted(r.weights.items())},
           "C": None if r.C is None else render_rational(r.C, r.prime),
           "maximizers": list(r.maximizers), "member": r.member,
           "failed_clause": r.failed_clause, "k": r.k}
    text = (f"member, k = {r.k}" if r.member else f"not a member: {r.failed_clause} fails")
    return (0 if r.member else 1), out, text


def _scaling_payload(r):
    return {"map": r.map_name, "prime": r.prime, "k": r.k, "M": r.modulus_exponent,
            "r": render_rational(r.radius, r.prime), "C": r.constant,
            "passed": r.passed,
            "witnesses": [list(r.counterexample)] if r.counterexample else [],
            "band": list(r.band), "pairs_checked": r.pairs_checked}


def cmd_scaling_check(a, cfg):
    T = build_map(a.map, cfg)
    if a.lipschitz:
        r = empirical_lipschitz(T, a.M, cfg.workers)
        out = {"map": T.name, "prime": r.prime, "M": r.modulus_exponent,
               "exponent": r.exponent, "witnesses": [list(r.witness)] if r.witness else []}
        return 0, out, f"measured Lipschitz exponent {r.exponent}, witness {r.witness}"
    if a.perturb:
        S = build_map(a.perturb, cfg)
        u = parse_value(a.unit, cfg, a.M)
        try:
            r = perturbation_check(T, S, u, a.k, a.dexp, a.M)
        except PreconditionFailed as exc:
            out = {"map": T.name, "precondition_failed": str(exc), "passed": False}
            return 1, out, f"precondition failed: {exc}"
    else:
        r = verify_locally_scaling(T, a.k, a.M, cfg.workers)
    text = ("pass" if r.passed else f"fail, witness pair {r.counterexample}")
    return (0 if r.passed else 1), _scaling_payload(r), text


def cmd_preimage(a, cfg):
    T = build_map(a.map, cfg)
    B = parse_ball(a.ball, cfg.prime)
    try:
        if a.step is not None:
            balls = iterated_preimage(T, B, a.n, a.step)
        elif a.n == 1:
            balls = preimage_ball(T, a.k, B)
        else:
            balls = list(iterated_preimage_structure(T, a.k, B, a.n).balls)
    except ScalingAssumptionViolated as exc:
        return 1, {"map": T.name, "ball": B.short(), "passed": False, "error": str(exc)}, str(exc)
    shorts = [b.short() for b in balls]
    out = {"map": T.name, "prime": cfg.prime, "ball": B.short(), "n": a.n,
           "balls": shorts, "passed": True,
           "measure": render_rational(sum((b.measure for b in balls), Fraction(0)), cfg.prime)}
    return 0, out, ", ".join(shorts)


def cmd_mixing(a, cfg):
    T = build_map(a.map, cfg)
    U, V = parse_ball(a.U, cfg.prime), parse_ball(a.V, cfg.prime)
    try:
        r = mixing_measure(T, a.k, U, V, a.n)
    except ScalingAssumptionViolated as exc:
        return 1, {"map": T.name, "passed": False, "error": str(exc)}, str(exc)
    p = cfg.prime
    ok = r.holds or not r.identity_asserted
    out = {"map": T.name, "prime": p, "k": a.k, "U": U.short(), "V": V.short(), "n": a.n,
           "measure": render_rational(r.measure, p), "product": render_rational(r.product, p),
           "identity_asserted": r.identity_asserted, "passed": ok}
    text = f"mu = {out['measure']}, mu(U)mu(V) = {out['product']}"
    if not r.identity_asserted:
        text += " (n < l: identity not asserted)"
    return (0 if ok else 1), out, text


def cmd_conjugacy(a, cfg):
    T = build_map(a.map, cfg)
    p = cfg.prime
    out = {"map": T.name, "prime": p, "k": a.k, "M": a.M}
    lines = []
    if a.x:
        x = parse_value(a.x, cfg, a.M + a.k)
        phi = phi_digits(T, a.k, x, a.M)
        out["phi"] = format_padic_int(phi)
        lines.append(f"Phi({format_padic_int(x)}) = {out['phi']}")
    if a.table:
        tab = phi_table(T, a.k, a.M, a.M + a.k, cfg.workers)
        rows = [[format_padic_int(PadicInt(p, a.M + a.k, x)),
                 format_padic_int(PadicInt(p, a.M, int(tab[x])))]
                for x in range(min(a.table, tab.size))]
        out["table"] = rows
        lines.extend(f"{x} -> {y}" for x, y in rows)
    c = verify_conjugacy(T, a.k, a.M, cfg.workers)
    b = verify_bijectivity_on_residues(T, a.k, a.M, cfg.workers)
    witnesses = {**c.witnesses, **b.witnesses}
    out.update({"conjugation": c.conjugation_passed, "bijectivity": b.bijectivity_passed,
                "witnesses": witnesses, "passed": c.passed and b.passed})
    lines.append(f"conjugation {'pass' if c.conjugation_passed else 'fail'}, "
                 f"bijectivity {'pass' if b.bijectivity_passed else 'fail'}")
    if witnesses:
        lines.append(f"witnesses: {witnesses}")
    return (0 if out["passed"] else 1), out, "\n".join(lines)


def cmd_hensel(a, cfg):
    try:
        coeffs = [int(c) for c in a.coeffs.split(",")]
    except ValueError:
        raise ParseError(f"bad coefficient list {a.coeffs!r}", token=a.coeffs)
    alpha = hensel_lift(coeffs, a.r0, cfg.prime, a.N)
    out = {"prime": cfg.prime, "N": a.N, "coefficients": coeffs, "r0": a.r0,
           "root": format_padic_int(alpha), "residue": alpha.residue}
    return 0, out, f"{format_padic_int(alpha)}  (= {alpha.residue} mod {cfg.prime}^{a.N})"


def cmd_eval(a, cfg):
    p = cfg.prime
    if a.map:
        T = build_map(a.map, cfg)
        x = parse_value(a.x, cfg, a.digits)
        if isinstance(T, ShiftMap):
            y = shift_iterate(x, T.k)
        elif isinstance(T, ChopMap):
            y = f_a_apply(x, T.a)
        elif isinstance(T, WoodcockSmartMap):
            y = woodcock_smart(x)
        else:
            y = evaluate_series(T, x)
        return 0, {"map": T.name, "x": str(x), "value": str(y)}, str(y)
    op = a.op
    if op is None:
        raise UsageError("eval needs --map or --op")
    if op == "chop":
        y = chop(parse_padic_number(a.x, p))
        return 0, {"op": op, "value": str(y)}, str(y)
    x = parse_value(a.x, cfg, a.digits)
    if op in ("add", "sub", "mul"):
        y = ring_arithmetic(x, parse_value(a.y, cfg, a.digits), op)
    elif op == "encode":
        y = x
    elif op == "invert":
        y = unit_invert(x)
    elif op == "distance":
        other = parse_value(a.y, cfg, a.digits)
        k = first_difference(x, other)
        exact = k < min(x.precision, other.precision)
        d = distance(x, other)
        out = {"op": op, "first_difference": k, "exact": exact,
               "distance": render_rational(d, p)}
        return 0, out, f"{'' if exact else '<= '}{render_rational(d, p)}"
    elif op == "binom":
        y = binom_eval(x, a.n)
    elif op == "scale":
        y = qp_scale(x, parse_padic_number(a.a, p))
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown op {op}")
    return 0, {"op": op, "value": str(y)}, str(y)


# -- argument parsing ----------------------------------------------------------------

def _common(sp, need_map=False):
    sp.add_argument("-p", "--prime", type=prime, required=True)
    sp.add_argument("--json", action="store_true", help="machine-readable output")
    sp.add_argument("--workers", type=int, default=1, help="scan partitions (output unchanged)")
    sp.add_argument("--precision", type=int, default=64,
                    help="digits used for integer Mahler coefficients")
    if need_map:
        sp.add_argument("--map", required=True,
                        help="shift[:k] | mahler:PATH | binom:n | fa:V;DIGITS | woodcock-smart")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="padic-shift",
                                     description="Exact checks for p-adic shift dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("shift-coeffs", help="Mahler coefficients of S^k mod p^j")
    _common(sp)
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("--nmax", type=int, required=True)
    sp.add_argument("-j", type=int, required=True)
    sp.add_argument("--method", choices=["direct", "series", "both"], default="both")
    sp.set_defaults(func=cmd_shift_coeffs)

    sp = sub.add_parser("verify-theorem", help="check the shift coefficient clauses")
    _common(sp)
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("--nmax", type=int, required=True)
    sp.add_argument("--jmax", type=int, required=True)
    sp.set_defaults(func=cmd_verify_theorem)

    sp = sub.add_parser("class-check", help="Mahler-Bernoulli class membership")
    _common(sp, need_map=True)
    sp.set_defaults(func=cmd_class_check)

    sp = sub.add_parser("scaling-check", help="locally scaling / Lipschitz / perturbation")
    _common(sp, need_map=True)
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("-M", type=int, required=True)
    sp.add_argument("--lipschitz", action="store_true", help="report the measured Lipschitz exponent")
    sp.add_argument("--perturb", help="map S for u*T + S")
    sp.add_argument("--unit", default="1", help="unit u for u*T + S")
    sp.add_argument("--dexp", type=int, default=0, help="claimed Lipschitz exponent of S")
    sp.set_defaults(func=cmd_scaling_check)

    sp = sub.add_parser("preimage", help="preimages of a ball")
    _common(sp, need_map=True)
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("--ball", required=True, help="c/m meaning c + p^m Z_p")
    sp.add_argument("-n", type=int, default=1)
    sp.add_argument("--step", type=int, help="resolution digits per step; skips structure checks")
    sp.set_defaults(func=cmd_preimage)

    sp = sub.add_parser("mixing", help="mu(T^-n(U) & V) against mu(U) mu(V)")
    _common(sp, need_map=True)
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("--U", required=True)
    sp.add_argument("--V", required=True)
    sp.add_argument("-n", type=int, required=True)
    sp.set_defaults(func=cmd_mixing)

    sp = sub.add_parser("conjugacy", help="verify Phi o T = S^k o Phi")
    _common(sp, need_map=True)
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("-M", type=int, required=True)
    sp.add_argument("--x", help="print Phi(x) to M digits")
    sp.add_argument("--table", type=int, default=0, help="print Phi for the first N residues")
    sp.set_defaults(func=cmd_conjugacy)

    sp = sub.add_parser("hensel", help="lift a simple root of a polynomial")
    _common(sp)
    sp.add_argument("--coeffs", required=True, help="c0,c1,... for c0 + c1 x + ...")
    sp.add_argument("--r0", type=int, required=True)
    sp.add_argument("-N", type=int, required=True)
    sp.set_defaults(func=cmd_hensel)

    sp = sub.add_parser("eval", help="evaluate a map or a ring operation")
    _common(sp)
    sp.add_argument("--map")
    sp.add_argument("--op", choices=["encode", "add", "sub", "mul", "invert", "distance",
                                     "binom", "chop", "scale"])
    sp.add_argument("--x", required=True)
    sp.add_argument("--y")
    sp.add_argument("--a", help="Q_p multiplier 'v=<int>;<p>adic:...' for --op scale")
    sp.add_argument("-n", type=int, default=0)
    sp.add_argument("--digits", type=int, default=16, help="precision for integer inputs")
    sp.set_defaults(func=cmd_eval)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = make_parser()
    try:
        with contextlib.redirect_stderr(stderr), contextlib.redirect_stdout(stdout):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = CommandConfig(args.prime, args.json, args.workers, args.precision,
                        getattr(args, "map", None))
    try:
        code, payload, text = args.func(args, cfg)
    except ParseError as exc:
        print(f"padic-shift: error: {exc} (offending token: {exc.token!r})", file=stderr)
        return 2
    except (UsageError, PadicError, ValueError) as exc:
        print(f"padic-shift: error: {exc}", file=stderr)
        return 2
    if cfg.json:
        doc = {"schema": SCHEMA, "command": args.command, **payload}
        print(json.dumps(doc, indent=2), file=stdout)
    else:
        print(text, file=stdout)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
