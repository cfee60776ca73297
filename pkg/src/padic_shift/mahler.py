"""Mahler basis maps x -> C(x, n), coefficient extraction and Lipschitz scans."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import ParseError, PrecisionExhausted, PrimeMismatch
from .maps import ResidueMap
from .padic_core import (
    PadicInt,
    PadicNumber,
    check_prime,
    format_padic_number,
    parse_padic_number,
    vp,
    vp_factorial,
)


def binom_eval(x: PadicInt, n: int) -> PadicInt:
    """C(x, n) to precision(x) - v_p(n!) digits.

    The falling factorial is formed at the full input precision and then
    divided exactly by n! = p**e * f, f a unit.
    """
    p = x.prime
    if n == 0:
        return PadicInt(p, x.precision, 1)
    e = vp_factorial(n, p)
    out = x.precision - e
    if out < 1:
        raise PrecisionExhausted(
            f"C(x,{n}) needs more than {e} digits, x has {x.precision}")
    work = p**x.precision
    prod = 1
    for i in range(n):
        prod = prod * (x.residue - i) % work
    f = 1
    for i in range(1, n + 1):
        f *= i
    f //= p**e
    q = p**out
    return PadicInt(p, out, (prod // p**e) * pow(f, -1, q) % q)


def mahler_coefficients(values: Sequence[PadicInt], nmax: Optional[int] = None) -> list[PadicInt]:
    """a_n = sum_i (-1)**(n+i) C(n, i) T(i) for n = 0 .. nmax."""
    if not values:
        return []
    nmax = len(values) - 1 if nmax is None else nmax
    if nmax >= len(values):
        raise ValueError(f"need T(0..{nmax}), got {len(values)} values")
    p = values[0].prime
    prec = values[0].precision
    for v in values[: nmax + 1]:
        if v.prime != p:
            raise PrimeMismatch("values must share one prime")
        if v.precision != prec:
            raise ValueError("values must share one precision")
    q = p**prec
    ts = [v.residue for v in values[: nmax + 1]]
    return [PadicInt(p, prec, c % q) for c in finite_differences(ts)]


def finite_differences(ts: Sequence[int]) -> list[int]:
    """Exact integer a_n from exact integer samples T(0), T(1), ..."""
    out = []
    for n in range(len(ts)):
        acc, b = 0, 1
        for i in range(n + 1):
            acc += (-1) ** (n + i) * b * ts[i]
            b = b * (n - i) // (i + 1)
        out.append(acc)
    return out


@dataclass(frozen=True, eq=True)
class MahlerSeries(ResidueMap):
    """A finite sum of A_n C(x, n); exact zeros are simply absent from `terms`."""

    prime: int
    terms: tuple[tuple[int, PadicNumber], ...]
    name: str = field(default="mahler", compare=False)

    def __post_init__(self):
        check_prime(self.prime)
        seen = set()
        for n, a in self.terms:
            if n < 0 or n in seen:
                raise ValueError(f"bad or repeated index {n}")
            seen.add(n)
            if a.prime != self.prime:
                raise PrimeMismatch(f"coefficient {n} has prime {a.prime}")
            if not a.is_zero and a.valuation < 0:
                raise ValueError(f"|A_{n}| > 1: series would leave Z_p")
        object.__setattr__(self, "terms", tuple(sorted(self.terms)))

    @classmethod
    def from_integers(cls, p: int, coeffs: Mapping[int, int], precision: int = 64,
                      name: str = "mahler") -> "MahlerSeries":
        terms = tuple((n, PadicNumber.from_rational(c, p, precision))
                      for n, c in coeffs.items() if c != 0)
        return cls(p, terms, name)

    @property
    def degree(self) -> int:
        return max((n for n, _ in self.terms), default=0)

    @property
    def absolute_precision(self) -> Optional[int]:
        """Values are known modulo p**this; None for the exact zero series."""
        return min((a.absolute_precision for _, a in self.terms), default=None)

    def coefficient(self, n: int) -> Optional[PadicNumber]:
        for m, a in self.terms:
            if m == n:
                return a
        return None

    def _coeff_residues(self, w: int) -> list[tuple[int, int]]:
        prec = self.absolute_precision
        if prec is not None and w > prec:
            raise PrecisionExhausted(f"coefficients known mod p^{prec}, asked for p^{w}")
        return [(n, a.residue_mod(w)) for n, a in self.terms]

    def value(self, r, w):
        q = self.prime**w
        return sum(c * comb(r, n) for n, c in self._coeff_residues(w)) % q

    def _bulk(self, m, w):
        # column n of C(x, n) is the shifted running sum of column n - 1
        q = self.prime**w
        size = self.prime**m
        coeffs = dict(self._coeff_residues(w))
        out = np.zeros(size, dtype=np.int64)
        col = np.ones(size, dtype=np.int64) % q
        for n in range(self.degree + 1):
            if n > 0:
                nxt = np.zeros(size, dtype=np.int64)
                np.cumsum(col[:-1], out=nxt[1:])
                col = nxt % q
            c = coeffs.get(n, 0)
            if c:
                out = (out + c * col) % q
        return out


def evaluate_series(s: MahlerSeries, x: PadicInt) -> PadicInt:
    if x.prime != s.prime:
        raise PrimeMismatch("series and argument primes differ")
    p = s.prime
    total, prec = 0, x.precision
    for n, a in s.terms:
        if a.is_zero:
            prec = min(prec, a.valuation)
            continue
        b = binom_eval(x, n)
        prec = min(prec, a.valuation + min(b.precision, a.unit.precision))
        total += a.unit.residue * p**a.valuation * b.residue
    if prec < 1:
        raise PrecisionExhausted("series value has no known digit")
    return PadicInt(p, prec, total % p**prec)


def lipschitz_bound(n: int, p: int) -> int:
    """floor(log_p n); 0 for n = 0 by convention (C(x, 0) is constant)."""
    e = 0
    while p ** (e + 1) <= n:
        e += 1
    return e


@dataclass(frozen=True)
class LipschitzReport:
    prime: int
    modulus_exponent: int
    exponent: Optional[int]
    witness: Optional[tuple[int, int]]
    per_level: tuple[Optional[int], ...] = ()

    @property
    def constant(self):
        """Measured Lipschitz constant p**exponent (None for a constant map)."""
        return None if self.exponent is None else self.prime**self.exponent


def _level_min_valuation(t: np.ndarray, p: int, m: int, v: int):
    """Smallest v_p(T(x) - T(y)) over pairs x = y mod p**v, capped at m."""
    q = p**m
    idx = np.arange(t.size, dtype=np.int64) % p**v
    d = (t - t[idx]) % q
    g = int(np.gcd.reduce(d))
    if g == 0:
        return m, None
    low = vp(g, p)
    x = int(np.flatnonzero(d % p ** (low + 1))[0])
    return low, (x % p**v, x)


def empirical_lipschitz(T: ResidueMap, m: int, workers: int = 1) -> LipschitzReport:
    """Max of v_p(x-y) - v_p(T(x)-T(y)) over all residue pairs mod p**m.

    Pairs sharing their first v digits are handled together: the minimum of
    v_p(T(x)-T(y)) over them is the valuation of a gcd.  Returns exponent
    None when T is constant modulo p**m.
    """
    p = T.prime
    t = T.table(m, m)
    levels = range(m)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        found = list(pool.map(lambda v: _level_min_valuation(t, p, m, v), levels))
    best, witness, per_level = None, None, []
    for v, (low, pair) in zip(levels, found):
        if pair is None:
            per_level.append(None)
            continue
        per_level.append(v - low)
        if best is None or v - low > best:
            best, witness = v - low, pair
    return LipschitzReport(p, m, best, witness, tuple(per_level))


# -- file format -------------------------------------------------------------

def parse_mahler_text(text: str, p: int, precision: int = 64,
                      name: str = "mahler") -> MahlerSeries:
    """Lines "n value", value an integer or a digit string; '#' starts a comment."""
    terms = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if len(parts) != 2 or not parts[0].isdigit():
            raise ParseError(f"line {lineno}: expected 'n value', got {raw!r}",
                             token=parts[0] if parts else raw)
        n, val = int(parts[0]), parts[1].strip()
        if n in terms:
            raise ParseError(f"line {lineno}: index {n} repeated", token=parts[0])
        try:
            c = int(val)
        except ValueError:
            a = parse_padic_number(val, p)
        else:
            if c == 0:
                continue
            a = PadicNumber.from_rational(c, p, precision)
        terms[n] = a
    return MahlerSeries(p, tuple(terms.items()), name)


def format_mahler_series(s: MahlerSeries) -> str:
    return "".join(f"{n} {format_padic_number(a)}\n" for n, a in s.terms)


def read_mahler_file(path, p: int, precision: int = 64) -> MahlerSeries:
    path = Path(path)
    return parse_mahler_text(path.read_text(), p, precision, name=f"mahler:{path.name}")


def binomial_series(p: int, n: int, precision: int = 64) -> MahlerSeries:
    """The single basis map x -> C(x, n)."""
    return MahlerSeries.from_integers(p, {n: 1}, precision, name=f"C(x,{n})")


def series_from_terms(p: int, pairs: Iterable[tuple[int, int]], precision: int = 64,
                      name: str = "mahler") -> MahlerSeries:
    return MahlerSeries.from_integers(p, dict(pairs), precision, name)
