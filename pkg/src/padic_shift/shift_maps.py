"""The shift S^k, its Mahler coefficients, the chop family f_a and (x^p - x)/p."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from .errors import PrecisionExhausted, PrimeMismatch
from .maps import MAX_TABLE_MODULUS, ResidueMap
from .mahler import finite_differences, lipschitz_bound
from .padic_core import PadicInt, PadicNumber, check_prime, chop, qp_scale, vp


def shift_iterate(x: PadicInt, k: int) -> PadicInt:
    """Drop the first k digits."""
    if x.precision <= k:
        raise PrecisionExhausted(f"S^{k} needs more than {k} digits, x has {x.precision}")
    return PadicInt(x.prime, x.precision - k, x.residue // x.prime**k)


class ShiftMap(ResidueMap):
    def __init__(self, prime: int, k: int = 1):
        self.prime = check_prime(prime)
        self.k = k
        self.name = f"shift^{k}" if k != 1 else "shift"

    def value(self, r, w):
        return (r // self.prime**self.k) % self.prime**w

    def _bulk(self, m, w):
        x = np.arange(self.prime**m, dtype=np.int64)
        return (x // self.prime**self.k) % self.prime**w


# -- Mahler coefficients of S^k ----------------------------------------------

def shift_mahler_exact(p: int, k: int, nmax: int) -> list[int]:
    """Exact integer coefficients a_0 .. a_nmax of S^k from its values floor(i/p^k)."""
    return finite_differences([i // p**k for i in range(nmax + 1)])


def shift_mahler_direct(p: int, k: int, nmax: int, j: int) -> list[int]:
    check_prime(p)
    q = p**j
    return [a % q for a in shift_mahler_exact(p, k, nmax)]


def _poly_mul(a: list[int], b: list[int], size: int, q: int) -> list[int]:
    out = [0] * size
    for i, x in enumerate(a[:size]):
        if x:
            for jj, y in enumerate(b[: size - i]):
                out[i + jj] = (out[i + jj] + x * y) % q
    return out


def shift_mahler_series(p: int, k: int, nmax: int, j: int) -> list[int]:
    """Coefficients of u^(p^k) / ((1+u)^(p^k) - u^(p^k)) mod (p^j, u^(nmax+1)).

    (1+u)^(p^k) - u^(p^k) = 1 + p R(u), so the quotient is the geometric
    series u^(p^k) (1 - pR + p^2 R^2 - ...), and terms from p^j on vanish.
    """
    check_prime(p)
    if j < 1:
        raise ValueError("j must be >= 1")
    pk, q, size = p**k, p**j, nmax + 1
    # R(u) = ((1+u)^(p^k) - u^(p^k) - 1) / p, degree p^k - 1, no constant term
    r = [0] + [comb(pk, i) // p for i in range(1, pk)]
    neg_pr = [(-p * c) % q for c in r]
    total = [0] * size
    term = [1] + [0] * (size - 1)
    for _ in range(j):
        total = [(a + b) % q for a, b in zip(total, term)]
        term = _poly_mul(term, neg_pr, size, q)
    return ([0] * pk + total)[:size]


@dataclass(frozen=True)
class ClauseResult:
    name: str
    passed: bool
    witness: Optional[int] = None
    detail: str = ""


@dataclass(frozen=True)
class ShiftCoefficientReport:
    prime: int
    k: int
    nmax: int
    j: int
    coefficients: tuple[int, ...]
    clauses: tuple[ClauseResult, ...]
    corollary_max_exponent: Optional[int]
    corollary_maximizers: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)


def verify_coefficient_theorem(p: int, k: int, nmax: int, jmax: int) -> ShiftCoefficientReport:
    """Check the three coefficient clauses and the weight corollary for S^k."""
    check_prime(p)
    pk = p**k
    if nmax < pk:
        raise ValueError(f"nmax must be at least p^k = {pk}")
    exact = shift_mahler_exact(p, k, nmax)
    clauses = []

    bad = next((n for n in range(pk) if exact[n] != 0), None)
    clauses.append(ClauseResult("(i) a_n = 0 for n < p^k", bad is None, bad))

    ok = exact[pk] == 1
    clauses.append(ClauseResult("(ii) a_{p^k} = 1", ok, None if ok else pk))

    for j in range(1, jmax + 1):
        start = j * pk - j + 2
        bad = next((n for n in range(start, nmax + 1) if exact[n] % p**j), None)
        clauses.append(ClauseResult(f"(iii) p^{j} | a_n for n > {start - 1}", bad is None, bad,
                                    detail=f"j={j}"))

    # weight exponent floor(log_p n) - v_p(a_n), over exactly nonzero a_n
    weights = {n: lipschitz_bound(n, p) - vp(a, p) for n, a in enumerate(exact) if a and n}
    top = max(weights.values(), default=None)
    maximizers = tuple(n for n, w in weights.items() if w == top)
    over = next((n for n, w in weights.items() if w > k), None)
    tie = next((n for n, w in weights.items() if w == k and n != pk), None)
    bad = over if over is not None else tie
    ok = bad is None and weights.get(pk) == k
    clauses.append(ClauseResult("corollary: max weight p^k, only at n = p^k", ok,
                                bad if bad is not None else (None if ok else pk)))

    q = p**jmax
    return ShiftCoefficientReport(p, k, nmax, jmax, tuple(a % q for a in exact),
                                  tuple(clauses), top, maximizers)


# -- f_a(x) = g(ax) -------------------------------------------------------------

def f_a_apply(x: PadicInt, a: PadicNumber) -> PadicInt:
    return chop(qp_scale(x, a))


class ChopMap(ResidueMap):
    """x -> g(a x), g dropping negative-index digits."""

    def __init__(self, a: PadicNumber):
        self.prime = a.prime
        self.a = a
        self.name = f"f_a[{a}]"

    @property
    def scaling_exponent(self) -> int:
        """k with |a| = p^k (negative when |a| < 1)."""
        return -self.a.valuation

    def _unit(self, need: int) -> int:
        a = self.a
        if a.is_zero or need > a.unit.precision:
            raise PrecisionExhausted(f"{self.name}: unit part too short for {need} digits")
        return a.unit.residue % self.prime**need

    def value(self, r, w):
        p, v = self.prime, self.a.valuation
        if self.a.is_zero:
            if w > v:
                raise PrecisionExhausted("a is zero only to limited precision")
            return 0
        if v < 0:
            q = p ** (w - v)
            return (self._unit(w - v) * r % q) // p ** (-v)
        q = p**w
        return self._unit(max(w - v, 0)) * p**v * r % q if w > v else 0

    def _bulk(self, m, w):
        p, v = self.prime, self.a.valuation
        if self.a.is_zero or v >= w or p ** (w - min(v, 0)) > MAX_TABLE_MODULUS:
            return super()._bulk(m, w)
        x = np.arange(p**m, dtype=np.int64)
        if v < 0:
            q = p ** (w - v)
            return (self._unit(w - v) * (x % q) % q) // p ** (-v)
        q = p**w
        return (self._unit(w - v) * p**v % q) * (x % q) % q


# -- x -> (x^p - x)/p ------------------------------------------------------------

def woodcock_smart(x: PadicInt, p: Optional[int] = None) -> PadicInt:
    p = x.prime if p is None else p
    if p != x.prime:
        raise PrimeMismatch(f"x is {x.prime}-adic, map is {p}-adic")
    if x.precision < 2:
        raise PrecisionExhausted("(x^p - x)/p needs at least 2 digits")
    q = p**x.precision
    r = (pow(x.residue, p, q) - x.residue) % q
    return PadicInt(p, x.precision - 1, r // p)


class WoodcockSmartMap(ResidueMap):
    def __init__(self, prime: int):
        self.prime = check_prime(prime)
        self.name = "woodcock-smart"

    def value(self, r, w):
        q = self.prime ** (w + 1)
        return ((pow(r, self.prime, q) - r) % q) // self.prime

    def _bulk(self, m, w):
        p = self.prime
        q = p ** (w + 1)
        if q > MAX_TABLE_MODULUS:
            return super()._bulk(m, w)
        x = np.arange(p**m, dtype=np.int64) % q
        acc = np.ones_like(x)
        for _ in range(p):
            acc = acc * x % q
        return ((acc - x) % q) // p
