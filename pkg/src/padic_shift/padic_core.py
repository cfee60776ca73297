"""Finite-precision arithmetic in Z_p and Q_p.

A `PadicInt` is a residue modulo p**N together with its precision N; the
digit expansion is only a view of the residue.  A `PadicNumber` is
p**v * unit, or zero known modulo p**bound.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .errors import (
    HenselConditionFailed,
    NotAUnit,
    ParseError,
    PrecisionExhausted,
    PrimeMismatch,
)


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"not a prime: {p!r}")
    return p


def vp(n: int, p: int) -> Optional[int]:
    """p-adic valuation of a nonzero integer; None for 0."""
    if n == 0:
        return None
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_factorial(n: int, p: int) -> int:
    # Legendre
    e, q = 0, p
    while q <= n:
        e += n // q
        q *= p
    return e


@dataclass(frozen=True)
class PadicInt:
    prime: int
    precision: int
    residue: int

    def __post_init__(self):
        check_prime(self.prime)
        if self.precision < 1:
            raise PrecisionExhausted(f"precision must be >= 1, got {self.precision}")
        if not 0 <= self.residue < self.prime ** self.precision:
            raise ValueError("residue out of range; use encode_integer to reduce")

    @classmethod
    def from_digits(cls, digits: Sequence[int], p: int) -> "PadicInt":
        check_prime(p)
        r = 0
        for i, d in enumerate(digits):
            if not 0 <= d < p:
                raise ParseError(f"digit {d} out of range for p={p}", token=str(d))
            r += d * p**i
        return cls(p, len(digits), r)

    @property
    def modulus(self) -> int:
        return self.prime ** self.precision

    @property
    def digits(self) -> tuple[int, ...]:
        out, r = [], self.residue
        for _ in range(self.precision):
            r, d = divmod(r, self.prime)
            out.append(d)
        return tuple(out)

    def digit(self, i: int) -> int:
        if not 0 <= i < self.precision:
            raise PrecisionExhausted(f"digit {i} unknown at precision {self.precision}")
        return (self.residue // self.prime**i) % self.prime

    def is_unit(self) -> bool:
        return self.residue % self.prime != 0

    def valuation(self) -> int:
        """Index of the first nonzero digit; `precision` if all known digits vanish."""
        v = vp(self.residue, self.prime)
        return self.precision if v is None else v

    def truncate(self, n: int) -> "PadicInt":
        if n > self.precision:
            raise PrecisionExhausted(f"cannot raise precision {self.precision} to {n}")
        return PadicInt(self.prime, n, self.residue % self.prime**n)

    def agrees(self, other: "PadicInt", m: Optional[int] = None) -> bool:
        _same_prime(self, other)
        top = min(self.precision, other.precision)
        m = top if m is None else m
        if m > top:
            raise PrecisionExhausted(f"cannot compare at {m} digits, only {top} known")
        q = self.prime**m
        return self.residue % q == other.residue % q

    def __add__(self, other):
        return ring_arithmetic(self, other, "add")

    def __sub__(self, other):
        return ring_arithmetic(self, other, "sub")

    def __mul__(self, other):
        return ring_arithmetic(self, other, "mul")

    def __neg__(self):
        return PadicInt(self.prime, self.precision, (-self.residue) % self.modulus)

    def __str__(self):
        return format_padic_int(self)


def _same_prime(x, y):
    if x.prime != y.prime:
        raise PrimeMismatch(f"prime mismatch: {x.prime} vs {y.prime}")


def encode_integer(n: int, p: int, precision: int) -> PadicInt:
    check_prime(p)
    if precision < 1:
        raise PrecisionExhausted("precision must be >= 1")
    return PadicInt(p, precision, n % p**precision)


def ring_arithmetic(x: PadicInt, y: PadicInt, op: str) -> PadicInt:
    _same_prime(x, y)
    n = min(x.precision, y.precision)
    q = x.prime**n
    if op == "add":
        r = x.residue + y.residue
    elif op == "sub":
        r = x.residue - y.residue
    elif op == "mul":
        r = x.residue * y.residue
    else:
        raise ValueError(f"unknown ring operation {op!r}")
    return PadicInt(x.prime, n, r % q)


def unit_invert(x: PadicInt) -> PadicInt:
    if not x.is_unit():
        raise NotAUnit(f"{x} is not a unit (first digit is 0)")
    return PadicInt(x.prime, x.precision, pow(x.residue, -1, x.modulus))


def first_difference(x: PadicInt, y: PadicInt) -> int:
    """Index of the first digit where x and y differ.

    Returns M = min precision when they agree on every known digit; that
    value means "distance at most p**-M", never exact equality.
    """
    _same_prime(x, y)
    m = min(x.precision, y.precision)
    d = (x.residue - y.residue) % x.prime**m
    v = vp(d, x.prime)
    return m if v is None else v


def distance(x: PadicInt, y: PadicInt) -> Fraction:
    """p**-k for the first differing digit k (an upper bound if none differ)."""
    return Fraction(1, x.prime ** first_difference(x, y))


@dataclass(frozen=True)
class PadicNumber:
    """p**valuation * unit, or zero known modulo p**valuation (unit is None)."""

    prime: int
    valuation: int
    unit: Optional[PadicInt] = None

    def __post_init__(self):
        check_prime(self.prime)
        if self.unit is not None:
            _same_prime(self, self.unit)
            if not self.unit.is_unit():
                raise ValueError("unit part must have a nonzero first digit")

    @classmethod
    def zero(cls, p: int, bound: int) -> "PadicNumber":
        return cls(p, bound, None)

    @classmethod
    def from_padic_int(cls, x: PadicInt) -> "PadicNumber":
        v = x.valuation()
        if v >= x.precision:
            return cls.zero(x.prime, x.precision)
        p = x.prime
        return cls(p, v, PadicInt(p, x.precision - v, x.residue // p**v))

    @classmethod
    def from_rational(cls, q, p: int, precision: int) -> "PadicNumber":
        """Exact rational to `precision` unit digits."""
        q = Fraction(q)
        check_prime(p)
        if q == 0:
            return cls.zero(p, precision)
        num, den = q.numerator, q.denominator
        v = vp(num, p) - vp(den, p)
        num //= p ** vp(num, p)
        den //= p ** vp(den, p)
        m = p**precision
        return cls(p, v, PadicInt(p, precision, num * pow(den, -1, m) % m))

    @property
    def is_zero(self) -> bool:
        return self.unit is None

    @property
    def absolute_precision(self) -> int:
        """Value is known modulo p**absolute_precision."""
        if self.unit is None:
            return self.valuation
        return self.valuation + self.unit.precision

    def norm(self) -> Fraction:
        """|x| = p**-v; for zero, the upper bound p**-bound."""
        return Fraction(self.prime) ** (-self.valuation)

    def residue_mod(self, w: int) -> int:
        """The value modulo p**w, for a value lying in Z_p."""
        if w > self.absolute_precision:
            raise PrecisionExhausted(
                f"value known mod p^{self.absolute_precision}, asked for p^{w}")
        if self.unit is None:
            return 0
        if self.valuation < 0:
            raise ValueError("value is not in Z_p")
        return self.unit.residue * self.prime**self.valuation % self.prime**w

    def __str__(self):
        return format_padic_number(self)


def qp_scale(x: PadicInt, a: PadicNumber) -> PadicNumber:
    _same_prime(x, a)
    xn = PadicNumber.from_padic_int(x)
    if xn.is_zero or a.is_zero:
        # a in p^va Z_p (or zero mod p^ba) times x in p^vx Z_p
        return PadicNumber.zero(x.prime, a.valuation + xn.valuation)
    n = min(a.unit.precision, xn.unit.precision)
    return PadicNumber(x.prime, a.valuation + xn.valuation,
                       ring_arithmetic(a.unit.truncate(n), xn.unit.truncate(n), "mul"))


def chop(x: PadicNumber) -> PadicInt:
    """Drop the digits at negative indices."""
    p = x.prime
    if x.is_zero:
        if x.valuation < 1:
            raise PrecisionExhausted("zero known to no nonnegative digit")
        return PadicInt(p, x.valuation, 0)
    v, u = x.valuation, x.unit
    n = u.precision + v
    if n < 1:
        raise PrecisionExhausted(f"no digit at index >= 0 is known (v={v}, "
                                 f"unit precision {u.precision})")
    if v < 0:
        return PadicInt(p, n, u.residue // p**(-v))
    return PadicInt(p, n, u.residue * p**v)


def _poly_eval(coeffs: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def hensel_lift(coeffs: Sequence[int], r0: int, p: int, precision: int) -> PadicInt:
    """Lift a simple root of q(x) = sum(coeffs[i] * x**i) one digit at a time."""
    check_prime(p)
    deriv = [i * c for i, c in enumerate(coeffs)][1:]
    if _poly_eval(coeffs, r0) % p:
        raise HenselConditionFailed(f"q({r0}) is not divisible by {p}")
    dq = _poly_eval(deriv, r0) % p
    if dq == 0:
        raise HenselConditionFailed(f"q'({r0}) is divisible by {p}")
    dq_inv = pow(dq, -1, p)
    alpha = r0 % p
    for i in range(1, precision):
        # q(alpha + t p^i) = q(alpha) + t p^i q'(alpha) mod p^(i+1)
        carry = _poly_eval(coeffs, alpha) // p**i
        t = (-carry * dq_inv) % p
        alpha += t * p**i
    return PadicInt(p, precision, alpha)


# -- text format ----------------------------------------------------------

_INT_RE = re.compile(r"^\s*(\d+)adic:(.*)$")
_NUM_RE = re.compile(r"^\s*v=([+-]?\d+);(.*)$")


def format_padic_int(x: PadicInt) -> str:
    return f"{x.prime}adic:" + ",".join(str(d) for d in x.digits)


def format_padic_number(x: PadicNumber) -> str:
    if x.is_zero:
        return f"v={x.valuation};{x.prime}adic:"
    return f"v={x.valuation};{format_padic_int(x.unit)}"


def _parse_digits(body: str, p: int, text: str) -> list[int]:
    out = []
    for tok in body.split(","):
        tok = tok.strip()
        if not tok.isdigit():
            raise ParseError(f"malformed digit {tok!r} in {text!r}", token=tok)
        d = int(tok)
        if d >= p:
            raise ParseError(f"digit {d} >= p={p} in {text!r}", token=tok)
        out.append(d)
    return out


def parse_padic_int(text: str, p: Optional[int] = None) -> PadicInt:
    m = _INT_RE.match(text)
    if not m:
        raise ParseError(f"not a digit string: {text!r}", token=text)
    q = int(m.group(1))
    if not is_prime(q):
        raise ParseError(f"not a prime: {q}", token=m.group(1))
    if p is not None and q != p:
        raise ParseError(f"expected a {p}-adic value, got {text!r}", token=text)
    if not m.group(2).strip():
        raise ParseError(f"no digits in {text!r}", token=text)
    return PadicInt.from_digits(_parse_digits(m.group(2), q, text), q)


def parse_padic_number(text: str, p: Optional[int] = None) -> PadicNumber:
    m = _NUM_RE.match(text)
    if not m:
        return PadicNumber.from_padic_int(parse_padic_int(text, p))
    v = int(m.group(1))
    rest = m.group(2).strip()
    im = _INT_RE.match(rest)
    if im and not im.group(2).strip():
        q = int(im.group(1))
        if not is_prime(q) or (p is not None and q != p):
            raise ParseError(f"bad prime in {text!r}", token=im.group(1))
        return PadicNumber.zero(q, v)
    x = parse_padic_int(rest, p)
    y = PadicNumber.from_padic_int(x)
    if y.is_zero:
        return PadicNumber.zero(x.prime, v + x.precision)
    return PadicNumber(x.prime, v + y.valuation, y.unit)
