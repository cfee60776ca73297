"""Locally scaling checks, Mahler-Bernoulli class membership, ball preimages
and exact Haar-measure mixing, all by exhaustive work on residue rings."""
from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ParseError,
    PreconditionFailed,
    ScalingAssumptionViolated,
    Undecidable,
)
from .mahler import MahlerSeries, empirical_lipschitz, lipschitz_bound
from .maps import AffineCombination, ResidueMap
from .padic_core import PadicInt, check_prime, is_prime


@dataclass(frozen=True, order=True)
class Ball:
    """center + p**exponent Z_p, with 0 <= center < p**exponent."""

    prime: int
    exponent: int
    center: int

    def __post_init__(self):
        check_prime(self.prime)
        if self.exponent < 0:
            raise ValueError("radius exponent must be >= 0")
        object.__setattr__(self, "center", self.center % self.prime**self.exponent)

    @property
    def radius(self) -> Fraction:
        return Fraction(1, self.prime**self.exponent)

    @property
    def measure(self) -> Fraction:
        return self.radius

    def contains_residue(self, x: int) -> bool:
        return x % self.prime**self.exponent == self.center

    def contains(self, other: "Ball") -> bool:
        return other.exponent >= self.exponent and self.contains_residue(other.center)

    def intersection_measure(self, other: "Ball") -> Fraction:
        if self.contains(other):
            return other.measure
        if other.contains(self):
            return self.measure
        return Fraction(0)

    def short(self) -> str:
        return f"{self.center}/{self.exponent}"

    def __str__(self):
        return f"{self.prime}adic-ball:{self.center}/{self.exponent}"


_BALL_RE = re.compile(r"^\s*(?:(\d+)adic-ball:)?(\d+)/(\d+)\s*$")


def parse_ball(text: str, p: Optional[int] = None) -> Ball:
    """Accepts "<p>adic-ball:<c>/<m>" or the bare "<c>/<m>" when p is given."""
    m = _BALL_RE.match(text)
    if not m:
        raise ParseError(f"malformed ball {text!r}", token=text)
    q = int(m.group(1)) if m.group(1) else p
    if q is None or not is_prime(q) or (p is not None and q != p):
        raise ParseError(f"bad prime in ball {text!r}", token=text)
    c, e = int(m.group(2)), int(m.group(3))
    if c >= q**e:
        raise ParseError(f"center {c} >= {q}^{e} in {text!r}", token=text)
    return Ball(q, e, c)


def merge_balls(p: int, exponent: int, residues) -> list[Ball]:
    """Coarsest disjoint balls covering a set of residues mod p**exponent."""
    level = set(int(r) for r in residues)
    out = []
    for e in range(exponent, 0, -1):
        parents = {}
        for r in level:
            parents.setdefault(r % p ** (e - 1), []).append(r)
        nxt = set()
        for parent, kids in parents.items():
            if len(kids) == p:
                nxt.add(parent)
            else:
                out.extend(Ball(p, e, r) for r in kids)
        level = nxt
    out.extend(Ball(p, 0, 0) for _ in level)
    return sorted(out, key=lambda b: (b.exponent, b.center))


# -- local scaling ---------------------------------------------------------------

@dataclass(frozen=True)
class ScalingReport:
    map_name: str
    prime: int
    k: int
    modulus_exponent: int
    passed: bool
    counterexample: Optional[tuple[int, int]] = None
    level: Optional[int] = None
    band: tuple[int, int] = (0, 0)
    pairs_checked: int = 0

    @property
    def radius(self) -> Fraction:
        return Fraction(1, self.prime**self.k)

    @property
    def constant(self) -> int:
        return self.prime**self.k

    def __post_init__(self):
        assert (self.counterexample is None) == self.passed


def _scaling_level(t: np.ndarray, p: int, k: int, v: int):
    """First pair with v_p(x-y) = v and v_p(T(x)-T(y)) != v - k, or None."""
    x = np.arange(t.size, dtype=np.int64)
    rep = x % p**v
    lo = v - k
    if lo > 0:
        qa = p**lo
        bad = np.flatnonzero((t - t[rep]) % qa)
        if bad.size:
            a = int(bad[0])
            r = a % p**v
            if (a // p**v) % p:
                return r, a
            # a and r share digit v; a sibling class separates one of them
            z = r + p**v
            return (min(a, z), max(a, z)) if (t[z] - t[a]) % qa else (r, z)
    qb = p ** (lo + 1)
    key = rep * qb + t % qb
    sib = (x // p**v) % p
    _, first, inv = np.unique(key, return_index=True, return_inverse=True)
    bad = np.flatnonzero(sib != sib[first][inv])
    if bad.size:
        b = int(bad[0])
        return int(first[inv[b]]), b
    return None


def verify_locally_scaling(T: ResidueMap, k: int, m: int, workers: int = 1) -> ScalingReport:
    """Exhaustively check |T(x)-T(y)| = p^k |x-y| for residues mod p**m.

    Only pairs with k <= v_p(x-y) <= m-k-1 are decidable at this modulus;
    closer pairs are skipped.  The check runs one valuation level at a time.
    """
    p = T.prime
    if k < 1:
        raise ValueError("k must be >= 1")
    if m < 2 * k + 2:
        raise ValueError(f"modulus exponent must be >= 2k+2 = {2 * k + 2}")
    t = T.table(m, m - k)
    levels = range(k, m - k)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        found = list(pool.map(lambda v: _scaling_level(t, p, k, v), levels))
    size = p**m
    pairs = sum(size * (p ** (m - v) - p ** (m - v - 1)) // 2 for v in levels)
    band = (k, m - k - 1)
    for v, pair in zip(levels, found):
        if pair is not None:
            return ScalingReport(T.name, p, k, m, False, pair, v, band, pairs)
    return ScalingReport(T.name, p, k, m, True, None, None, band, pairs)


def induced_map_well_defined(T: ResidueMap, k: int, m: int, lift: int = 1) -> bool:
    """Does T(x) mod p**(m-k) depend only on x mod p**m (checked over lifts mod p**(m+lift))?"""
    p = T.prime
    t = T.table(m + lift, m - k)
    base = t[np.arange(t.size) % p**m]
    return bool(np.array_equal(t, base))


def perturbation_check(T: ResidueMap, S: ResidueMap, u: PadicInt, k: int,
                       d_exponent: int, m: int) -> ScalingReport:
    """Scaling check of x -> u T(x) + S(x) after confirming its hypotheses."""
    if not u.is_unit():
        raise PreconditionFailed(f"multiplier {u} is not a unit")
    if d_exponent >= k:
        raise PreconditionFailed(f"need D = p^{d_exponent} < C = p^{k}")
    base = verify_locally_scaling(T, k, m)
    if not base.passed:
        raise PreconditionFailed(f"{T.name} is not (p^-{k}, p^{k}) locally scaling: "
                                 f"witness {base.counterexample}")
    lip = empirical_lipschitz(S, m)
    if lip.exponent is not None and lip.exponent > d_exponent:
        raise PreconditionFailed(f"{S.name} measured p^{lip.exponent}-Lipschitz "
                                 f"(witness {lip.witness}), above p^{d_exponent}")
    return verify_locally_scaling(AffineCombination(u, T, S), k, m)


# -- Mahler-Bernoulli class ---------------------------------------------------------

CLAUSE_UNIQUE = "unique maximizer"
CLAUSE_POWER = "maximizer is p^k with k > 0"
CLAUSE_UNIT = "|A_n0| = 1"


@dataclass(frozen=True)
class ClassReport:
    series_name: str
    prime: int
    weights: dict = field(hash=False)  # n -> exponent e of the weight p^e
    max_exponent: Optional[int]
    maximizers: tuple[int, ...]
    member: bool
    failed_clause: Optional[str] = None
    k: Optional[int] = None

    @property
    def C(self) -> Optional[Fraction]:
        return None if self.max_exponent is None else Fraction(self.prime) ** self.max_exponent


def _power_exponent(n: int, p: int) -> Optional[int]:
    e = 0
    while n > 1 and n % p == 0:
        n //= p
        e += 1
    return e if n == 1 else None


def class_check(s: MahlerSeries) -> ClassReport:
    p = s.prime
    weights, unknown = {}, {}
    for n, a in s.terms:
        w = lipschitz_bound(n, p) - a.valuation
        (unknown if a.is_zero else weights)[n] = w
    top = max(weights.values(), default=None)
    maximizers = tuple(sorted(n for n, w in weights.items() if w == top))

    failed, k = None, None
    if len(maximizers) != 1:
        failed = CLAUSE_UNIQUE
    else:
        n0 = maximizers[0]
        k = _power_exponent(n0, p) if n0 > 0 else None
        if k is None or k == 0:
            failed, k = CLAUSE_POWER, None
        elif s.coefficient(n0).valuation != 0:
            failed, k = CLAUSE_UNIT, None

    for n, bound in sorted(unknown.items()):
        # bound is the largest the weight exponent of a zero-to-precision A_n could be
        if top is None or bound > top or (bound == top and failed != CLAUSE_UNIQUE):
            raise Undecidable(f"A_{n} is zero to precision p^{s.coefficient(n).valuation}; "
                              f"its weight decides the verdict", index=n)

    return ClassReport(s.name, p, weights, top, maximizers, failed is None, failed, k)


# -- preimages of balls -------------------------------------------------------------

def preimage(T: ResidueMap, balls: Sequence[Ball], resolution: int) -> list[Ball]:
    """T^-1 of a union of balls, resolved on residues mod p**resolution.

    Exact only if T(x) mod p**m is determined by x mod p**resolution for
    every ball exponent m; the caller chooses the resolution.
    """
    p = T.prime
    top = max(b.exponent for b in balls)
    t = T.table(resolution, max(top, 1))
    hit = np.zeros(t.size, dtype=bool)
    for b in balls:
        hit |= (t % p**b.exponent) == b.center
    return merge_balls(p, resolution, np.flatnonzero(hit))


def iterated_preimage(T: ResidueMap, B: Ball, n: int, step: int) -> list[Ball]:
    """T^-n(B), adding `step` digits of resolution per preimage."""
    balls = [B]
    res = B.exponent
    for _ in range(n):
        res += step
        balls = preimage(T, balls, res)
    return balls


def _check_lemma_ball(B: Ball, k: int):
    if k < 1:
        raise ValueError("k must be >= 1")
    if B.exponent % k:
        raise ValueError(f"ball exponent {B.exponent} is not a multiple of k={k}")


def _preimage_mask(T: ResidueMap, k: int, mask: np.ndarray, m: int) -> np.ndarray:
    """Indicator of T^-1(set) on residues mod p**(m+k), from an indicator mod p**m."""
    return mask[T.table(m + k, m)] if m > 0 else np.ones(T.prime**k, dtype=bool)


def preimage_ball(T: ResidueMap, k: int, B: Ball) -> list[Ball]:
    """T^-1(B) as p^k balls of exponent m+k, one in each ball of exponent k."""
    _check_lemma_ball(B, k)
    p, m = T.prime, B.exponent
    mask = np.zeros(p**m, dtype=bool)
    mask[B.center] = True
    hit = _preimage_mask(T, k, mask, m)
    xs = np.flatnonzero(hit)
    if xs.size != p**k:
        raise ScalingAssumptionViolated(
            f"T^-1({B.short()}) has {xs.size} classes mod p^{m + k}, expected {p**k}")
    if np.unique(xs % p**k).size != xs.size:
        raise ScalingAssumptionViolated(f"preimages of {B.short()} share a ball of exponent {k}")
    # every lift of a hit class must hit too, or the fibers are not balls
    fine = _preimage_mask(T, 2 * k, mask, m)
    if not np.array_equal(fine, np.tile(hit, p**k)):
        raise ScalingAssumptionViolated(f"T^-1({B.short()}) is not a union of balls of exponent {m + k}")
    return [Ball(p, m + k, int(x)) for x in xs]


@dataclass(frozen=True)
class PreimageStructure:
    ball: Ball
    k: int
    iterations: int
    balls: tuple[Ball, ...]

    @property
    def exponent(self) -> int:
        return self.ball.exponent + self.k * self.iterations

    @property
    def measure(self) -> Fraction:
        return sum((b.measure for b in self.balls), Fraction(0))


def _iterate_mask(T: ResidueMap, k: int, B: Ball, n: int, check: bool):
    p = T.prime
    m = B.exponent
    mask = np.zeros(p**m, dtype=bool)
    mask[B.center] = True
    for i in range(1, n + 1):
        mask = _preimage_mask(T, k, mask, m)
        m += k
        if check:
            xs = np.flatnonzero(mask)
            counts = np.bincount(xs % p ** (k * i), minlength=p ** (k * i))
            if xs.size != p ** (k * i) or not np.all(counts == 1):
                raise ScalingAssumptionViolated(
                    f"T^-{i}({B.short()}) is not one ball per ball of exponent {k * i}")
    return mask, m


def iterated_preimage_structure(T: ResidueMap, k: int, B: Ball, n: int) -> PreimageStructure:
    _check_lemma_ball(B, k)
    mask, m = _iterate_mask(T, k, B, n, check=True)
    p = T.prime
    return PreimageStructure(B, k, n, tuple(Ball(p, m, int(x)) for x in np.flatnonzero(mask)))


@dataclass(frozen=True)
class MixingResult:
    measure: Fraction
    product: Fraction
    identity_asserted: bool

    @property
    def holds(self) -> bool:
        return self.measure == self.product


def mixing_measure(T: ResidueMap, k: int, U: Ball, V: Ball, n: int) -> MixingResult:
    """mu(T^-n(U) & V) by ball enumeration, next to mu(U) mu(V).

    The identity is only asserted for n >= l where V has exponent k*l.
    """
    _check_lemma_ball(U, k)
    _check_lemma_ball(V, k)
    asserted = n >= V.exponent // k
    mask, m = _iterate_mask(T, k, U, n, check=asserted)
    return MixingResult(_masked_measure(T.prime, mask, m, V), U.measure * V.measure, asserted)


def _masked_measure(p: int, mask: np.ndarray, m: int, V: Ball) -> Fraction:
    if V.exponent <= m:
        return Fraction(int(mask[V.center:: p**V.exponent].sum()), p**m)
    # V finer than the preimage resolution: V lies inside one class or misses it
    return V.measure if mask[V.center % p**m] else Fraction(0)


def general_mixing_measure(T: ResidueMap, U: Ball, V: Ball, n: int, step: int) -> Fraction:
    """mu(T^-n(U) & V) for any map whose preimages gain `step` digits per iteration."""
    balls = iterated_preimage(T, U, n, step)
    return sum((b.intersection_measure(V) for b in balls), Fraction(0))
