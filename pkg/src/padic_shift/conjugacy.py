"""The digit map Phi conjugating a (p^-k, p^k) locally scaling map to S^k.

Digit i = q*k + r of Phi(x) is digit r of T^q(x).  Every application of T
costs k digits of certainty, so M output digits need M + k input digits.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import PrecisionExhausted
from .maps import ResidueMap
from .padic_core import PadicInt


def phi_digits(T: ResidueMap, k: int, x: PadicInt, m: int) -> PadicInt:
    if x.prime != T.prime:
        raise ValueError("prime mismatch")
    if x.precision < m + k:
        raise PrecisionExhausted(f"Phi to {m} digits needs {m + k} input digits, "
                                 f"x has {x.precision}")
    p, w = T.prime, m + k
    z = x.residue % p**w
    out = 0
    for i in range(m):
        q, r = divmod(i, k)
        if r == 0 and q > 0:
            z = T.value(z, w)
        out += (z // p**r % p) * p**i
    return PadicInt(p, m, out)


def _phi_chunk(t: np.ndarray, p: int, k: int, m: int, z: np.ndarray) -> np.ndarray:
    out = np.zeros_like(z)
    for i in range(m):
        q, r = divmod(i, k)
        if r == 0 and q > 0:
            z = t[z]
        out += (z // p**r % p) * p**i
    return out


def phi_table(T: ResidueMap, k: int, m: int, w: int, workers: int = 1) -> np.ndarray:
    """Phi(x) mod p**m for every x mod p**w, orbits computed mod p**w."""
    if w < m + k:
        raise PrecisionExhausted(f"need w >= m + k = {m + k}")
    p = T.prime
    t = T.table(w, w)
    xs = np.arange(p**w, dtype=np.int64)
    chunks = np.array_split(xs, max(1, workers))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parts = list(pool.map(lambda z: _phi_chunk(t, p, k, m, z), chunks))
    return np.concatenate(parts)


@dataclass(frozen=True)
class ConjugacyReport:
    map_name: str
    prime: int
    k: int
    modulus_exponent: int
    conjugation_passed: Optional[bool] = None
    bijectivity_passed: Optional[bool] = None
    witnesses: dict = field(default_factory=dict, hash=False)

    @property
    def passed(self) -> bool:
        verdicts = [v for v in (self.conjugation_passed, self.bijectivity_passed) if v is not None]
        return all(verdicts)


def verify_conjugacy(T: ResidueMap, k: int, m: int, workers: int = 1) -> ConjugacyReport:
    """Phi(T(x)) = S^k(Phi(x)) to m digits, for every x mod p**(m+2k)."""
    p = T.prime
    w = m + 2 * k
    tx = T.table(w, m + k)
    rhs = phi_table(T, k, m + k, w, workers) // p**k
    lhs = phi_table(T, k, m, m + k, workers)[tx]
    bad = np.flatnonzero(lhs != rhs)
    witnesses = {}
    if bad.size:
        x = int(bad[0])
        witnesses["conjugation"] = {"x": x, "phi_of_T_x": int(lhs[x]), "shift_of_phi_x": int(rhs[x])}
    return ConjugacyReport(T.name, p, k, m, conjugation_passed=not bad.size, witnesses=witnesses)


def verify_bijectivity_on_residues(T: ResidueMap, k: int, m: int,
                                   workers: int = 1) -> ConjugacyReport:
    """x mod p**(m+k) -> Phi(x) mod p**m is well defined and p^k-to-one onto."""
    p = T.prime
    coarse = phi_table(T, k, m, m + k, workers)
    fine = phi_table(T, k, m, m + 2 * k, workers)
    witnesses = {}
    bad = np.flatnonzero(fine != np.tile(coarse, p**k))
    if bad.size:
        x = int(bad[0])
        witnesses["fiber"] = {"x": x, "phi": int(fine[x]),
                              "phi_of_truncation": int(coarse[x % p ** (m + k)])}
    counts = np.bincount(coarse, minlength=p**m)
    off = np.flatnonzero(counts != p**k)
    if off.size:
        y = int(off[0])
        witnesses["count"] = {"residue": y, "hits": int(counts[y]), "expected": p**k}
    ok = not bad.size and not off.size
    return ConjugacyReport(T.name, p, k, m, bijectivity_passed=ok, witnesses=witnesses)
