"""Residue-level evaluation of maps Z_p -> Z_p.

Every map used by the dynamics checks is a `ResidueMap`: given a
nonnegative integer r (a representative of a residue class) it returns
T(r) mod p**w exactly.  Exhaustive scans work on whole tables
T(0), ..., T(p**m - 1) mod p**w, which subclasses may compute in bulk.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import PrecisionExhausted, PrimeMismatch
from .padic_core import PadicInt, check_prime

# residues are held in int64; keep products of two residues exact
MAX_TABLE_MODULUS = 2**31


class ResidueMap:
    prime: int
    name: str = "map"

    def value(self, r: int, w: int) -> int:
        raise NotImplementedError

    def _bulk(self, m: int, w: int) -> np.ndarray:
        return np.fromiter((self.value(r, w) for r in range(self.prime**m)),
                           dtype=np.int64, count=self.prime**m)

    def table(self, m: int, w: int) -> np.ndarray:
        """Read-only array of T(x) mod p**w for x = 0 .. p**m - 1."""
        if self.prime**max(m, w) > MAX_TABLE_MODULUS:
            raise ValueError(f"p^{max(m, w)} too large for an exhaustive table")
        cache = self.__dict__.setdefault("_tables", {})
        key = (m, w)
        if key not in cache:
            t = self._bulk(m, w)
            t.setflags(write=False)
            cache[key] = t
        return cache[key]

    def apply(self, x: PadicInt, loss: int) -> PadicInt:
        """T(x) to precision(x) - loss digits, for a map losing `loss` digits."""
        n = x.precision - loss
        if n < 1:
            raise PrecisionExhausted(f"{self.name} needs more than {loss} digits")
        return PadicInt(self.prime, n, self.value(x.residue, n))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} p={self.prime}>"


class FunctionMap(ResidueMap):
    """Wrap an exact integer function; `func(r)` must be T(r) as an integer."""

    def __init__(self, prime: int, func: Callable[[int], int], name: str = "function"):
        self.prime = check_prime(prime)
        self.func = func
        self.name = name

    def value(self, r, w):
        return self.func(r) % self.prime**w


class AffineCombination(ResidueMap):
    """x -> u*T(x) + S(x) for a p-adic integer u."""

    def __init__(self, unit: PadicInt, main: ResidueMap, perturbation: ResidueMap):
        if not unit.prime == main.prime == perturbation.prime:
            raise PrimeMismatch("all parts must share one prime")
        self.prime = main.prime
        self.unit = unit
        self.main = main
        self.perturbation = perturbation
        self.name = f"{unit.residue}*{main.name}+{perturbation.name}"

    def _u(self, w):
        if w > self.unit.precision:
            raise PrecisionExhausted(f"multiplier known to {self.unit.precision} digits")
        return self.unit.residue % self.prime**w

    def value(self, r, w):
        q = self.prime**w
        return (self._u(w) * self.main.value(r, w) + self.perturbation.value(r, w)) % q

    def _bulk(self, m, w):
        q = self.prime**w
        t = self.main.table(m, w)
        s = self.perturbation.table(m, w)
        return (self._u(w) * t % q + s) % q


def identity_map(prime: int) -> FunctionMap:
    return FunctionMap(prime, lambda r: r, name="identity")


def constant_map(prime: int, c: int) -> FunctionMap:
    return FunctionMap(prime, lambda r: c, name=f"const{c}")
