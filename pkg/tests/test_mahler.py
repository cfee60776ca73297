from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from padic_shift.errors import ParseError, PrecisionExhausted
from padic_shift.mahler import (
    MahlerSeries,
    binom_eval,
    binomial_series,
    empirical_lipschitz,
    evaluate_series,
    format_mahler_series,
    lipschitz_bound,
    mahler_coefficients,
    parse_mahler_text,
)
from padic_shift.maps import FunctionMap, constant_map, identity_map
from padic_shift.padic_core import PadicNumber, encode_integer, vp
from padic_shift.shift_maps import ShiftMap


def frac_binom(x: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for i in range(n):
        out *= (x - i) / (i + 1)
    return out


def test_binom_eval_examples():
    assert binom_eval(encode_integer(5, 2, 8), 2).residue == 10
    assert binom_eval(encode_integer(12345, 3, 6), 0).residue == 1
    c = frac_binom(Fraction(-1), 3)
    assert c == -1
    y = binom_eval(encode_integer(-1, 2, 10), 3)
    assert y.residue == int(c) % 2**y.precision


def test_binom_eval_precision_contract():
    # v_2(4!) = 3 digits are spent on the division
    assert binom_eval(encode_integer(7, 2, 10), 4).precision == 7
    with pytest.raises(PrecisionExhausted):
        binom_eval(encode_integer(7, 2, 3), 4)


@given(st.sampled_from([2, 3, 5]), st.integers(-500, 500), st.integers(0, 30), st.integers(6, 14))
def test_binom_eval_matches_rational_oracle(p, x, n, prec):
    try:
        y = binom_eval(encode_integer(x, p, prec), n)
    except PrecisionExhausted:
        return
    c = frac_binom(Fraction(x), n)
    assert c.denominator == 1
    assert y.residue == c.numerator % p**y.precision


def test_mahler_coefficients_of_shift():
    values = [encode_integer(i // 2, 2, 10) for i in range(6)]
    a = mahler_coefficients(values)
    assert [x.residue for x in a[:3]] == [0, 0, 1]
    # hand finite differences: a_3 = -S(0) + 3S(1) - 3S(2) + S(3) = -3 + 1
    assert a[3].residue == (-2) % 2**10
    assert a[4].residue == 4


def test_mahler_coefficients_of_constant():
    a = mahler_coefficients([encode_integer(7, 3, 5)] * 6)
    assert [x.residue for x in a] == [7, 0, 0, 0, 0, 0]


def test_mahler_coefficients_ignore_later_values():
    values = [encode_integer(i * i, 5, 6) for i in range(10)]
    short = mahler_coefficients(values, 4)
    assert short == mahler_coefficients(values[:5])


def test_evaluate_series_examples():
    s = MahlerSeries.from_integers(2, {2: 1})
    assert evaluate_series(s, encode_integer(5, 2, 10)).residue == 10
    # (x^2 - x)/2 = C(x, 2): at 7 the integer oracle gives (49 - 7)/2
    assert evaluate_series(s, encode_integer(7, 2, 10)).residue == (49 - 7) // 2


@given(st.sampled_from([2, 3]), st.dictionaries(st.integers(0, 8), st.integers(-50, 50), max_size=5))
def test_series_round_trip(p, coeffs):
    s = MahlerSeries.from_integers(p, coeffs)
    d = 8
    prec = 20
    values = [evaluate_series(s, encode_integer(i, p, prec + 10)) for i in range(d + 1)]
    low = min(v.precision for v in values)
    values = [v.truncate(low) for v in values]
    a = mahler_coefficients(values)
    for n in range(d + 1):
        assert a[n].residue == coeffs.get(n, 0) % p**low


def test_series_with_small_coefficients_loses_less():
    s = MahlerSeries(2, ((4, PadicNumber.from_rational(8, 2, 10)),))
    y = evaluate_series(s, encode_integer(5, 2, 6))
    assert y.residue == 8 * comb(5, 4) % 2**y.precision


@pytest.mark.parametrize("p", [2, 3, 5])
def test_table_matches_pointwise_values(p):
    s = MahlerSeries.from_integers(p, {0: 3, 1: -1, p: 1, p * p: p, 7: 2})
    t = s.table(4, 5)
    assert t.tolist() == [s.value(r, 5) for r in range(p**4)]
    assert t.tolist() == [sum(c * comb(r, n) for n, c in {0: 3, 1: -1, p: 1, p * p: p, 7: 2}.items())
                          % p**5 for r in range(p**4)]


def test_table_is_read_only():
    t = binomial_series(2, 2).table(3, 3)
    with pytest.raises(ValueError):
        t[0] = 1


def test_lipschitz_bound_values():
    assert lipschitz_bound(1, 7) == 0
    assert lipschitz_bound(3, 3) == 1
    assert lipschitz_bound(9, 3) == 2
    assert lipschitz_bound(8, 3) == 1
    assert lipschitz_bound(0, 2) == 0


def brute_force_lipschitz(T, m):
    # oracle: every unordered pair of residues mod p^m
    p = T.prime
    vals = [T.value(x, m) for x in range(p**m)]
    best = None
    for x, y in combinations(range(p**m), 2):
        dv = vp((vals[x] - vals[y]) % p**m, p)
        dv = m if dv is None else dv
        e = vp(y - x, p) - dv
        if dv < m and (best is None or e > best):
            best = e
    return best


@pytest.mark.parametrize("T,m", [
    (identity_map(2), 6),
    (binomial_series(2, 2), 7),
    (binomial_series(2, 3), 7),
    (binomial_series(3, 3), 4),
    (binomial_series(3, 5), 4),
    (ShiftMap(2, 2), 7),
    (FunctionMap(3, lambda r: r * r, "square"), 4),
])
def test_empirical_lipschitz_matches_pair_oracle(T, m):
    r = empirical_lipschitz(T, m)
    assert r.exponent == brute_force_lipschitz(T, m)
    x, y = r.witness
    dv = vp((T.value(x, m) - T.value(y, m)) % T.prime**m, T.prime)
    assert vp(y - x, T.prime) - dv == r.exponent


def test_empirical_lipschitz_examples():
    assert empirical_lipschitz(identity_map(5), 4).exponent == 0
    assert empirical_lipschitz(binomial_series(2, 2), 10).exponent == 1
    assert empirical_lipschitz(binomial_series(3, 3), 8).exponent == 1
    assert empirical_lipschitz(constant_map(3, 4), 5).exponent is None


def test_empirical_lipschitz_workers_do_not_change_result():
    T = binomial_series(3, 10)
    assert empirical_lipschitz(T, 8, workers=4) == empirical_lipschitz(T, 8)


def test_binomial_lipschitz_lemma_small_scan():
    for n in range(1, 51):
        assert empirical_lipschitz(binomial_series(2, n), 12).exponent <= lipschitz_bound(n, 2)


def test_mahler_file_round_trip():
    text = "# C(x,2) minus 3 C(x,5)\n2 1\n\n5 -3\n0 2adic:1,1\n"
    s = parse_mahler_text(text, 2, precision=16)
    assert [n for n, _ in s.terms] == [0, 2, 5]
    assert s.coefficient(0).unit.precision == 2
    again = parse_mahler_text(format_mahler_series(s), 2)
    assert again.terms == s.terms


def test_mahler_file_any_order_and_missing():
    a = parse_mahler_text("3 1\n1 2\n", 3)
    b = parse_mahler_text("1 2\n3 1\n", 3)
    assert a.terms == b.terms and a.coefficient(2) is None


@pytest.mark.parametrize("text", ["x 1\n", "1\n", "2 2adic:1,2\n", "1 1\n1 2\n"])
def test_mahler_file_rejects(text):
    with pytest.raises(ParseError):
        parse_mahler_text(text, 2)


def test_series_rejects_large_coefficients():
    with pytest.raises(ValueError):
        MahlerSeries(2, ((1, PadicNumber.from_rational(Fraction(1, 2), 2, 5)),))


@settings(max_examples=25)
@given(st.integers(1, 12), st.integers(2, 6))
def test_integer_binomials_agree_with_table(n, m):
    s = binomial_series(2, n)
    t = s.table(m, m)
    assert np.array_equal(t, [comb(x, n) % 2**m for x in range(2**m)])
