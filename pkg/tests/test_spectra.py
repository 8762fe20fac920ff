import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torusmin.errors import NotUnimodular
from torusmin.exact import IntegerMatrix, RationalPolynomial
from torusmin.spectra import (
    Verdict,
    classify,
    cyclotomic_exponent,
    cyclotomic_split,
    euler_phi,
    lefschetz_number,
    prop1_obstruction,
    quasi_unipotent_test,
    root_census,
)

from helpers import CAT, EQ8, random_unimodular

P_EX = RationalPolynomial([1, 4, -6, 4, 1])


def counts(c):
    return (c.n_roots_of_unity, c.n_unimodular_not_rou, c.n_off_circle)


def brute_M(n):
    from math import gcd

    def phi(d):
        return sum(1 for k in range(1, d + 1) if gcd(k, d) == 1)

    out = 1
    for d in range(1, 101):
        if phi(d) <= n:
            out = out * d // gcd(out, d)
    return out


def power_oracle(L: IntegerMatrix, limit: int):
    """Least m <= limit with (L^m - I)^n = 0, by direct powers."""
    n = L.n
    P = IntegerMatrix.identity(n)
    for m in range(1, limit + 1):
        P = P @ L
        N = P - IntegerMatrix.identity(n)
        if (N ** n).is_zero():
            return m
    return None


def test_cyclotomic_exponent_brute_force():
    assert cyclotomic_exponent(2) == cyclotomic_exponent(3) == 12
    assert cyclotomic_exponent(4) == 120
    for n in range(1, 7):
        assert cyclotomic_exponent(n) == brute_M(n)
    assert [euler_phi(d) for d in (1, 2, 6, 9, 12)] == [1, 1, 2, 6, 4]


def test_quasi_unipotent_examples():
    assert quasi_unipotent_test(IntegerMatrix.identity(3)) == (True, 1)
    assert quasi_unipotent_test(EQ8) == (True, 2)
    assert quasi_unipotent_test(CAT) == (False, None)
    with pytest.raises(NotUnimodular):
        quasi_unipotent_test(IntegerMatrix([[2, 0], [0, 1]]))


def test_cyclotomic_split_examples():
    q, r = cyclotomic_split(RationalPolynomial([-1, 4, -4, 1]), 3)
    assert q.coeffs == RationalPolynomial([-1, 1]).coeffs and r.coeffs == RationalPolynomial([1, -3, 1]).coeffs
    q, r = cyclotomic_split(P_EX, 4)
    assert q.is_one() and r.coeffs == P_EX.coeffs
    q, r = cyclotomic_split(RationalPolynomial([1, -2, 1]), 2)
    assert q.coeffs == RationalPolynomial([1, -2, 1]).coeffs and r.is_one()


def test_root_census_examples():
    assert counts(root_census(RationalPolynomial([-1, 0, 1]))) == (2, 0, 0)
    c = root_census(P_EX)
    assert counts(c) == (0, 2, 2)
    # the unimodular pair are the roots of x^2 + 2(1 - sqrt3) x + 1
    s3 = np.sqrt(3)
    expected = np.roots([1, 2 * (1 - s3), 1])
    uni = [complex(w.root) for w in c.witnesses if w.kind == "unimodular"]
    for z in expected:
        assert min(abs(z - u) for u in uni) < 1e-12
    assert counts(root_census(RationalPolynomial([1, -3, 1]))) == (0, 0, 2)


def test_root_census_matches_numpy(rng):
    for _ in range(40):
        deg = rng.randint(1, 5)
        coeffs = [rng.randint(-6, 6) for _ in range(deg)] + [1]
        p = RationalPolynomial(coeffs)
        c = root_census(p)
        assert sum(counts(c)) + c.n_undecided == deg
        roots = np.roots(list(reversed(coeffs)))
        off = sum(1 for z in roots if abs(abs(z) - 1) > 1e-6)
        if all(abs(abs(z) - 1) > 1e-6 or abs(abs(z) - 1) < 1e-9 for z in roots):
            assert c.n_off_circle == off


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=3))
def test_census_invariant_under_reversal_of_self_reciprocal(half):
    # palindromic p = x^d * p(1/x), built from a random half
    mid = half + [1] + list(reversed(half))[1:] if len(half) > 1 else half + [1]
    coeffs = [1] + half[1:] + list(reversed(half[1:])) + [1] if len(half) > 1 else [1, half[0], 1]
    p = RationalPolynomial(coeffs)
    c1, c2 = root_census(p), root_census(p.reversed())
    assert counts(c1) == counts(c2)
    assert sum(counts(c1)) + c1.n_undecided == p.degree


def test_lefschetz_examples():
    assert lefschetz_number(EQ8) == 0
    assert lefschetz_number(CAT) == -1
    assert lefschetz_number(IntegerMatrix.identity(2)) == 0


def test_prop1_examples():
    cert = prop1_obstruction(CAT)
    assert cert.obstructed and cert.q.is_one() and cert.r.coeffs == RationalPolynomial([1, -3, 1]).coeffs
    assert not prop1_obstruction(IntegerMatrix.companion(P_EX)).obstructed
    assert not prop1_obstruction(EQ8).obstructed


def test_classify_examples():
    assert classify(EQ8).verdict == Verdict.CONSTRUCTIBLE_MINIMAL
    assert classify(CAT).verdict == Verdict.EXCLUDED_LEFSCHETZ
    L = IntegerMatrix.companion(RationalPolynomial([-1, 4, -4, 1]))  # (x-1)(x^2-3x+1)
    assert classify(L).verdict == Verdict.EXCLUDED_PROP1
    ex5 = IntegerMatrix.block_diag(IntegerMatrix.companion(P_EX), IntegerMatrix.identity(1))
    assert classify(ex5).verdict == Verdict.OPEN_PROBLEM


PERMUTATION_SEEDS = [
    (IntegerMatrix([[0, 1], [1, 0]]), 2),
    (IntegerMatrix([[0, 0, 1], [1, 0, 0], [0, 1, 0]]), 3),
    (IntegerMatrix([[0, -1], [1, -1]]), 3),
    (IntegerMatrix([[0, -1], [1, 0]]), 4),
    (IntegerMatrix([[0, -1], [1, 1]]), 6),
    (IntegerMatrix.block_diag(IntegerMatrix([[1, 1], [0, 1]]), IntegerMatrix([[-1]])), 2),
    (IntegerMatrix.block_diag(IntegerMatrix([[0, -1], [1, 0]]), IntegerMatrix([[0, -1], [1, -1]])), 12),
]


def test_quasi_unipotent_order_on_random_conjugates():
    rng = random.Random(11)
    for i in range(100):
        P, order = PERMUTATION_SEEDS[i % len(PERMUTATION_SEEDS)]
        U = random_unimodular(P.n, rng)
        L = U @ P @ U.inverse()
        ok, m = quasi_unipotent_test(L)
        assert ok and m == order == power_oracle(L, cyclotomic_exponent(L.n))


def test_hyperbolic_2x2_never_constructible():
    rng = random.Random(3)
    seen = 0
    while seen < 100:
        U = random_unimodular(2, rng, steps=rng.randint(2, 8))
        tr = U.trace()
        if abs(tr) <= 2:
            continue
        if (IntegerMatrix.identity(2) - U).det() == 0:
            continue
        seen += 1
        assert classify(U).verdict in (Verdict.EXCLUDED_LEFSCHETZ, Verdict.EXCLUDED_PROP1)


@given(st.integers(0, 10**6))
def test_cyclotomic_split_product_and_coprime(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    L = random_unimodular(n, rng, steps=rng.randint(1, 10))
    from torusmin.exact import char_poly

    p = char_poly(L)
    q, r = cyclotomic_split(p, n)
    assert (q * r).coeffs == p.coeffs
    assert r.gcd(RationalPolynomial.x_power_minus_one(cyclotomic_exponent(n))).is_one()


def test_report_invariants(rng):
    for _ in range(60):
        n = rng.randint(1, 4)
        L = random_unimodular(n, rng, steps=rng.randint(1, 8))
        rep = classify(L)
        c = rep.census
        assert rep.quasi_unipotent == (c.n_unimodular_not_rou == c.n_off_circle == c.n_undecided == 0)
        if rep.verdict == Verdict.CONSTRUCTIBLE_MINIMAL:
            assert rep.quasi_unipotent and rep.has_eigenvalue_one and n <= 4
        assert rep.verdict != Verdict.OPEN_PROBLEM
