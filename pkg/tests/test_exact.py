import random
from fractions import Fraction

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from torusmin.errors import IntervalTooWide, NotSaturated, RankDeficient
from torusmin.exact import (
    IntegerMatrix,
    RationalPolynomial,
    as_q,
    char_poly,
    hnf_complete,
    min_poly,
    phase_mod1,
    smith_diagonal,
)

P_EX = RationalPolynomial([1, 4, -6, 4, 1])


def sympy_charpoly(M: IntegerMatrix) -> list:
    x = sympy.Symbol("x")
    c = sympy.Matrix(M.rows).charpoly(x).all_coeffs()
    return [int(v) for v in reversed(c)]


def annihilator_degree(M: IntegerMatrix) -> int:
    """Oracle: least d such that I, M, ..., M^d are linearly dependent (sympy rank)."""
    n = M.n
    S = sympy.Matrix(M.rows)
    powers = [sympy.eye(n)]
    for d in range(1, n + 1):
        powers.append(powers[-1] * S)
        stack = sympy.Matrix([list(P) for P in powers])
        if stack.rank() < d + 1:
            return d
    return n


def test_char_poly_examples():
    assert char_poly(IntegerMatrix.identity(2)).coeffs == RationalPolynomial([1, -2, 1]).coeffs
    assert char_poly(IntegerMatrix([[1, 0], [3, -1]])).coeffs == RationalPolynomial([-1, 0, 1]).coeffs
    assert char_poly(IntegerMatrix.companion(P_EX)).coeffs == P_EX.coeffs


def test_min_poly_examples():
    assert min_poly(IntegerMatrix.identity(3)).coeffs == RationalPolynomial([-1, 1]).coeffs
    assert min_poly(IntegerMatrix([[1, 0], [3, -1]])).coeffs == RationalPolynomial([-1, 0, 1]).coeffs
    M = IntegerMatrix.block_diag(IntegerMatrix.identity(2), IntegerMatrix([[1, 1], [0, 1]]))
    assert min_poly(M).coeffs == RationalPolynomial([1, -2, 1]).coeffs


matrices = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=n, max_size=n)
)


@given(matrices)
def test_char_poly_matches_sympy(rows):
    M = IntegerMatrix(rows)
    assert [int(c) for c in char_poly(M).coeffs] == sympy_charpoly(M)


@given(matrices)
def test_min_poly_divides_char_poly_and_annihilates(rows):
    M = IntegerMatrix(rows)
    mp, cp = min_poly(M), char_poly(M)
    assert mp.is_monic() and mp.divides(cp)
    assert all(v == 0 for row in M.eval_poly(mp) for v in row)
    assert mp.degree == annihilator_degree(M)


def test_min_poly_divides_char_poly_200_random():
    rng = random.Random(7)
    for _ in range(200):
        n = rng.randint(1, 4)
        M = IntegerMatrix([[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)])
        mp = min_poly(M)
        assert mp.divides(char_poly(M))
        assert all(v == 0 for row in M.eval_poly(mp) for v in row)


def test_determinant_matches_sympy(rng):
    for _ in range(50):
        n = rng.randint(1, 5)
        rows = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
        assert IntegerMatrix(rows).det() == sympy.Matrix(rows).det()


def test_smith_diagonal_matches_sympy(rng):
    from sympy.matrices.normalforms import smith_normal_form

    for _ in range(30):
        r, c = rng.randint(1, 3), 4
        rows = [[rng.randint(-6, 6) for _ in range(c)] for _ in range(r)]
        ours = [abs(d) for d in smith_diagonal(rows) if d]
        S = smith_normal_form(sympy.Matrix(rows), domain=sympy.ZZ)
        theirs = [abs(int(S[i, i])) for i in range(min(S.shape)) if S[i, i] != 0]
        assert sorted(ours) == sorted(theirs)


def test_hnf_complete_examples():
    assert hnf_complete([[1, 0]], 2) == IntegerMatrix.identity(2)
    U = hnf_complete([[1, -2]], 2)
    assert abs(U.det()) == 1 and U.col(0) == (1, -2)
    with pytest.raises(NotSaturated):
        hnf_complete([[2, 0]], 2)
    with pytest.raises(RankDeficient):
        hnf_complete([[1, 1], [2, 2]], 2)


@given(st.lists(st.integers(-20, 20), min_size=3, max_size=3).filter(any))
def test_hnf_complete_unimodular(v):
    from math import gcd

    g = gcd(*v)
    v = [x // g for x in v]
    U = hnf_complete([v], 3)
    assert abs(U.det()) == 1
    assert U.col(0) == tuple(v)


def test_phase_mod1_examples():
    assert phase_mod1(0, as_q("49/64"), as_q(0)).width == 0
    tail = 2 * mpq(1, 2**24)
    iv = phase_mod1(2, mpq(49, 64), tail)
    assert iv.contains(mpq(17, 32))
    assert iv.width == mpq(1, 2**21)
    with pytest.raises(IntervalTooWide):
        phase_mod1(2**719, mpq(49, 64), tail)


@given(st.integers(1, 10**6), st.integers(2, 5))
def test_phase_mod1_nests_with_longer_partial_sum(k, K):
    # alpha_K = sum_{j<=K} 2^{-j!}; tail 2 * 2^{-(K+1)!}
    def alpha(K):
        return sum((mpq(1, 2 ** _fact(j)) for j in range(1, K + 1)), mpq(0))

    coarse_tail = 2 * mpq(1, 2 ** _fact(K + 1))
    try:
        iv = phase_mod1(k, alpha(K), coarse_tail)
    except IntervalTooWide:
        return
    fine = alpha(K + 2)
    assert iv.contains((k * fine) % 1)


def _fact(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def test_json_roundtrip():
    M = IntegerMatrix([[1, 0], [3, -1]])
    assert M.to_json() == {"n": 2, "rows": [[1, 0], [3, -1]]}
    assert IntegerMatrix.from_json(M.to_json()) == M
    p = RationalPolynomial([-1, 0, 1])
    assert p.to_json() == {"coeffs": [-1, 0, 1]}
    assert RationalPolynomial.from_json(p.to_json()).coeffs == p.coeffs
    assert RationalPolynomial([Fraction(1, 2), 1]).coeffs[0] == Fraction(1, 2)
