import random

import pytest

from torusmin.blockform import block_form, conjugate, invariant_sublattice
from torusmin.exact import IntegerMatrix, RationalPolynomial, char_poly, min_poly, smith_diagonal
from torusmin.spectra import quasi_unipotent_test

from helpers import EQ8, random_unimodular


def check_invariants(bf):
    n, p = bf.L.n, bf.p
    M = conjugate(bf.U, bf.L)
    assert M == IntegerMatrix.block_lower(bf.A, bf.C, bf.B)
    assert abs(bf.U.det()) == 1
    # A unipotent
    N = bf.A - IntegerMatrix.identity(p)
    assert (N ** p).is_zero() if p else True
    # B: no eigenvalue 1, and quasi-unipotent
    d = n - p
    if d:
        assert (IntegerMatrix.identity(d) - bf.B).det() != 0
        assert quasi_unipotent_test(bf.B)[0]


def multiplicity_of_one(L):
    p = char_poly(L)
    x1 = RationalPolynomial([-1, 1])
    m = 0
    while x1.divides(p):
        p = p.exact_div(x1)
        m += 1
    return m


def test_invariant_sublattice_examples():
    L = IntegerMatrix([[1, 1], [0, -1]])
    assert len(invariant_sublattice(L, min_poly(L))) == 2
    basis = invariant_sublattice(L, RationalPolynomial([1, 1]))
    assert len(basis) == 1 and basis[0] in ([1, -2], [-1, 2])
    assert invariant_sublattice(L, RationalPolynomial([1])) == []


def test_block_form_examples():
    bf = block_form(EQ8)
    assert bf.U == IntegerMatrix.identity(2) and bf.p == 1
    assert bf.A == IntegerMatrix([[1]]) and bf.B == IntegerMatrix([[-1]]) and bf.C == ((3,),)
    bf = block_form(IntegerMatrix([[1, 1], [0, -1]]))
    assert bf.p == 1 and bf.A == IntegerMatrix([[1]]) and bf.B == IntegerMatrix([[-1]])
    check_invariants(bf)
    bf = block_form(IntegerMatrix.identity(3))
    assert bf.p == 3 and bf.B.n == 0


SEEDS = [
    (IntegerMatrix([[1]]), ((3,),), IntegerMatrix([[-1]])),
    (IntegerMatrix([[1]]), ((1,), (0,)), IntegerMatrix([[0, -1], [1, -1]])),
    (IntegerMatrix([[1]]), ((2,), (1,)), IntegerMatrix([[0, -1], [1, 0]])),
    (IntegerMatrix([[1, 0], [1, 1]]), ((2, 1),), IntegerMatrix([[-1]])),
    (IntegerMatrix([[1]]), ((1,), (1,), (0,)), IntegerMatrix([[-1, 0, 0], [0, 0, -1], [0, 1, 1]])),
    (IntegerMatrix([[1, 0], [1, 1]]), ((1, 0), (0, 1)), IntegerMatrix([[0, -1], [1, -1]])),
    (IntegerMatrix([[1, 0, 0], [1, 1, 0], [0, 1, 1]]), ((1, 2, 0),), IntegerMatrix([[-1]])),
]


def test_block_form_on_random_conjugates():
    rng = random.Random(5)
    for i in range(100):
        A, C, B = SEEDS[i % len(SEEDS)]
        seed = IntegerMatrix.block_lower(A, C, B)
        U = random_unimodular(seed.n, rng)
        L = U @ seed @ U.inverse()
        bf = block_form(L)
        check_invariants(bf)
        assert bf.p == multiplicity_of_one(L) == A.n
        basis = invariant_sublattice(L, RationalPolynomial([1]) if B.n == 0 else _v_part(L))
        assert all(d == 1 for d in smith_diagonal(basis) if d) if basis else True


def _v_part(L):
    mp = min_poly(L)
    x1 = RationalPolynomial([-1, 1])
    while x1.divides(mp):
        mp = mp.exact_div(x1)
    return mp


def test_json_roundtrip():
    bf = block_form(IntegerMatrix([[1, 1], [0, -1]]))
    d = bf.to_json()
    assert set(d) >= {"U", "p", "A", "B", "C"}
    assert type(bf).from_json(d, bf.L) == bf
