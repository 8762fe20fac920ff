"""Invariant-lattice change of basis to the block lower-triangular shape.

For a quasi-unipotent L with eigenvalue 1 we find a unimodular U with

    U L U^{-1} = [[A, 0],
                  [C, B]]

where A is unipotent and B has no eigenvalue 1.  The trailing coordinates
span the invariant sublattice ker v(L) ∩ Z^n, v being the part of the
minimal polynomial prime to (x - 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NoEigenvalueOne, NotADivisor, NotQuasiUnipotent, NotUnimodular
from .exact import (
    X_MINUS_ONE,
    IntegerMatrix,
    RationalPolynomial,
    char_poly,
    hnf_complete,
    min_poly,
    rational_kernel,
    rref,
    saturate,
)
from .spectra import quasi_unipotent_test

__all__ = [
    "BlockForm",
    "invariant_sublattice",
    "block_form",
    "basis_with_last",
    "flag_basis",
    "conjugate",
]


def conjugate(U: IntegerMatrix, L: IntegerMatrix) -> IntegerMatrix:
    return U @ L @ U.inverse()


def invariant_sublattice(L: IntegerMatrix, v: RationalPolynomial) -> list[list[int]]:
    """Saturated basis of ker v(L) ∩ Z^n."""
    if v.is_zero() or not v.divides(min_poly(L)):
        raise NotADivisor(f"{v!r} does not divide the minimal polynomial")
    vL = L.eval_poly(v)
    ker = rational_kernel(vL, L.n)
    return saturate(ker, L.n)


def basis_with_last(last: list[list[int]], n: int) -> IntegerMatrix:
    """Unimodular W (det +1) whose trailing columns are `last`."""
    if not last:
        return IntegerMatrix.identity(n)
    H = hnf_complete(last, n)
    r = len(last)
    order = list(range(r, n)) + list(range(r))
    cols = [H.col(j) for j in order]
    if n > r and IntegerMatrix(list(zip(*cols))).det() < 0:
        cols[0] = tuple(-x for x in cols[0])
    return IntegerMatrix(list(zip(*cols)))


def _coords(basis: list[list[int]], v: list[int]) -> list[int]:
    """Integer coordinates of v in a lattice basis (v must lie in the lattice)."""
    n = len(v)
    mat = [[basis[j][i] for j in range(len(basis))] + [v[i]] for i in range(n)]
    red, piv = rref(mat)
    out = [Fraction(0)] * len(basis)
    for r, pc in enumerate(piv):
        if pc == len(basis):
            raise ValueError("vector not in span")
        out[pc] = red[r][len(basis)]
    if any(x.denominator != 1 for x in out):
        raise ValueError("vector not in lattice")
    return [int(x) for x in out]


def flag_basis(N: IntegerMatrix) -> IntegerMatrix:
    """Unimodular W with W^{-1} N W strictly lower triangular, for nilpotent N.

    Built from the saturated kernel chain ker N ⊂ ker N^2 ⊂ ...; deeper layers
    come first so N pushes every basis vector onto later ones.
    """
    n = N.n
    layers: list[list[list[int]]] = []
    prev: list[list[int]] = []
    power = IntegerMatrix.identity(n)
    while len(prev) < n:
        power = power @ N
        K = saturate(rational_kernel(power.rows, n), n) if not power.is_zero() else [
            [int(i == j) for i in range(n)] for j in range(n)
        ]
        if len(K) == len(prev):
            raise ValueError("matrix is not nilpotent")
        coords = [_coords(K, v) for v in prev]
        full = hnf_complete(coords, len(K)) if coords else IntegerMatrix.identity(len(K))
        new = []
        for j in range(len(prev), len(K)):
            c = full.col(j)
            new.append([sum(c[t] * K[t][i] for t in range(len(K))) for i in range(n)])
        layers.append(new)
        prev = prev + new
    cols = [v for layer in reversed(layers) for v in layer]
    W = IntegerMatrix(list(zip(*cols)))
    if W.det() < 0:
        W = IntegerMatrix([[-r[0]] + list(r[1:]) for r in W.rows])
    return W


@dataclass(frozen=True)
class BlockForm:
    L: IntegerMatrix
    U: IntegerMatrix
    p: int
    A: IntegerMatrix
    B: IntegerMatrix
    C: tuple  # (n - p) rows of length p

    @property
    def n(self) -> int:
        return self.L.n

    def assembled(self) -> IntegerMatrix:
        return IntegerMatrix.block_lower(self.A, self.C, self.B)

    def b_has_eigenvalue_one(self) -> bool:
        return self.B.n > 0 and char_poly(self.B)(1) == 0

    def verify(self) -> bool:
        n, p = self.n, self.p
        if not self.U.is_unimodular():
            return False
        if conjugate(self.U, self.L) != self.assembled():
            return False
        N1 = self.A - IntegerMatrix.identity(p)
        if not (N1 ** p).is_zero():
            return False
        if self.B.n:
            if (IntegerMatrix.identity(n - p) - self.B).det() == 0:
                return False
            qu, _ = quasi_unipotent_test(self.B)
            if not qu:
                return False
        return True

    def to_json(self) -> dict:
        return {
            "U": self.U.to_json(),
            "p": self.p,
            "A": self.A.to_json(),
            "B": self.B.to_json(),
            "C": [list(r) for r in self.C],
        }

    @classmethod
    def from_json(cls, d: dict, L: IntegerMatrix) -> "BlockForm":
        return cls(
            L,
            IntegerMatrix.from_json(d["U"]),
            d["p"],
            IntegerMatrix.from_json(d["A"]),
            IntegerMatrix.from_json(d["B"]),
            tuple(tuple(r) for r in d["C"]),
        )


def _split(M: IntegerMatrix, p: int) -> tuple[IntegerMatrix, tuple, IntegerMatrix]:
    n = M.n
    if any(M.rows[i][j] for i in range(p) for j in range(p, n)):
        raise AssertionError("upper-right block is not zero")
    A = M.block(0, p)
    B = M.block(p, n)
    C = tuple(tuple(M.rows[i][:p]) for i in range(p, n))
    return A, C, B


def block_form(L: IntegerMatrix) -> BlockForm:
    if not L.is_unimodular():
        raise NotUnimodular(f"det = {L.det()}")
    if char_poly(L)(1) != 0:
        raise NoEigenvalueOne("1 is not an eigenvalue")
    qu, _ = quasi_unipotent_test(L)
    if not qu:
        raise NotQuasiUnipotent("some eigenvalue is not a root of unity")
    v = min_poly(L)
    while (v % X_MINUS_ONE).is_zero():
        v = v.exact_div(X_MINUS_ONE)
    gamma = invariant_sublattice(L, v)
    n = L.n
    W = basis_with_last(gamma, n)
    U = W.inverse()
    p = n - len(gamma)
    A, C, B = _split(U @ L @ W, p)
    bf = BlockForm(L, U, p, A, B, C)
    assert bf.verify()
    return bf
