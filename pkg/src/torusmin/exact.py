"""Exact integer/rational substrate: matrices, polynomials, lattices, mod-1 phases.

Nothing in this module touches floating point.  Matrices and polynomials are
immutable; every operation returns a new object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpq

from .errors import (
    IntervalTooWide,
    NotSaturated,
    NotSquare,
    NotUnimodular,
    RankDeficient,
)

__all__ = [
    "IntegerMatrix",
    "RationalPolynomial",
    "PhaseInterval",
    "char_poly",
    "min_poly",
    "smith_diagonal",
    "hnf_complete",
    "saturate",
    "rational_kernel",
    "rational_rank",
    "phase_mod1",
    "frac_to_str",
    "as_q",
    "str_to_frac",
    "to_mpf",
]


def as_q(x) -> mpq:
    """Coerce int / Fraction / "p/q" string / mpq to a GMP rational."""
    if isinstance(x, str):
        return mpq(x.strip())
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def frac_to_str(x) -> str:
    x = as_q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def str_to_frac(s) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    return Fraction(str(s).strip())


# ---------------------------------------------------------------------------
# Integer matrices


@dataclass(frozen=True)
class IntegerMatrix:
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        if any(len(r) != len(rows) for r in rows):
            raise NotSquare(f"matrix is not square: {[len(r) for r in rows]}")
        object.__setattr__(self, "rows", rows)

    # construction ---------------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, n: int) -> "IntegerMatrix":
        return cls(tuple((0,) * n for _ in range(n)))

    @classmethod
    def companion(cls, poly: "RationalPolynomial") -> "IntegerMatrix":
        """Companion matrix of a monic integer polynomial (sub-diagonal ones, last column -coeffs)."""
        p = poly.monic()
        if not p.is_integral():
            raise ValueError("companion matrix needs integer coefficients")
        n = p.degree
        rows = [[0] * n for _ in range(n)]
        for i in range(1, n):
            rows[i][i - 1] = 1
        for i in range(n):
            rows[i][n - 1] = -int(p.coeffs[i])
        return cls(rows)

    @classmethod
    def block_diag(cls, *blocks: "IntegerMatrix") -> "IntegerMatrix":
        n = sum(b.n for b in blocks)
        rows = [[0] * n for _ in range(n)]
        off = 0
        for b in blocks:
            for i in range(b.n):
                for j in range(b.n):
                    rows[off + i][off + j] = b.rows[i][j]
            off += b.n
        return cls(rows)

    @classmethod
    def block_lower(cls, A, C, B) -> "IntegerMatrix":
        """Assemble [[A, 0], [C, B]]; C is a list of (n-p) rows of length p."""
        p, q = A.n, B.n
        rows = [list(A.rows[i]) + [0] * q for i in range(p)]
        for i in range(q):
            rows.append(list(C[i]) + list(B.rows[i]))
        return cls(rows)

    # basic structure --------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def tolist(self) -> list:
        return [list(r) for r in self.rows]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix(tuple(zip(*self.rows)) if self.n else ())

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> list:
        """Rectangular slice as a plain list of rows (may be non-square)."""
        return [list(r[c0:c1]) for r in self.rows[r0:r1]]

    def block(self, r0: int, r1: int) -> "IntegerMatrix":
        return IntegerMatrix([r[r0:r1] for r in self.rows[r0:r1]])

    def is_zero(self) -> bool:
        return all(v == 0 for r in self.rows for v in r)

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        return IntegerMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return IntegerMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return IntegerMatrix([[-a for a in r] for r in self.rows])

    def scale(self, c: int) -> "IntegerMatrix":
        return IntegerMatrix([[c * a for a in r] for r in self.rows])

    def __matmul__(self, other):
        if isinstance(other, IntegerMatrix):
            cols = list(zip(*other.rows))
            return IntegerMatrix([[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.rows])
        # vector (any numeric entries)
        return tuple(sum(a * b for a, b in zip(r, other)) for r in self.rows)

    def __pow__(self, e: int) -> "IntegerMatrix":
        if e < 0:
            return self.inverse() ** (-e)
        result = IntegerMatrix.identity(self.n)
        base = self
        while e:
            if e & 1:
                result = result @ base
            base = base @ base
            e >>= 1
        return result

    def trace(self) -> int:
        return sum(self.rows[i][i] for i in range(self.n))

    def det(self) -> int:
        """Bareiss fraction-free elimination."""
        n = self.n
        if n == 0:
            return 1
        a = [list(r) for r in self.rows]
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def is_unimodular(self) -> bool:
        return self.det() in (1, -1)

    def inverse(self) -> "IntegerMatrix":
        if not self.is_unimodular():
            raise NotUnimodular(f"det = {self.det()}")
        inv = rational_inverse(self.rows)
        return IntegerMatrix([[int(v) for v in r] for r in inv])

    def eval_poly(self, poly: "RationalPolynomial") -> list:
        """poly(M) as a matrix of Fractions (Horner)."""
        n = self.n
        acc = [[Fraction(0)] * n for _ in range(n)]
        for c in reversed(poly.coeffs):
            acc = _mat_mul(acc, self.rows)
            for i in range(n):
                acc[i][i] += c
        return acc

    # serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        return {"n": self.n, "rows": self.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "IntegerMatrix":
        m = cls(d["rows"])
        if "n" in d and d["n"] != m.n:
            raise ValueError("declared n does not match rows")
        return m

    def __repr__(self):
        return f"IntegerMatrix({self.tolist()})"


def _mat_mul(a, b):
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(r, c)) for c in cols] for r in a]


# ---------------------------------------------------------------------------
# Rational linear algebra (lists of Fractions)


def rref(rows: Sequence[Sequence]) -> tuple[list, list]:
    """Reduced row echelon form over Q; returns (matrix, pivot columns)."""
    a = [[Fraction(v) for v in r] for r in rows]
    if not a:
        return a, []
    m, ncols = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, m) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pv = a[r][c]
        a[r] = [v / pv for v in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return a, pivots


def rational_rank(rows) -> int:
    return len(rref(rows)[1])


def rational_kernel(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of the right null space {v : M v = 0} over Q."""
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    a, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -a[r][f]
        basis.append(v)
    return basis


def rational_inverse(rows) -> list[list[Fraction]]:
    n = len(rows)
    aug = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [r[n:] for r in red]


def clear_denominators(v: Sequence[Fraction]) -> list[int]:
    """Primitive integer vector on the same rational line."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
    w = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in w:
        g = math.gcd(g, x)
    return [x // g for x in w] if g else w


# ---------------------------------------------------------------------------
# Polynomials


class RationalPolynomial:
    """Polynomial with Fraction coefficients in ascending degree order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def x_power_minus_one(cls, m: int) -> "RationalPolynomial":
        return cls([-1] + [0] * (m - 1) + [1])

    @classmethod
    def from_roots(cls, roots: Iterable[int]) -> "RationalPolynomial":
        p = cls([1])
        for r in roots:
            p = p * cls([-r, 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_one(self) -> bool:
        return self.coeffs == (1,)

    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def monic(self) -> "RationalPolynomial":
        if self.is_zero():
            return self
        lc = self.coeffs[-1]
        return RationalPolynomial(c / lc for c in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, RationalPolynomial):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return RationalPolynomial((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))

    def __neg__(self):
        return RationalPolynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, RationalPolynomial):
            return RationalPolynomial(c * other for c in self.coeffs)
        if self.is_zero() or other.is_zero():
            return RationalPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        r = RationalPolynomial([1])
        for _ in range(e):
            r = r * self
        return r

    def divmod(self, other: "RationalPolynomial"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lc = other.coeffs[-1]
        if len(rem) - 1 < dq:
            return RationalPolynomial(), self
        quot = [Fraction(0)] * (len(rem) - dq)
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i] / lc
            quot[i - dq] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[i - dq + j] -= c * b
        return RationalPolynomial(quot), RationalPolynomial(rem[:dq])

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def divides(self, other: "RationalPolynomial") -> bool:
        return (other % self).is_zero()

    def exact_div(self, other: "RationalPolynomial") -> "RationalPolynomial":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ValueError("division is not exact")
        return q

    def gcd(self, other: "RationalPolynomial") -> "RationalPolynomial":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def lcm(self, other: "RationalPolynomial") -> "RationalPolynomial":
        if self.is_zero() or other.is_zero():
            return RationalPolynomial()
        return (self * other).exact_div(self.gcd(other)).monic()

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial(i * c for i, c in enumerate(self.coeffs) if i)

    def reversed(self) -> "RationalPolynomial":
        """x^deg * p(1/x)."""
        return RationalPolynomial(reversed(self.coeffs))

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def squarefree_decomposition(self) -> list[tuple["RationalPolynomial", int]]:
        """Yun's algorithm: list of (squarefree factor, multiplicity), factors pairwise coprime."""
        f = self.monic()
        out = []
        if f.degree < 1:
            return out
        a0 = f.gcd(f.derivative())
        b = f.exact_div(a0)
        c = f.derivative().exact_div(a0)
        d = c - b.derivative()
        i = 1
        while b.degree > 0:
            a = b.gcd(d)
            b = b.exact_div(a)
            c = d.exact_div(a)
            d = c - b.derivative()
            if a.degree > 0:
                out.append((a.monic(), i))
            i += 1
        return out

    def to_json(self) -> dict:
        return {"coeffs": [int(c) if c.denominator == 1 else frac_to_str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, d: dict) -> "RationalPolynomial":
        return cls(str_to_frac(c) for c in d["coeffs"])

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mon = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mon and c == 1:
                s = mon
            elif mon and c == -1:
                s = "-" + mon
            else:
                s = f"{c}{'*' if mon else ''}{mon}"
            terms.append(s)
        return " + ".join(terms).replace("+ -", "- ")


X_MINUS_ONE = RationalPolynomial([-1, 1])


def char_poly(M: IntegerMatrix) -> RationalPolynomial:
    """det(xI - M) by Faddeev-LeVerrier; every division is exact over Z."""
    n = M.n
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    prev = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        mk = _mat_mul(M.rows, prev)
        c = coeffs[n - k + 1]
        for i in range(n):
            mk[i][i] += c
        am = _mat_mul(M.rows, mk)
        coeffs[n - k] = Fraction(-sum(am[i][i] for i in range(n)), k)
        prev = mk
    return RationalPolynomial(coeffs)


def _krylov_annihilator(rows, v) -> RationalPolynomial:
    """Monic least-degree polynomial a with a(M) v = 0."""
    n = len(rows)
    vecs = [[Fraction(x) for x in v]]
    while True:
        w = [sum(a * b for a, b in zip(r, vecs[-1])) for r in rows]
        vecs.append(w)
        # find a relation w = sum c_i vecs[i]
        cols = vecs[:-1]
        mat = [[cols[j][i] for j in range(len(cols))] + [w[i]] for i in range(n)]
        red, piv = rref(mat)
        if len(cols) not in piv:
            coeffs = [Fraction(0)] * len(cols)
            for r, pc in enumerate(piv):
                coeffs[pc] = red[r][len(cols)]
            return RationalPolynomial([-c for c in coeffs] + [1])


def min_poly(M: IntegerMatrix) -> RationalPolynomial:
    """lcm of per-basis-vector Krylov annihilators."""
    n = M.n
    p = RationalPolynomial([1])
    for i in range(n):
        e = [int(i == j) for j in range(n)]
        p = p.lcm(_krylov_annihilator(M.rows, e))
    return p


# ---------------------------------------------------------------------------
# Lattices


def smith_diagonal(rows: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero elementary divisors of an integer matrix (any shape)."""
    a = [list(map(int, r)) for r in rows]
    if not a or not a[0]:
        return []
    m, n = len(a), len(a[0])
    diag = []
    t = 0
    while t < min(m, n):
        nz = [(abs(a[i][j]), i, j) for i in range(t, m) for j in range(t, n) if a[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        a[t], a[pi] = a[pi], a[t]
        for r in a:
            r[t], r[pj] = r[pj], r[t]
        done = False
        while not done:
            done = True
            p = a[t][t]
            for i in range(t + 1, m):
                q = a[i][t] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t]:
                    a[t], a[i] = a[i], a[t]
                    done = False
                    break
            if not done:
                continue
            for j in range(t + 1, n):
                q = a[t][j] // p
                if q:
                    for r in a:
                        r[j] -= q * r[t]
                if a[t][j]:
                    for r in a:
                        r[t], r[j] = r[j], r[t]
                    done = False
                    break
            if not done:
                continue
            # divisibility condition
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if a[i][j] % p), None)
            if bad:
                i, _ = bad
                a[t] = [x + y for x, y in zip(a[t], a[i])]
                done = False
        diag.append(abs(a[t][t]))
        t += 1
    return diag


def _row_hermite(cols: list[list[int]], n: int):
    """Unimodular U (n x n) with U B = [H; 0] for B given by columns; returns (U, H rows)."""
    r = len(cols)
    B = [[cols[j][i] for j in range(r)] for i in range(n)]
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    row = 0
    for c in range(r):
        # gather gcd into position (row, c) using rows row..n-1
        for i in range(row + 1, n):
            while B[i][c]:
                q = B[row][c] // B[i][c]
                B[row] = [x - q * y for x, y in zip(B[row], B[i])]
                U[row] = [x - q * y for x, y in zip(U[row], U[i])]
                B[row], B[i] = B[i], B[row]
                U[row], U[i] = U[i], U[row]
        if B[row][c] == 0:
            continue
        if B[row][c] < 0:
            B[row] = [-x for x in B[row]]
            U[row] = [-x for x in U[row]]
        for i in range(row):
            q = B[i][c] // B[row][c]
            if q:
                B[i] = [x - q * y for x, y in zip(B[i], B[row])]
                U[i] = [x - q * y for x, y in zip(U[i], U[row])]
        row += 1
    return U, B[:row]


def hnf_complete(basis: Sequence[Sequence[int]], n: int | None = None) -> IntegerMatrix:
    """Complete a basis of a saturated sublattice of Z^n to a basis of Z^n.

    Returns a unimodular matrix whose first len(basis) columns are the given
    vectors (unchanged) and whose remaining columns complete them.
    """
    basis = [list(map(int, v)) for v in basis]
    if n is None:
        if not basis:
            raise ValueError("dimension required for an empty basis")
        n = len(basis[0])
    r = len(basis)
    if r == 0:
        return IntegerMatrix.identity(n)
    if rational_rank(basis) < r:
        raise RankDeficient(f"{r} vectors span rank {rational_rank(basis)}")
    divs = smith_diagonal(basis)
    if any(d != 1 for d in divs):
        raise NotSaturated(f"elementary divisors {divs}")
    U, H = _row_hermite(basis, n)
    W = IntegerMatrix(U).inverse()
    rows = [list(v) for v in zip(*basis)]
    for i in range(n):
        rows[i] += list(W.rows[i][r:])
    out = IntegerMatrix(rows)
    assert out.is_unimodular()
    return out


def saturate(vectors: Sequence[Sequence], n: int) -> list[list[int]]:
    """Basis of (Q-span of vectors) ∩ Z^n."""
    ints = [clear_denominators(v) for v in vectors]
    ints = [v for v in ints if any(v)]
    if not ints:
        return []
    rank = rational_rank(ints)
    U, H = _row_hermite(ints, n)
    W = IntegerMatrix(U).inverse()
    # first `rank` columns of U^{-1} span the same Q-space and are part of a Z-basis
    return [list(W.col(j)) for j in range(rank)]


# ---------------------------------------------------------------------------
# Phases mod 1


@dataclass(frozen=True)
class PhaseInterval:
    """Closed arc [lower, upper] of R/Z; when ``wraps`` the arc passes through 0."""

    lower: object  # exact rational (mpq or Fraction)
    upper: object
    wraps: bool = False

    @property
    def width(self):
        return self.upper - self.lower + (1 if self.wraps else 0)

    def unwrapped(self) -> tuple:
        return self.lower, self.upper + (1 if self.wraps else 0)

    def contains(self, x) -> bool:
        x = as_q(x)
        x = x - math.floor(x)
        if self.wraps:
            return x >= self.lower or x <= self.upper
        return self.lower <= x <= self.upper

    def shift(self, t) -> "PhaseInterval":
        lo, hi = self.unwrapped()
        return _arc(lo + as_q(t), hi + as_q(t))

    def norm_bounds(self) -> tuple:
        """Bounds on ||x|| (distance to the nearest integer) over the arc."""
        lo, hi = self.unwrapped()
        if math.floor(hi) >= math.ceil(lo):  # contains an integer
            low = mpq(0)
        else:
            low = min(_norm(lo), _norm(hi))
        half = math.floor(lo - mpq(1, 2)) + mpq(1, 2)
        if half < lo:
            half += 1
        high = mpq(1, 2) if half <= hi else max(_norm(lo), _norm(hi))
        return low, high

    def to_json(self) -> dict:
        return {"lower": frac_to_str(self.lower), "upper": frac_to_str(self.upper), "wraps": self.wraps}


def _norm(x):
    f = x - math.floor(x)
    return min(f, 1 - f)


def _arc(lo, hi) -> PhaseInterval:
    if hi - lo >= 1:
        raise IntervalTooWide(f"phase enclosure of width {float(hi - lo):.3g} >= 1")
    fl = math.floor(lo)
    lo_r, hi_r = lo - fl, hi - fl
    if hi_r >= 1:
        return PhaseInterval(lo_r, hi_r - 1, True)
    return PhaseInterval(lo_r, hi_r, False)


def phase_mod1(k: int, alpha, tail_bound) -> PhaseInterval:
    """Arc containing k * alpha_true mod 1 given |alpha_true - alpha| <= tail_bound.

    GMP rationals keep the factorial-sized denominators of Liouville partial
    sums cheap; no floating point is involved.
    """
    alpha, tail_bound = as_q(alpha), as_q(tail_bound)
    if tail_bound < 0:
        raise ValueError("tail bound must be nonnegative")
    if k == 0:
        return PhaseInterval(mpq(0), mpq(0))
    k = gmpy2.mpz(k)
    da = alpha.denominator
    center = mpq((k * alpha.numerator) % da, da)
    half = abs(k) * tail_bound
    if 2 * half >= 1:
        raise IntervalTooWide(f"width 2*|k|*tail >= 1 for |k| of {int(abs(k)).bit_length()} bits")
    return _arc(center - half, center + half)


def to_mpf(x):
    """mpq / Fraction / int to an mpmath real at the working precision."""
    import mpmath

    x = as_q(x) if not isinstance(x, float) else x
    if isinstance(x, float):
        return mpmath.mpf(x)
    return mpmath.mpf(int(x.numerator)) / int(x.denominator)
