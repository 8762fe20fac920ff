"""Skew products phi(X, Y) = (A X + alpha, C X + B Y + F(x)) on T^p x T^(n-p).

Points are kept on the covering space as exact rationals: the base map is
affine with rational data, and each evaluation of F (a dyadic mpf) is folded
in exactly, so the only error is the rounding inside F, tracked per step.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from gmpy2 import mpq

from .blockform import BlockForm, basis_with_last, block_form, flag_basis, invariant_sublattice
from .errors import NotConstructible, UnsupportedBranch
from .exact import (
    X_MINUS_ONE,
    IntegerMatrix,
    RationalPolynomial,
    as_q,
    frac_to_str,
    min_poly,
    rational_kernel,
    rref,
    saturate,
    to_mpf,
)
from .fourier import (
    REAL_SQRT2,
    QuadElem,
    SparseFourierSeries,
    eigenvector,
    evaluate,
    root_of_unity,
    synthesize_case,
)
from .liouville import LiouvilleDatum, build_liouville, sqrt_enclosure
from .spectra import SpectralReport, Verdict, classify

__all__ = [
    "SkewProductSystem",
    "IterateFormula",
    "WitnessPlan",
    "construct_minimal",
    "construct_from_matrix",
    "iterate_formula",
    "iterate_closed",
    "iterate_steps",
    "skeleton_matches_power",
    "C_l",
    "h_action_check",
    "h_generators",
    "mod1",
    "periodic_order",
]

X_PLUS_ONE = RationalPolynomial([1, 1])


# ---------------------------------------------------------------------------
# small rectangular helpers (lists of rows; empty shapes allowed)


def _mm(a, b, inner: int, ncols: int):
    return [[sum(a[i][t] * b[t][j] for t in range(inner)) for j in range(ncols)] for i in range(len(a))]


def _mv(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def _madd(a, b):
    return [[x + y for x, y in zip(r, s)] for r, s in zip(a, b)]


def _zeros(r, c):
    return [[0] * c for _ in range(r)]


def _ident(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _dyadic_sqrt(c: int, bits: int) -> mpq:
    return sqrt_enclosure(c, bits)[0]


def mod1(z):
    return tuple(x - (x.numerator // x.denominator) for x in map(as_q, z))


def periodic_order(B: IntegerMatrix, limit: int = 12) -> int | None:
    """Least m <= limit with B^m = I."""
    P = IntegerMatrix.identity(B.n)
    for m in range(1, limit + 1):
        P = P @ B
        if P == IntegerMatrix.identity(B.n):
            return m
    return None


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessPlan:
    """What the cohomology module has to check for this branch."""

    probes: tuple  # dicts: sequence index, lambda, identity to violate
    matching: str  # condition under which the affine parts match
    psi0: dict  # exact affine data of the quotient map
    H: dict  # generators of H = ker(B^m - I mod Z)
    notes: tuple = ()

    def to_json(self) -> dict:
        return {"probes": list(self.probes), "matching": self.matching, "psi0": self.psi0, "H": self.H, "notes": list(self.notes)}


@dataclass(frozen=True)
class SkewProductSystem:
    p: int
    n: int
    A: IntegerMatrix
    B: IntegerMatrix
    C: tuple  # (n - p) rows of length p
    alpha: tuple  # mpq, length p
    F: SparseFourierSeries  # function of x = X[0], values in R^(n-p)
    case_tag: str
    m: int = 1
    L: IntegerMatrix | None = None
    U: IntegerMatrix | None = None  # U L U^{-1} = linear part
    liouville: LiouvilleDatum | None = None
    plan: WitnessPlan | None = None
    base: "SkewProductSystem | None" = None
    notes: tuple = ()
    precision: int = 256

    def __post_init__(self):
        N = self.A - IntegerMatrix.identity(self.p)
        if not (N ** self.p).is_zero():
            raise ValueError("A must be unipotent")
        if not self.linear_part().is_unimodular():
            raise ValueError("linear part is not unimodular")
        if self.F.dim_range != self.n - self.p:
            raise ValueError("F has the wrong range dimension")

    @property
    def d(self) -> int:
        return self.n - self.p

    def linear_part(self) -> IntegerMatrix:
        return IntegerMatrix.block_lower(self.A, self.C, self.B)

    def matches_input(self) -> bool:
        """U^{-1} (linear part) U == L exactly."""
        if self.L is None:
            return True
        return self.U.inverse() @ self.linear_part() @ self.U == self.L

    def augmented(self) -> list:
        """(n+1)x(n+1) rational matrix of the F-free affine map."""
        M = [list(r) for r in self.linear_part().rows]
        for i in range(self.n):
            M[i] = [Fraction(x) for x in M[i]] + [Fraction(int(self.alpha[i].numerator), int(self.alpha[i].denominator)) if i < self.p else Fraction(0)]
        M.append([Fraction(0)] * self.n + [Fraction(1)])
        return M

    # one step --------------------------------------------------------------
    def _F(self, x, prec):
        if self.F.is_zero():
            return [mpq(0)] * self.d, mpmath.mpf(0)
        vals, err = evaluate(self.F, (x,), prec, include_tail=False)
        return [_exact(v) for v in vals], err

    def step(self, z, prec: int | None = None):
        """phi(z) and the rounding error bound of this step (fiber sup-norm)."""
        prec = prec or self.precision
        z = tuple(map(as_q, z))
        X, Y = z[: self.p], z[self.p :]
        Xn = [v + a for v, a in zip(_mv(self.A.rows, X), self.alpha)]
        fv, err = self._F(X[0], prec)
        Yn = [c + b + f for c, b, f in zip(_mv(self.C, X), _mv(self.B.rows, Y), fv)]
        return tuple(Xn) + tuple(Yn), err

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "A": self.A.to_json(),
            "B": self.B.to_json(),
            "C": [list(r) for r in self.C],
            "alpha": [frac_to_str(a) for a in self.alpha],
            "F": self.F.to_json(),
            "case_tag": self.case_tag,
            "m": self.m,
            "L": self.L.to_json() if self.L is not None else None,
            "U": self.U.to_json() if self.U is not None else None,
            "liouville": self.liouville.to_json() if self.liouville is not None else None,
            "plan": self.plan.to_json() if self.plan is not None else None,
            "base": self.base.to_json() if self.base is not None else None,
            "notes": list(self.notes),
            "precision": self.precision,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SkewProductSystem":
        plan = d.get("plan")
        return cls(
            d["p"],
            d["n"],
            IntegerMatrix.from_json(d["A"]),
            IntegerMatrix.from_json(d["B"]),
            tuple(tuple(r) for r in d["C"]),
            tuple(as_q(a) for a in d["alpha"]),
            SparseFourierSeries.from_json(d["F"]),
            d["case_tag"],
            d.get("m", 1),
            IntegerMatrix.from_json(d["L"]) if d.get("L") else None,
            IntegerMatrix.from_json(d["U"]) if d.get("U") else None,
            LiouvilleDatum.from_json(d["liouville"]) if d.get("liouville") else None,
            WitnessPlan(tuple(plan["probes"]), plan["matching"], plan["psi0"], plan["H"], tuple(plan["notes"])) if plan else None,
            cls.from_json(d["base"]) if d.get("base") else None,
            tuple(d.get("notes", ())),
            d.get("precision", 256),
        )


def _exact(v) -> mpq:
    """Exact rational value of a finite mpf (no rounding to the ambient precision)."""
    if not isinstance(v, mpmath.mpf):
        return as_q(v)
    sign, man, exp, _ = v._mpf_
    if not man and exp:
        raise ValueError("non-finite value")
    man = -int(man) if sign else int(man)
    return mpq(man * 2**exp) if exp >= 0 else mpq(man, 2 ** (-exp))


# ---------------------------------------------------------------------------
# closed-form iterates


@dataclass(frozen=True)
class IterateFormula:
    m: int
    Am: IntegerMatrix
    a_m: tuple  # translation of a^m
    C_m: list
    Bm: IntegerMatrix
    alpha_m: tuple  # sum_{l<m} C_l alpha (C_0 = 0)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "A^m": self.Am.to_json(),
            "a_m": [frac_to_str(x) for x in self.a_m],
            "C_m": self.C_m,
            "B^m": self.Bm.to_json(),
            "alpha_m": [frac_to_str(x) for x in self.alpha_m],
        }


def C_l(sys: SkewProductSystem, l: int) -> list:
    """C_l = sum_{j=1}^{l} B^{l-j} C A^{j-1}; C_0 is the empty sum."""
    p, d = sys.p, sys.d
    out = _zeros(d, p)
    for j in range(1, l + 1):
        term = _mm(_mm((sys.B ** (l - j)).rows, sys.C, d, p), (sys.A ** (j - 1)).rows, p, p)
        out = _madd(out, term)
    return out


def iterate_formula(sys: SkewProductSystem, m: int) -> IterateFormula:
    if m < 0:
        raise ValueError("m >= 0")
    p = sys.p
    a = [mpq(0)] * p
    for _ in range(m):
        a = [v + al for v, al in zip(_mv(sys.A.rows, a), sys.alpha)]
    alpha_m = [mpq(0)] * sys.d
    for l in range(m):
        alpha_m = [x + y for x, y in zip(alpha_m, _mv(C_l(sys, l), sys.alpha))]
    return IterateFormula(m, sys.A ** m, tuple(a), C_l(sys, m), sys.B ** m, tuple(alpha_m))


def skeleton_matches_power(sys: SkewProductSystem, m: int) -> bool:
    """Exact check of the affine part of the closed form against M^m."""
    M = sys.augmented()
    P = _ident(sys.n + 1)
    for _ in range(m):
        P = _mm(P, M, sys.n + 1, sys.n + 1)
    f = iterate_formula(sys, m)
    p, n = sys.p, sys.n
    ok = all(P[i][j] == f.Am.rows[i][j] for i in range(p) for j in range(p))
    ok &= all(P[i][j] == 0 for i in range(p) for j in range(p, n))
    ok &= all(P[p + i][j] == f.C_m[i][j] for i in range(sys.d) for j in range(p))
    ok &= all(P[p + i][p + j] == f.Bm.rows[i][j] for i in range(sys.d) for j in range(sys.d))
    ok &= all(P[i][n] == f.a_m[i] for i in range(p))
    ok &= all(P[p + i][n] == f.alpha_m[i] for i in range(sys.d))
    return bool(ok)


def _norm_inf(M) -> int:
    return max((sum(abs(x) for x in r) for r in M), default=0)


def iterate_closed(sys: SkewProductSystem, m: int, z, prec: int | None = None, formula: IterateFormula | None = None):
    """phi^m(z) = (a^m(X), C_m X + B^m Y + alpha(m) + F_m(X)) with an error bound."""
    prec = prec or sys.precision
    f = formula if formula is not None and formula.m == m else iterate_formula(sys, m)
    z = tuple(map(as_q, z))
    X, Y = z[: sys.p], z[sys.p :]
    Xm = [v + a for v, a in zip(_mv(f.Am.rows, X), f.a_m)]
    Ym = [c + b + a for c, b, a in zip(_mv(f.C_m, X), _mv(f.Bm.rows, Y), f.alpha_m)]
    err = mpmath.mpf(0)
    if not sys.F.is_zero():
        Xj = list(X)
        for j in range(1, m + 1):
            fv, e = sys._F(Xj[0], prec)
            Bp = (sys.B ** (m - j)).rows
            Ym = [y + w for y, w in zip(Ym, _mv(Bp, fv))]
            err += _norm_inf(Bp) * e
            Xj = [v + a for v, a in zip(_mv(sys.A.rows, Xj), sys.alpha)]
    return tuple(Xm) + tuple(Ym), err


def iterate_steps(sys: SkewProductSystem, m: int, z, prec: int | None = None):
    """m-fold application of phi with accumulated error bound."""
    err = mpmath.mpf(0)
    nb = _norm_inf(sys.B.rows)
    z = tuple(map(as_q, z))
    for _ in range(m):
        z, e = sys.step(z, prec)
        err = nb * err + e
    return z, err


# ---------------------------------------------------------------------------
# the subgroup H and the action check


def h_generators(B: IntegerMatrix, m: int) -> dict:
    """H = {h in T^d : (B^m - I) h in Z^d}: a basis of the identity component
    (rational kernel) and torsion representatives solving (B^m - I) h = b."""
    d = B.n
    N = (B ** m) - IntegerMatrix.identity(d)
    ker = saturate(rational_kernel(N.rows, d), d) if d else []
    image = saturate([list(c) for c in zip(*N.rows)], d) if not N.is_zero() else []
    torsion = []
    for b in image:
        aug = [list(N.rows[i]) + [b[i]] for i in range(d)]
        red, piv = rref(aug)
        h = [Fraction(0)] * d
        for r, pc in enumerate(piv):
            h[pc] = red[r][d]
        h = [x - (x.numerator // x.denominator) for x in h]
        if any(h):
            torsion.append(h)
    return {
        "continuous": [list(v) for v in ker],
        "torsion": [[frac_to_str(x) for x in h] for h in torsion],
        "m": m,
    }


def _dist_int(x) -> mpmath.mpf:
    x = to_mpf(x) if isinstance(x, mpq) else mpmath.mpf(x)
    return abs(x - mpmath.nint(x))


def h_action_check(sys: SkewProductSystem, m: int, H: dict | None = None, samples: int = 1000, seed: int = 0, prec: int = 256):
    """max over samples of dist(psi(h.z), h.psi(z)) for psi = phi^m and h in H.

    For psi of skew type this equals ||(B^m - I) h|| mod 1 plus rounding, but
    we evaluate both sides through the closed form rather than assume it.
    """
    H = H if H is not None else h_generators(sys.B, m)
    rng = random.Random(seed)
    f = iterate_formula(sys, m)
    cont = [list(map(int, v)) for v in H.get("continuous", [])]
    tors = [[as_q(x) for x in h] for h in H.get("torsion", [])]
    if not cont and not tors:
        return mpmath.mpf(0)
    worst = mpmath.mpf(0)
    den = 2**64
    with mpmath.workprec(prec):
        for _ in range(samples):
            z = tuple(mpq(rng.randrange(den), den) for _ in range(sys.n))
            h = [mpq(0)] * sys.d
            for v in cont:
                t = mpq(rng.randrange(den), den)
                h = [a + t * b for a, b in zip(h, v)]
            for tv in tors:
                c = rng.randrange(4)
                h = [a + c * b for a, b in zip(h, tv)]
            hz = z[: sys.p] + tuple(a + b for a, b in zip(z[sys.p :], h))
            w1, e1 = iterate_closed(sys, m, hz, prec, f)
            w0, e0 = iterate_closed(sys, m, z, prec, f)
            diff = [a - b - c for a, b, c in zip(w1[sys.p :], w0[sys.p :], h)]
            v = max((_dist_int(x) for x in diff), default=mpmath.mpf(0))
            worst = max(worst, v)
    return worst


# ---------------------------------------------------------------------------
# construction


def _normalize(bf: BlockForm, WA: IntegerMatrix, WB: IntegerMatrix):
    """Conjugate the block form by diag(WA, WB)^{-1}; keeps the block shape."""
    p, d = bf.p, bf.B.n
    WAi, WBi = WA.inverse(), WB.inverse()
    A = WAi @ bf.A @ WA
    B = WBi @ bf.B @ WB
    C = _mm(_mm(WBi.rows, [list(r) for r in bf.C], d, p), WA.rows, p, p)
    D = IntegerMatrix.block_diag(WAi, WBi) if d else WAi
    U = D @ bf.U
    return A, B, tuple(tuple(r) for r in C), U


def _irrationals(count: int, bits: int, start: int = 0) -> list:
    """Dyadic truncations of sqrt 2, sqrt 3, sqrt 5, ... (fractional parts)."""
    radicands = [2, 3, 5, 7, 11, 13][start : start + count]
    out = []
    for c in radicands:
        v = _dyadic_sqrt(c, bits)
        out.append(v - (v.numerator // v.denominator))
    return out


def _psi0(A: IntegerMatrix, alpha, m: int) -> dict:
    a = [mpq(0)] * A.n
    for _ in range(m):
        a = [v + al for v, al in zip(_mv(A.rows, a), alpha)]
    return {"A^m": (A ** m).to_json(), "translation": [frac_to_str(x) for x in a]}


def _probe(s, r, V, identity):
    return {
        "sequence": s,
        "lambda_turns": frac_to_str(r),
        "V": [v.to_json() for v in V] if V is not None else None,
        "identity": identity,
    }


def construct_minimal(report: SpectralReport, bf: BlockForm | None = None, J: int = 3, K: int | None = None, precision: int = 256) -> SkewProductSystem:
    """The explicit skew product for the branch matching L's block form."""
    if report.verdict != Verdict.CONSTRUCTIBLE_MINIMAL:
        raise NotConstructible(f"verdict is {report.verdict.value}")
    L = bf.L if bf is not None else None
    if bf is None:
        raise ValueError("a BlockForm is required")
    K = K if K is not None else J + 2
    n, p, d = bf.n, bf.p, bf.B.n
    WA = flag_basis(bf.A - IntegerMatrix.identity(p)) if p > 1 else IntegerMatrix.identity(p)
    bits = precision

    if d == 0:
        A, _, _, U = _normalize(bf, WA, IntegerMatrix.identity(0)) if False else (WA.inverse() @ bf.A @ WA, None, None, WA.inverse() @ bf.U)
        alpha = tuple(_irrationals(p, bits))
        F = SparseFourierSeries.zero(1, 0)
        plan = WitnessPlan((), "none: minimal affine map", _psi0(A, alpha, 1), {"continuous": [], "torsion": [], "m": 1},
                           ("minimality of the affine map is the classical criterion for translations independent over Q; assumed",))
        return SkewProductSystem(p, n, A, IntegerMatrix([]), (), alpha, F, "affine", 1, L, U, None, plan, None,
                                 ("translation uses dyadic truncations of square roots",), precision)

    B0 = bf.B
    # choose WB bringing B to the normal form of its branch
    if d == 1:
        WB = IntegerMatrix.identity(1)
        shape = "minus_one"
    elif d == 2:
        per = periodic_order(B0)
        if per == 2:
            WB, shape = IntegerMatrix.identity(2), "minus_identity"
        elif per in (3, 4, 6):
            WB, shape = IntegerMatrix.identity(2), f"periodic{per}"
        else:
            WB, shape = flag_basis(B0 + IntegerMatrix.identity(2)), "shear"
    elif d == 3 and p == 1:
        v = min_poly(B0)
        while (v % X_PLUS_ONE).is_zero():
            v = v.exact_div(X_PLUS_ONE)
        if v.degree > 0:
            WB = basis_with_last(invariant_sublattice(B0, v), 3)
            shape = "minus_one_plus_periodic"
        else:
            WB, shape = flag_basis(B0 + IntegerMatrix.identity(3)), "unipotent_minus"
    else:
        raise UnsupportedBranch(f"no construction for n={n}, p={p}")

    A, B, C, U = _normalize(bf, WA, WB)
    notes = []

    def sysmake(alpha, F, tag, m, datum, probes, matching, base=None, extra_notes=()):
        H = h_generators(B, m)
        plan = WitnessPlan(tuple(probes), matching, _psi0(A, alpha, m), H, tuple(extra_notes))
        return SkewProductSystem(p, n, A, B, C, tuple(alpha), F, tag, m, L, U, datum, plan, base, tuple(notes) + tuple(extra_notes), precision)

    # n = 2 ----------------------------------------------------------------
    if n == 2:
        datum = build_liouville(["1/2"], K)
        F = synthesize_case("eq9", datum, J)
        s = C[0][0]
        return sysmake(
            (datum.alpha,), F, "eq9", 2, datum,
            [_probe(1, Fraction(1, 2), (QuadElem.of(1, REAL_SQRT2),), "G_hat(+-k_j) = l_gamma")],
            f"2 l = {s} l_gamma",
        )

    if n == 3 and p == 1:
        if shape.startswith("periodic"):
            mm = int(shape[len("periodic"):])
            datum = build_liouville([f"1/{mm}"], K)
            F = synthesize_case("eq15p", datum, J, {"m": mm, "B": B})
            V = F.terms[-1].V
            return sysmake(
                (datum.alpha,), F, "eq15p", mm, datum,
                [_probe(1, Fraction(1, mm), V, "G_hat(k_j) = <l_gamma, V>")],
                f"{mm} l alpha = <l_gamma, alpha({mm})>",
                extra_notes=("C_m = 0 since B^m = I",),
            )
        if shape == "minus_identity":
            datum = build_liouville(["1/2"], K)
            F = synthesize_case("eq2p", datum, J)
            V = F.terms[-1].V
            return sysmake(
                (datum.alpha,), F, "eq2p", 2, datum,
                [_probe(1, Fraction(1, 2), V, "G_hat(+-k_j) = <l_gamma, V>, V = (1, sqrt 2)")],
                "2 l alpha = <l_gamma, alpha(2)>",
                extra_notes=("V = (1, sqrt 2): entries independent over Q; sqrt 2 kept exactly in Q(sqrt 2)",),
            )
        # shear: B = [[-1, 0], [s, -1]], s != 0, F = (F1, 0)
        datum = build_liouville(["1/2"], K)
        F = synthesize_case("eq9", datum, J, {"embed": (2, 0)})
        base = SkewProductSystem(1, 2, A, IntegerMatrix([[-1]]), ((C[0][0],),), (datum.alpha,),
                                 synthesize_case("eq9", datum, J), "eq9", 2, None, None, datum, None, None,
                                 ("base system phi_0 of the shear branch",), precision)
        return sysmake(
            (datum.alpha,), F, "shear3", 2, datum, [],
            f"never: the fiber term -2*{B.rows[1][0]}*y is not periodic",
            base=base,
            extra_notes=(f"B = [[-1, 0], [{B.rows[1][0]}, -1]] with s != 0; base phi_0 built recursively",),
        )

    if n == 3 and p == 2:
        datum = build_liouville(["1/2"], K)
        F = synthesize_case("eq9", datum, J)
        alpha = (datum.alpha, _irrationals(1, bits)[0])
        return sysmake(
            alpha, F, "eq9_affine2", 2, datum,
            [_probe(1, Fraction(1, 2), (QuadElem.of(1, REAL_SQRT2),), "G_hat(+-k_j, 0) = l_gamma")],
            "<l, a^2(X) - X> = l_gamma [C_2 X + alpha(2)]",
            extra_notes=("delta = (alpha, sqrt 2 truncated); minimality of a(X) = A X + delta is assumed",),
        )

    if n == 4 and p == 1:
        if shape == "minus_one_plus_periodic":
            Bsub = B.block(1, 3)
            mm = periodic_order(Bsub)
            if mm not in (3, 4, 6):
                raise UnsupportedBranch(f"B0 of order {mm}")
            datum = build_liouville(["1/2", f"1/{mm}"], K)
            W = eigenvector(B, QuadElem.of(-1, REAL_SQRT2))
            W = tuple(QuadElem.of(x.a, REAL_SQRT2) for x in W)
            F1 = synthesize_case("eq9", datum, J, {"s": 1, "V": W})
            V0 = eigenvector(Bsub, root_of_unity(mm))
            F2 = synthesize_case("eq15p", datum, J, {"s": 2, "m": mm, "V": V0, "embed": (3, 1)})
            return sysmake(
                (datum.alpha,), F1 + F2, "eq16", 2 * mm, datum,
                [
                    _probe(1, Fraction(1, 2), W, "G_hat(+-k'_j) = <l_gamma, W>, B W = -W"),
                    _probe(2, Fraction(1, mm), F2.terms[-1].V, "G_hat(k_j) = <l_gamma, (0, V)>"),
                ],
                f"{2 * mm} l alpha = <l_gamma, C_{2 * mm} x + alpha({2 * mm})>",
                extra_notes=("the -1 component uses the exact -1 eigenvector W of B so both probes reduce exactly",),
            )
        # B = -I + strictly lower
        datum = build_liouville(["1/2"], K)
        V = (QuadElem.of(1, REAL_SQRT2), QuadElem.of(1, REAL_SQRT2), QuadElem(Fraction(0), Fraction(1), REAL_SQRT2))
        F = synthesize_case("eq2p", datum, J, {"V": V})
        return sysmake(
            (datum.alpha,), F, "eq1p2p", 2, datum,
            [_probe(1, Fraction(1, 2), V, "G_hat(+-k_j) = <l_gamma, (1, a, b)> when l_gamma B = -l_gamma")],
            "<l_gamma, C_2 x + (B^2 - I) Y> = 0 and matching translations",
            extra_notes=("F = (F1, H) with F1 as in the scalar case and H = (1 + omega) (1, sqrt 2)",),
        )

    if n == 4 and p == 2:
        alpha2 = _irrationals(1, bits)[0]
        if shape == "minus_identity" or shape.startswith("periodic"):
            mm = 2 if shape == "minus_identity" else int(shape[len("periodic"):])
            datum = build_liouville([f"1/{mm}"], K)
            if mm == 2:
                F = synthesize_case("eq2p", datum, J)
            else:
                F = synthesize_case("eq15p", datum, J, {"m": mm, "B": B})
            return sysmake(
                (datum.alpha, alpha2), F, "eqB", mm, datum,
                [_probe(1, Fraction(1, mm), F.terms[-1].V, "G_hat(k_j, 0) = <l_gamma, V>")],
                f"<l, a^{mm}(X) - X> = <l_gamma, C_{mm} X + alpha({mm})>",
                extra_notes=("delta = (alpha, sqrt 2 truncated); minimality of a is assumed",
                             "B = -I uses V = (1, sqrt 2); periods 3, 4, 6 use the zeta_m eigenvector"),
            )
        datum = build_liouville(["1/2"], K)
        F = synthesize_case("eq9", datum, J, {"embed": (2, 0)})
        Abase = A
        base = SkewProductSystem(2, 3, Abase, IntegerMatrix([[-1]]), (tuple(C[0]),), (datum.alpha, alpha2),
                                 synthesize_case("eq9", datum, J), "eq9_affine2", 2, None, None, datum, None, None,
                                 ("base system phi_0 of the shear branch",), precision)
        return sysmake(
            (datum.alpha, alpha2), F, "shear4", 2, datum, [],
            f"never: the fiber term -2*{B.rows[1][0]}*z is not periodic",
            base=base,
        )

    if n == 4 and p == 3:
        datum = build_liouville(["1/2"], K)
        F = synthesize_case("eq9", datum, J)
        alpha = (datum.alpha, *_irrationals(2, bits))
        return sysmake(
            alpha, F, "eq_minus1", 2, datum,
            [_probe(1, Fraction(1, 2), (QuadElem.of(1, REAL_SQRT2),), "G_hat(+-k_j, 0, 0) = l_gamma")],
            "<l, psi_0(X) - X> = l_gamma [(C A - C) X + C alpha]",
            extra_notes=("alpha = (alpha_1, sqrt 2, sqrt 3 truncated); minimality of the affine base is assumed",),
        )

    raise UnsupportedBranch(f"no construction for n={n}, p={p}, B shape {shape}")


def construct_from_matrix(L: IntegerMatrix, J: int = 3, K: int | None = None, precision: int = 256) -> SkewProductSystem:
    report = classify(L)
    if report.verdict != Verdict.CONSTRUCTIBLE_MINIMAL:
        raise NotConstructible(f"verdict is {report.verdict.value}")
    return construct_minimal(report, block_form(L), J, K, precision)
