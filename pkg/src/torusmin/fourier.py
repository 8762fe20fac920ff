"""Sparse real Fourier series with exact phase bookkeeping.

The hand-built functions F of the constructions are finite frequency lists.
Each synthesized term keeps, beside its numeric coefficient, the exact data
it came from: the reduced phase theta = k alpha mod 1, the target root of
unity lambda = exp(2 pi i r), and the vector V over a quadratic field, so that
downstream identities (F_hat(k) = (omega - lambda) V) can be checked exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction

import mpmath
import numpy as np
from gmpy2 import mpq

from .errors import BadTarget, PrecisionInsufficient, UnknownCase
from .exact import IntegerMatrix, as_q, clear_denominators, frac_to_str, rational_kernel
from .liouville import LiouvilleDatum, sequence_value

__all__ = [
    "QuadField",
    "QuadElem",
    "GAUSSIAN",
    "EISENSTEIN",
    "REAL_SQRT2",
    "root_of_unity",
    "eigenvector",
    "Term",
    "SparseFourierSeries",
    "synthesize_case",
    "evaluate",
    "evaluate_grid",
    "phase_of",
    "needed_precision",
    "independence_margin",
    "CASES",
]

CASES = ("eq9", "eq15p", "eq1p", "eq2p")


# ---------------------------------------------------------------------------
# Q(theta) with theta^2 = -c1 theta - c0


@dataclass(frozen=True)
class QuadField:
    name: str
    c0: Fraction
    c1: Fraction
    real: bool  # real embedding (complex conjugation is the identity)

    def theta(self):
        key = (self.name, self.c0, self.c1, mpmath.mp.prec)
        if key not in _THETA_CACHE:
            _THETA_CACHE[key] = self._theta()
        return _THETA_CACHE[key]

    def _theta(self):
        disc = self.c1 * self.c1 - 4 * self.c0
        root = mpmath.sqrt(mpmath.mpf(disc.numerator) / disc.denominator)
        if disc < 0:
            root = mpmath.sqrt(-mpmath.mpf(disc.numerator) / disc.denominator) * 1j
        return (-mpmath.mpf(self.c1.numerator) / self.c1.denominator + root) / 2


_THETA_CACHE: dict = {}

GAUSSIAN = QuadField("Q(i)", Fraction(1), Fraction(0), False)
EISENSTEIN = QuadField("Q(zeta3)", Fraction(1), Fraction(1), False)  # theta = exp(2 pi i/3)
REAL_SQRT2 = QuadField("Q(sqrt2)", Fraction(-2), Fraction(0), True)


@dataclass(frozen=True)
class QuadElem:
    a: Fraction
    b: Fraction
    K: QuadField

    @classmethod
    def of(cls, x, K: QuadField) -> "QuadElem":
        return x if isinstance(x, QuadElem) else cls(Fraction(x), Fraction(0), K)

    def __add__(self, o):
        o = QuadElem.of(o, self.K)
        return QuadElem(self.a + o.a, self.b + o.b, self.K)

    __radd__ = __add__

    def __neg__(self):
        return QuadElem(-self.a, -self.b, self.K)

    def __sub__(self, o):
        return self + (-QuadElem.of(o, self.K))

    def __rsub__(self, o):
        return QuadElem.of(o, self.K) - self

    def __mul__(self, o):
        o = QuadElem.of(o, self.K)
        # (a + b t)(c + d t) = ac + (ad + bc) t + bd t^2,  t^2 = -c1 t - c0
        bd = self.b * o.b
        return QuadElem(
            self.a * o.a - self.K.c0 * bd,
            self.a * o.b + self.b * o.a - self.K.c1 * bd,
            self.K,
        )

    __rmul__ = __mul__

    def conj(self) -> "QuadElem":
        if self.K.real:
            return self
        # the other root of t^2 + c1 t + c0 is -c1 - t
        return QuadElem(self.a - self.K.c1 * self.b, -self.b, self.K)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def value(self):
        return mpmath.mpf(self.a.numerator) / self.a.denominator + (
            mpmath.mpf(self.b.numerator) / self.b.denominator
        ) * self.K.theta()

    def to_json(self) -> dict:
        return {"a": frac_to_str(self.a), "b": frac_to_str(self.b), "field": self.K.name}

    def __repr__(self):
        return f"({self.a} + {self.b}*t in {self.K.name})"


_FIELDS = {f.name: f for f in (GAUSSIAN, EISENSTEIN, REAL_SQRT2)}


def _elem_from_json(d) -> QuadElem:
    return QuadElem(Fraction(d["a"]), Fraction(d["b"]), _FIELDS[d["field"]])


def root_of_unity(m: int) -> QuadElem:
    """exp(2 pi i / m) for m in {1, 2, 3, 4, 6}."""
    if m == 1:
        return QuadElem.of(1, GAUSSIAN)
    if m == 2:
        return QuadElem.of(-1, GAUSSIAN)
    if m == 4:
        return QuadElem(Fraction(0), Fraction(1), GAUSSIAN)
    if m == 3:
        return QuadElem(Fraction(0), Fraction(1), EISENSTEIN)
    if m == 6:
        return QuadElem(Fraction(1), Fraction(1), EISENSTEIN)  # -zeta3^2 = 1 + zeta3
    raise UnknownCase(f"no cyclotomic arithmetic for period {m}")


def _matvec(B: IntegerMatrix, V):
    return [sum((QuadElem.of(B.rows[i][j], V[0].K) * V[j] for j in range(B.n)), QuadElem.of(0, V[0].K)) for i in range(B.n)]


def eigenvector(B: IntegerMatrix, lam: QuadElem) -> tuple:
    """Exact V with B V = lam V (lam rational or in a quadratic field)."""
    K = lam.K
    if lam.b == 0:
        rows = [[Fraction(B.rows[i][j]) - (lam.a if i == j else 0) for j in range(B.n)] for i in range(B.n)]
        ker = rational_kernel(rows, B.n)
        if not ker:
            raise ValueError(f"{lam!r} is not an eigenvalue")
        V = tuple(QuadElem.of(x, K) for x in clear_denominators(ker[0]))
    else:
        if B.n != 2:
            raise ValueError("irrational eigenvalues handled for 2x2 blocks only")
        (b11, b12), (b21, b22) = B.rows
        V = (QuadElem.of(b12, K), lam - b11) if b12 else (lam - b22, QuadElem.of(b21, K))
    if any(not (x - lam * v).is_zero() for x, v in zip(_matvec(B, V), V)):
        raise ValueError(f"{lam!r} is not an eigenvalue")
    return V


def independence_margin(V, bound: int = 10**6):
    """min |<l, V>| over 0 < |l|_inf <= bound for a real 2-vector V = (1, x).

    Best approximations of x are its continued-fraction convergents, so only
    those denominators need checking.
    """
    x = V[1].value() / V[0].value() if isinstance(V[1], QuadElem) else mpmath.mpf(V[1]) / V[0]
    x = mpmath.re(x)
    best = None
    h0, h1, q0, q1 = 0, 1, 1, 0
    y = x
    while True:
        a = int(mpmath.floor(y))
        h0, h1 = h1, a * h1 + h0
        q0, q1 = q1, a * q1 + q0
        if q1 > bound or h1 > bound:
            break
        val = abs(h1 - q1 * x) * abs(V[0].value() if isinstance(V[0], QuadElem) else V[0])
        best = val if best is None else min(best, val)
        frac = y - a
        if frac == 0:
            return mpmath.mpf(0)
        y = 1 / frac
    return best


# ---------------------------------------------------------------------------
# series


@dataclass(frozen=True)
class Term:
    k: tuple  # frequency vector
    coeff: tuple  # mpc per range component
    theta: object = None  # mpq, k alpha mod 1 (exact)
    lam: object = None  # Fraction r, lambda = exp(2 pi i r)
    V: tuple = None  # QuadElem per component; coeff = (omega - lambda) V
    source: str = ""
    seq: int = 0  # Liouville sequence index s (1-based) for synthesized terms


@dataclass(frozen=True)
class SparseFourierSeries:
    dim_domain: int
    dim_range: int
    terms: tuple
    tail_bound: object  # mpf
    precision: int = 256
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        seen = set()
        for t in self.terms:
            if len(t.k) != self.dim_domain or len(t.coeff) != self.dim_range:
                raise ValueError("term shape does not match the series")
            if t.k in seen:
                raise ValueError(f"duplicate frequency {t.k}")
            seen.add(t.k)

    @cached_property
    def coeff_mass(self):
        """Upper bound on sum over terms of max |c| (independent of the point)."""
        with mpmath.workprec(64):
            total = mpmath.fsum(max(abs(c) for c in t.coeff) for t in self.terms) if self.terms else mpmath.mpf(0)
            return total * (1 + mpmath.mpf(2) ** -50)

    @classmethod
    def zero(cls, dim_domain: int = 1, dim_range: int = 1) -> "SparseFourierSeries":
        return cls(dim_domain, dim_range, (), mpmath.mpf(0))

    @classmethod
    def from_pairs(cls, pairs, dim_domain=1, dim_range=1, tail_bound=0, precision=256):
        """Terms from (k, coeff-vector); conjugate partners are added for k != 0."""
        with mpmath.workprec(precision):
            out = {}
            for k, c in pairs:
                k = tuple(int(x) for x in (k if isinstance(k, (tuple, list)) else (k,)))
                c = tuple(mpmath.mpc(x) for x in (c if isinstance(c, (tuple, list)) else (c,)))
                out[k] = Term(k, c)
                mk = tuple(-x for x in k)
                if mk != k:
                    out[mk] = Term(mk, tuple(mpmath.conj(x) for x in c))
        return cls(dim_domain, dim_range, tuple(out[k] for k in sorted(out)), mpmath.mpf(tail_bound), precision)

    def is_zero(self) -> bool:
        return not self.terms

    def max_frequency(self) -> int:
        return max((max(abs(x) for x in t.k) for t in self.terms), default=0)

    def coefficient(self, k) -> tuple | None:
        k = tuple(k) if isinstance(k, (tuple, list)) else (k,)
        for t in self.terms:
            if t.k == k:
                return t.coeff
        return None

    def conjugate_symmetric(self, tol=None) -> bool:
        tol = mpmath.mpf(2) ** (-self.precision + 8) if tol is None else tol
        index = {t.k: t.coeff for t in self.terms}
        with mpmath.workprec(self.precision):
            for t in self.terms:
                mk = tuple(-x for x in t.k)
                if mk not in index:
                    return False
                if any(abs(a - mpmath.conj(b)) > tol for a, b in zip(t.coeff, index[mk])):
                    return False
        return True

    def scaled(self, M) -> "SparseFourierSeries":
        """Componentwise linear map c -> M c (M a list of rows)."""
        d = len(M)
        terms = tuple(
            Term(t.k, tuple(sum((M[i][j] * t.coeff[j] for j in range(self.dim_range)), mpmath.mpc(0)) for i in range(d)))
            for t in self.terms
        )
        norm = max((sum(abs(x) for x in row) for row in M), default=0)
        return SparseFourierSeries(self.dim_domain, d, terms, self.tail_bound * norm, self.precision, dict(self.meta))

    def __add__(self, other: "SparseFourierSeries") -> "SparseFourierSeries":
        if (self.dim_domain, self.dim_range) != (other.dim_domain, other.dim_range):
            raise ValueError("shape mismatch")
        index = {t.k: t for t in self.terms}
        for t in other.terms:
            if t.k in index:
                s = index[t.k]
                index[t.k] = Term(t.k, tuple(a + b for a, b in zip(s.coeff, t.coeff)))
            else:
                index[t.k] = t
        return SparseFourierSeries(
            self.dim_domain,
            self.dim_range,
            tuple(index[k] for k in sorted(index)),
            self.tail_bound + other.tail_bound,
            max(self.precision, other.precision),
            {**self.meta, **other.meta},
        )

    def to_json(self) -> dict:
        # enough decimal digits to recover every bit at the series precision
        digits = int(self.precision * 0.30103) + 3

        def term(t):
            d = {
                "k": list(t.k),
                "re": [mpmath.nstr(mpmath.re(c), digits, strip_zeros=False) for c in t.coeff],
                "im": [mpmath.nstr(mpmath.im(c), digits, strip_zeros=False) for c in t.coeff],
            }
            if t.theta is not None:
                d["theta"] = frac_to_str(t.theta)
                d["lambda_turns"] = frac_to_str(t.lam)
                d["V"] = [v.to_json() for v in t.V]
                d["source"] = t.source
                d["seq"] = t.seq
            return d

        return {
            "dim_domain": self.dim_domain,
            "dim_range": self.dim_range,
            "precision": self.precision,
            "tail_bound": mpmath.nstr(self.tail_bound, 20),
            "terms": [term(t) for t in self.terms],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SparseFourierSeries":
        prec = d.get("precision", 256)
        with mpmath.workprec(prec):
            terms = []
            for t in d["terms"]:
                coeff = tuple(mpmath.mpc(mpmath.mpf(r), mpmath.mpf(i)) for r, i in zip(t["re"], t["im"]))
                if "theta" in t:
                    V = tuple(_elem_from_json(v) for v in t["V"])
                    terms.append(Term(tuple(t["k"]), coeff, as_q(t["theta"]), Fraction(t["lambda_turns"]), V, t.get("source", ""), t.get("seq", 0)))
                else:
                    terms.append(Term(tuple(t["k"]), coeff))
            return cls(d["dim_domain"], d["dim_range"], tuple(terms), mpmath.mpf(d["tail_bound"]), prec, d.get("meta", {}))


def _expi(turns, prec):
    """exp(2 pi i * turns) for an exact rational number of turns."""
    t = as_q(turns)
    t = t - (t.numerator // t.denominator)
    with mpmath.workprec(prec + 16):
        return mpmath.expjpi(2 * mpmath.mpf(t.numerator) / t.denominator)


def _omega_minus_lambda(theta, r: Fraction, prec):
    """exp(2 pi i theta) - exp(2 pi i r) without cancellation."""
    delta = as_q(theta) - as_q(r)
    delta = delta - (delta.numerator // delta.denominator)
    if delta > mpq(1, 2):
        delta -= 1
    with mpmath.workprec(prec + 16):
        dd = mpmath.mpf(delta.numerator) / delta.denominator
        # exp(2 pi i d) - 1 = 2 i sin(pi d) exp(pi i d)
        return _expi(r, prec) * 2j * mpmath.sinpi(dd) * mpmath.expjpi(dd)


def needed_precision(max_k: int) -> int:
    return int(max_k).bit_length() + 64


def _sequence_terms(d: LiouvilleDatum, s: int, J: int, r: Fraction, V: tuple, prec: int, source: str):
    terms = []
    for j in range(1, J + 1):
        k = sequence_value(d, s, j)
        theta = (k * d.alpha) % 1
        w = _omega_minus_lambda(theta, r, prec)
        with mpmath.workprec(prec):
            c = tuple(w * v.value() for v in V)
            cbar = tuple(mpmath.conj(x) for x in c)
        Vbar = tuple(v.conj() for v in V)
        terms.append(Term((int(k),), c, theta, r, V, source, s))
        terms.append(Term((-int(k),), cbar, (-theta) % 1, (-r) % 1, Vbar, source, s))
    return terms


def _tail(d: LiouvilleDatum, s: int, J: int, V: tuple):
    """2 conjugate terms * 2 (geometric domination) * 4 pi |V| / k_{J+1}^{J+1}."""
    k = sequence_value(d, s, J + 1)
    vnorm = mpmath.sqrt(sum(abs(v.value()) ** 2 for v in V))
    with mpmath.workprec(64):
        return mpmath.mpf(16) * mpmath.pi * vnorm / mpmath.mpf(k) ** (J + 1)


def synthesize_case(case_id: str, d: LiouvilleDatum | None, J: int, extras: dict | None = None) -> SparseFourierSeries:
    """Build F for one construction branch.

    eq9 / eq1p: F_hat(+-k_j) = 1 + exp(+-2 pi i k_j alpha), times V (default V = 1).
    eq15p:      F_hat(k_j) = (exp(2 pi i k_j alpha) - zeta_m) V with B V = zeta_m V.
    eq2p:       as eq9 with the irrational V = (1, sqrt 2).
    extras: s (target index, 1-based), m, V, B, embed (dim, offset).
    """
    extras = dict(extras or {})
    if case_id not in CASES:
        raise UnknownCase(f"unknown case {case_id!r}")
    if d is None or J == 0:
        dim = extras.get("embed", (1, 0))[0] if "embed" in extras else (2 if case_id in ("eq15p", "eq2p") else 1)
        return SparseFourierSeries.zero(1, dim)
    s = extras.get("s", 1)
    if J + 1 > d.K:
        raise BadTarget(f"need K >= J + 1 Liouville terms (K={d.K}, J={J})")
    if case_id in ("eq9", "eq1p", "eq2p"):
        r = Fraction(1, 2)
        if case_id == "eq2p":
            V = extras.get("V") or (QuadElem.of(1, REAL_SQRT2), QuadElem(Fraction(0), Fraction(1), REAL_SQRT2))
        else:
            V = extras.get("V") or (QuadElem.of(1, GAUSSIAN),)
    else:
        m = extras["m"]
        r = Fraction(1, m)
        zeta = root_of_unity(m)
        V = extras.get("V") or eigenvector(extras["B"], zeta)
        if "B" in extras:
            eigenvector(extras["B"], zeta)  # validates
    target = d.targets[s - 1]
    if as_q(target) != as_q(r):
        raise BadTarget(f"target {frac_to_str(target)} does not match exp(2 pi i {r})")
    dim, off = extras.get("embed", (len(V), 0))
    if off or dim != len(V):
        zero = QuadElem.of(0, V[0].K)
        V = (zero,) * off + tuple(V) + (zero,) * (dim - off - len(V))
    kmax = sequence_value(d, s, J)
    prec = max(extras.get("precision", 256), needed_precision(kmax))
    terms = _sequence_terms(d, s, J, r, V, prec, case_id)
    terms.sort(key=lambda t: t.k)
    meta = {"case": case_id, "J": J, "s": s, "lambda_turns": frac_to_str(r)}
    return SparseFourierSeries(1, dim, tuple(terms), _tail(d, s, J, V), prec, meta)


# ---------------------------------------------------------------------------
# evaluation


def _to_q(x):
    if isinstance(x, mpmath.mpf):
        man, exp = x.man_exp
        man = int(man)
        return mpq(man * 2**exp) if exp >= 0 else mpq(man, 2 ** (-exp))
    if isinstance(x, float):
        return mpq(Fraction(x).numerator, Fraction(x).denominator)
    return as_q(x)


def phase_of(k: tuple, x: tuple):
    """<k, x> mod 1 computed exactly (x given as rationals, mpf or floats)."""
    t = sum((int(ki) * _to_q(xi) for ki, xi in zip(k, x)), mpq(0))
    return t - (t.numerator // t.denominator)


def evaluate(F: SparseFourierSeries, x, prec: int | None = None, include_tail: bool = True):
    """Real vector F(x) at `prec` bits and an error bound (tail + rounding).

    With include_tail=False the bound covers only the finite series itself,
    which is what a system built from the truncated F actually iterates.
    """
    x = tuple(x) if isinstance(x, (tuple, list)) else (x,)
    prec = F.precision if prec is None else prec
    if F.terms and prec < needed_precision(F.max_frequency()):
        raise PrecisionInsufficient(f"{prec} bits < {needed_precision(F.max_frequency())} needed")
    with mpmath.workprec(prec + 16):
        acc = [mpmath.mpc(0)] * F.dim_range
        for t in F.terms:
            e = _expi(phase_of(t.k, x), prec)
            acc = [a + c * e for a, c in zip(acc, t.coeff)]
        rounding = F.coeff_mass * mpmath.mpf(2) ** (-prec + 4)
        if any(abs(mpmath.im(a)) > rounding + mpmath.mpf(2) ** (-prec + 8) for a in acc):
            raise AssertionError("series is not conjugate-symmetric")
        vals = [mpmath.re(a) for a in acc]
    return vals, (F.tail_bound if include_tail else 0) + rounding


def evaluate_grid(F: SparseFourierSeries, N: int) -> np.ndarray:
    """F on the grid x = i/N (1-D domain), float64, phases reduced exactly."""
    if F.dim_domain != 1:
        raise ValueError("grid evaluation implemented for 1-D domains")
    i = np.arange(N, dtype=np.int64)
    out = np.zeros((F.dim_range, N))
    for t in F.terms:
        kk = int(t.k[0]) % N
        ph = 2 * np.pi * ((kk * i) % N) / N
        e = np.exp(1j * ph)
        for c_idx, c in enumerate(t.coeff):
            out[c_idx] += (complex(c) * e).real
    return out
