"""Spectral classification of integer linear parts.

Decides quasi-unipotence exactly, splits off the cyclotomic part of a
polynomial, counts unimodular roots with certified disks, and combines the
Lefschetz and hyperbolic-factor exclusions into a single verdict.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath

from .errors import NotIntegerCoefficients, NotMonic, NotUnimodular, PrecisionExhausted
from .exact import (
    IntegerMatrix,
    RationalPolynomial,
    char_poly,
    min_poly,
)

__all__ = [
    "Verdict",
    "RootCensus",
    "Prop1Certificate",
    "SpectralReport",
    "euler_phi",
    "cyclotomic_exponent",
    "quasi_unipotent_test",
    "cyclotomic_split",
    "polynomial_roots",
    "root_census",
    "lefschetz_number",
    "prop1_obstruction",
    "classify",
]

START_BITS = 256
MAX_BITS = 4096


class Verdict(str, enum.Enum):
    EXCLUDED_LEFSCHETZ = "ExcludedLefschetz"
    EXCLUDED_PROP1 = "ExcludedProp1"
    CONSTRUCTIBLE_MINIMAL = "ConstructibleMinimal"
    OPEN_PROBLEM = "OpenProblem"


def euler_phi(d: int) -> int:
    result, m, p = d, d, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


@lru_cache(maxsize=None)
def cyclotomic_exponent(n: int) -> int:
    """M(n) = lcm{d : phi(d) <= n}.

    phi(d) >= sqrt(d/2), so d <= 2 n^2 bounds the search; we scan a little past
    n^2 + n + 1 to be safe.
    """
    bound = max(2 * n * n, n * n + n + 1) + 2
    m = 1
    for d in range(1, bound + 1):
        if euler_phi(d) <= n:
            m = m * d // math.gcd(m, d)
    return m


def _divisors(m: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(m) + 1) if m % d == 0]
    return sorted(set(small + [m // d for d in small]))


def _require_unimodular(L: IntegerMatrix):
    if not L.is_unimodular():
        raise NotUnimodular(f"det = {L.det()}, not in GL(n, Z)")


def _nilpotent_test(L: IntegerMatrix, m: int) -> bool:
    n = L.n
    return ((L ** m - IntegerMatrix.identity(n)) ** n).is_zero()


def quasi_unipotent_test(L: IntegerMatrix) -> tuple[bool, int | None]:
    """(flag, least m | M(n) with (L^m - I)^n = 0)."""
    _require_unimodular(L)
    M = cyclotomic_exponent(L.n)
    if not _nilpotent_test(L, M):
        return False, None
    for m in _divisors(M):
        if _nilpotent_test(L, m):
            return True, m
    raise AssertionError("unreachable: M(n) itself passed")


def _check_monic_integral(p: RationalPolynomial):
    if not p.is_monic():
        raise NotMonic(repr(p))
    if not p.is_integral():
        raise NotIntegerCoefficients(repr(p))


def cyclotomic_split(p: RationalPolynomial, n: int | None = None):
    """p = q_cyc * r_rest with q_cyc the full cyclotomic part (with multiplicity)."""
    _check_monic_integral(p)
    n = max(n or 0, p.degree, 1)
    xm = RationalPolynomial.x_power_minus_one(cyclotomic_exponent(n))
    q = RationalPolynomial([1])
    r = p
    g = r.gcd(xm)
    while g.degree > 0:
        q = q * g
        r = r.exact_div(g)
        g = r.gcd(xm)
    return q, r


# ---------------------------------------------------------------------------
# Certified root finding


def polynomial_roots(p: RationalPolynomial, bits: int = START_BITS, maxiter: int = 500):
    """Aberth iteration at `bits` of precision; returns (roots, inclusion radii).

    Radii come from the Weierstrass corrections: the disks D(z_i, n |W_i|) each
    hold exactly one root once they are pairwise disjoint.
    """
    n = p.degree
    if n < 1:
        return [], []
    with mpmath.workprec(bits + 20):
        cs = [mpmath.mpf(c.numerator) / c.denominator for c in p.coeffs]
        lc = cs[-1]
        cs = [c / lc for c in cs]
        dcs = [i * c for i, c in enumerate(cs)][1:]
        radius = 1 + max(abs(c) for c in cs[:-1])
        zs = [
            mpmath.mpc(radius * 0.5 * mpmath.cos(2 * mpmath.pi * k / n + 0.4), radius * 0.5 * mpmath.sin(2 * mpmath.pi * k / n + 0.4))
            for k in range(n)
        ]
        tol = mpmath.mpf(2) ** (-bits)

        def ev(c, z):
            acc = mpmath.mpc(0)
            for a in reversed(c):
                acc = acc * z + a
            return acc

        for _ in range(maxiter):
            biggest = mpmath.mpf(0)
            new = []
            for i, z in enumerate(zs):
                pz = ev(cs, z)
                if pz == 0:
                    new.append(z)
                    continue
                ratio = pz / ev(dcs, z) if dcs else mpmath.mpc(0)
                s = sum(1 / (z - w) for j, w in enumerate(zs) if j != i)
                step = ratio / (1 - ratio * s)
                new.append(z - step)
                biggest = max(biggest, abs(step) / max(1, abs(z)))
            zs = new
            if biggest < tol:
                break
        radii = []
        eps = mpmath.mpf(2) ** (-bits)
        for i, z in enumerate(zs):
            prod = mpmath.mpc(1)
            for j, w in enumerate(zs):
                if j != i:
                    prod *= z - w
            scale = sum(abs(c) * abs(z) ** k for k, c in enumerate(cs))
            if prod == 0:
                radii.append(mpmath.inf)
            else:
                radii.append(n * (abs(ev(cs, z)) + eps * scale * (n + 2)) / abs(prod))
    return zs, radii


def _disks_disjoint(zs, radii) -> bool:
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            if abs(zs[i] - zs[j]) <= radii[i] + radii[j]:
                return False
    return True


@dataclass(frozen=True)
class RootWitness:
    root: complex  # mpc
    radius: object  # mpf
    kind: str  # "off_circle" | "unimodular" | "undecided"

    def to_json(self) -> dict:
        return {
            "re": mpmath.nstr(self.root.real, 30),
            "im": mpmath.nstr(self.root.imag, 30),
            "radius": mpmath.nstr(self.radius, 5),
            "kind": self.kind,
        }


@dataclass(frozen=True)
class RootCensus:
    n_roots_of_unity: int
    n_unimodular_not_rou: int
    n_off_circle: int
    witnesses: tuple = ()
    n_undecided: int = 0
    precision_bits: int = START_BITS

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.n_roots_of_unity, self.n_unimodular_not_rou, self.n_off_circle)

    @property
    def total(self) -> int:
        return self.n_roots_of_unity + self.n_unimodular_not_rou + self.n_off_circle + self.n_undecided

    def to_json(self) -> dict:
        return {
            "n_roots_of_unity": self.n_roots_of_unity,
            "n_unimodular_not_rou": self.n_unimodular_not_rou,
            "n_off_circle": self.n_off_circle,
            "n_undecided": self.n_undecided,
            "precision_bits": self.precision_bits,
            "witnesses": [w.to_json() for w in self.witnesses],
        }


def _classify_selfreciprocal_roots(s: RationalPolynomial, bits: int):
    """Classify the roots of a squarefree self-reciprocal factor; None if undecided."""
    zs, radii = polynomial_roots(s, bits)
    if not _disks_disjoint(zs, radii):
        return None, zs, radii
    kinds = []
    for i, (z, rho) in enumerate(zip(zs, radii)):
        a = abs(z)
        if a - rho > 1 or a + rho < 1:
            kinds.append("off_circle")
            continue
        # reflect the disk through the unit circle; the reflected root 1/conj(z)
        # is again a root, so if the image meets no other disk it is z itself
        den = a * a - rho * rho
        if den <= 0:
            kinds.append("undecided")
            continue
        c2, r2 = z / den, rho / den
        clash = any(abs(c2 - w) <= r2 + rw for j, (w, rw) in enumerate(zip(zs, radii)) if j != i)
        kinds.append("undecided" if clash else "unimodular")
    return kinds, zs, radii


def root_census(p: RationalPolynomial, strict: bool = True, max_bits: int = MAX_BITS) -> RootCensus:
    """Count roots of unity, other unimodular roots and off-circle roots (with multiplicity)."""
    _check_monic_integral(p)
    if p.degree < 1:
        return RootCensus(0, 0, 0)
    q, r = cyclotomic_split(p)
    n_rou = q.degree
    n_uni = n_off = n_und = 0
    witnesses = []
    bits_used = START_BITS
    for f, mult in r.squarefree_decomposition():
        s = f.gcd(f.reversed())
        t = f.exact_div(s)
        # roots of t are never unimodular: a unimodular root of a real f is a root of rev(f)
        if t.degree > 0:
            zs, radii = polynomial_roots(t, START_BITS)
            witnesses += [RootWitness(z, rho, "off_circle") for z, rho in zip(zs, radii)]
            n_off += t.degree * mult
        if s.degree > 0:
            bits = START_BITS
            while True:
                kinds, zs, radii = _classify_selfreciprocal_roots(s, bits)
                if kinds is not None and "undecided" not in kinds:
                    break
                if bits * 2 > max_bits:
                    break
                bits *= 2
            bits_used = max(bits_used, bits)
            if kinds is None:
                kinds = ["undecided"] * len(zs)
            witnesses += [RootWitness(z, rho, k) for z, rho, k in zip(zs, radii, kinds)]
            n_uni += kinds.count("unimodular") * mult
            n_off += kinds.count("off_circle") * mult
            n_und += kinds.count("undecided") * mult
    census = RootCensus(n_rou, n_uni, n_off, tuple(witnesses), n_und, bits_used)
    if n_und and strict:
        raise PrecisionExhausted(f"{n_und} roots undecided at {max_bits} bits", undecided=n_und)
    return census


# ---------------------------------------------------------------------------
# Exclusions and verdict


def lefschetz_number(L: IntegerMatrix) -> int:
    _require_unimodular(L)
    return (IntegerMatrix.identity(L.n) - L).det()


@dataclass(frozen=True)
class Prop1Certificate:
    obstructed: bool
    q: RationalPolynomial
    r: RationalPolynomial
    census_r: RootCensus | None

    def __bool__(self):
        return self.obstructed

    def to_json(self) -> dict:
        return {
            "obstructed": self.obstructed,
            "q": self.q.to_json(),
            "r": self.r.to_json(),
            "census_r": self.census_r.to_json() if self.census_r else None,
        }


def prop1_obstruction(L: IntegerMatrix) -> Prop1Certificate:
    """Minimal polynomial splits as (all roots of unity) x (nonconstant, no unimodular roots)?"""
    _require_unimodular(L)
    q, r = cyclotomic_split(min_poly(L), L.n)
    if r.degree < 1:
        return Prop1Certificate(False, q, r, None)
    census = root_census(r)
    # r has no roots of unity by construction, so only the other unimodular roots matter
    return Prop1Certificate(census.n_unimodular_not_rou == 0, q, r, census)


@dataclass(frozen=True)
class SpectralReport:
    n: int
    char_poly: RationalPolynomial
    min_poly: RationalPolynomial
    quasi_unipotent: bool
    qu_order: int | None
    census: RootCensus
    has_eigenvalue_one: bool
    lefschetz: int
    prop1: Prop1Certificate
    verdict: Verdict
    notes: tuple = field(default=())

    @property
    def prop1_obstructed(self) -> bool:
        return self.prop1.obstructed

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "char_poly": self.char_poly.to_json(),
            "min_poly": self.min_poly.to_json(),
            "quasi_unipotent": self.quasi_unipotent,
            "qu_order": self.qu_order,
            "census": self.census.to_json(),
            "has_eigenvalue_one": self.has_eigenvalue_one,
            "lefschetz_number": self.lefschetz,
            "prop1_obstructed": self.prop1_obstructed,
            "prop1_certificate": self.prop1.to_json(),
            "verdict": self.verdict.value,
            "notes": list(self.notes),
        }


def classify(L: IntegerMatrix) -> SpectralReport:
    _require_unimodular(L)
    cp = char_poly(L)
    mp_ = min_poly(L)
    qu, order = quasi_unipotent_test(L)
    census = root_census(cp)
    lef = lefschetz_number(L)
    cert = prop1_obstruction(L)
    eig1 = cp(1) == 0
    notes = []
    if lef != 0:
        verdict = Verdict.EXCLUDED_LEFSCHETZ
        notes.append("det(I - L) != 0: every map with this linear part has a fixed point")
    elif cert.obstructed:
        verdict = Verdict.EXCLUDED_PROP1
        notes.append("minimal polynomial has a hyperbolic factor; the map has a hyperbolic factor with periodic points")
    elif L.n <= 4:
        if not qu:
            # the degree count of the cyclotomic part rules this out for n <= 4
            raise AssertionError("n <= 4, eigenvalue 1, unobstructed but not quasi-unipotent")
        verdict = Verdict.CONSTRUCTIBLE_MINIMAL
    else:
        verdict = Verdict.OPEN_PROBLEM
        notes.append("n > 4: neither exclusion applies and no construction is known")
    return SpectralReport(L.n, cp, mp_, qu, order, census, eig1, lef, cert, verdict, tuple(notes))

