"""Liouville translations with exact approximation certificates.

For targets p_s/q_s we use alpha = sum_{k>=1} q^{-k!} with q = prod q_s and the
integers k_j^s = p_s q^{j!} / q_s.  Everything is exact (GMP rationals); the
only real-number input is an enclosure of the true alpha, given by the
partial sum and a rigorous tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import mpmath
from gmpy2 import mpq, mpz

from .errors import BadTarget, EnclosureTooWide, IntervalTooWide
from .exact import PhaseInterval, as_q, frac_to_str, phase_mod1, to_mpf

__all__ = [
    "LiouvilleDatum",
    "ApproxCertificate",
    "DiophantineScan",
    "build_liouville",
    "approx_sequence",
    "certify",
    "verify_nested",
    "sequence_value",
    "diophantine_scan",
    "diophantine_scan_vector",
    "golden_enclosure",
    "sqrt_enclosure",
    "chord_bounds",
    "MAX_CLI_LEVEL",
]

# k_j has about j! * log2(q) bits and the certificate needs K = j + 2 terms,
# i.e. denominators of (j+3)! * log2(q) bits: j = 6 already means ~10^6-bit
# numerators for q = 6, so the command line stops there.
MAX_CLI_LEVEL = 6


def _parse_target(t) -> mpq:
    if isinstance(t, tuple):
        p, q = map(int, t)
        if math.gcd(p, q) != 1:
            raise BadTarget(f"{p}/{q} is not reduced")
        t = mpq(p, q)
    elif isinstance(t, str):
        ps, _, qs = t.partition("/")
        if qs and math.gcd(int(ps), int(qs)) != 1:
            raise BadTarget(f"{t} is not reduced")
        t = as_q(t)
    else:
        t = as_q(t)
    if not 0 < t < 1:
        raise BadTarget(f"target {frac_to_str(t)} is not in (0, 1)")
    return t


@dataclass(frozen=True)
class LiouvilleDatum:
    targets: tuple  # mpq p_s/q_s
    q: int
    K: int
    alpha: mpq  # sum_{k<=K} q^{-k!}
    tail_bound: mpq  # 2 q^{-(K+1)!}

    def enclosure(self) -> tuple[mpq, mpq]:
        """alpha < alpha_true < alpha + tail_bound."""
        return self.alpha, self.alpha + self.tail_bound

    def with_terms(self, K: int) -> "LiouvilleDatum":
        return build_liouville(self.targets, K)

    def to_json(self) -> dict:
        return {
            "targets": [frac_to_str(t) for t in self.targets],
            "q": self.q,
            "K": self.K,
            "alpha": frac_to_str(self.alpha),
            "tail_bound": frac_to_str(self.tail_bound),
        }

    @classmethod
    def from_json(cls, d: dict) -> "LiouvilleDatum":
        return build_liouville(d["targets"], d["K"])


def build_liouville(targets, K: int) -> LiouvilleDatum:
    if K < 1:
        raise BadTarget("need at least one term")
    ts = tuple(_parse_target(t) for t in targets)
    if not ts:
        raise BadTarget("empty target list")
    q = 1
    for t in ts:
        q *= int(t.denominator)
    if q < 2:
        raise BadTarget("base must be at least 2")
    qz = mpz(q)
    top = math.factorial(K)
    num = sum(qz ** (top - math.factorial(k)) for k in range(1, K + 1))
    alpha = mpq(num, qz ** top)
    tail = mpq(2, qz ** math.factorial(K + 1))
    return LiouvilleDatum(ts, q, K, alpha, tail)


def sequence_value(d: LiouvilleDatum, s: int, j: int) -> mpz:
    """k_j^s = p_s q^{j!} / q_s (s is 1-based)."""
    t = d.targets[s - 1]
    return t.numerator * mpz(d.q) ** math.factorial(j) // t.denominator


@dataclass(frozen=True)
class ApproxCertificate:
    s: int
    j: int
    K: int
    k: mpz
    target: mpq
    distance_interval: PhaseInterval  # enclosure of ||k alpha - p_s/q_s||
    bound: mpq  # 2 / k^j
    holds: bool
    notes: tuple = field(default=())

    def chord_upper(self):
        """Upper bound on |exp(2 pi i k alpha) - exp(2 pi i p_s/q_s)| (factor 2 pi)."""
        return 2 * mpmath.pi * to_mpf(self.distance_interval.upper)

    def chord_bound(self):
        """4 pi / k^j: the certified ||.|| bound converted through |e^{2 pi i s} - 1| <= 2 pi s."""
        return 2 * mpmath.pi * to_mpf(self.bound)

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "j": self.j,
            "K": self.K,
            "k": str(self.k),
            "target": frac_to_str(self.target),
            "distance_lower": frac_to_str(self.distance_interval.lower),
            "distance_upper": frac_to_str(self.distance_interval.upper),
            "bound": frac_to_str(self.bound),
            "holds": self.holds,
            "chord_conversion": "2*pi",
            "chord_bound": mpmath.nstr(self.chord_bound(), 20),
        }


def approx_sequence(d: LiouvilleDatum, s: int, j: int) -> ApproxCertificate:
    """Certificate for ||k_j^s alpha - p_s/q_s|| < 2 / (k_j^s)^j."""
    if j < 1:
        raise ValueError("level j starts at 1")
    if not 1 <= s <= len(d.targets):
        raise ValueError(f"target index {s} out of range")
    k = sequence_value(d, s, j)
    half = d.tail_bound / 2
    try:
        arc = phase_mod1(k, d.alpha + half, half)
    except IntervalTooWide as exc:
        raise IntervalTooWide(f"{exc}; rebuild with more terms (K > {d.K})") from None
    target = d.targets[s - 1]
    lo, hi = arc.shift(-target).norm_bounds()
    bound = mpq(2, 1) / mpq(k) ** j
    dist = PhaseInterval(lo, hi, False)
    return ApproxCertificate(s, j, d.K, k, target, dist, bound, bool(hi < bound))


def certify(targets, j: int, K: int | None = None) -> list[ApproxCertificate]:
    """Certificates for every target at level j, with K = j + 2 terms by default."""
    d = build_liouville(targets, K if K is not None else j + 2)
    return [approx_sequence(d, s, j) for s in range(1, len(d.targets) + 1)]


def verify_nested(cert: ApproxCertificate, d: LiouvilleDatum, extra: int = 2) -> bool:
    """Recompute with `extra` more terms: the refined enclosure must sit inside the
    coarse one and still satisfy the strict inequality."""
    fine = approx_sequence(d.with_terms(d.K + extra), cert.s, cert.j)
    coarse = cert.distance_interval
    nested = coarse.lower <= fine.distance_interval.lower and fine.distance_interval.upper <= coarse.upper
    return nested and fine.holds and fine.k == cert.k


# ---------------------------------------------------------------------------
# Diophantine quality


def sqrt_enclosure(c: int, bits: int) -> tuple[mpq, mpq]:
    """Exact rational bounds lo <= sqrt(c) <= hi of width 2^-bits."""
    s = gmpy2.isqrt(mpz(c) << (2 * bits))
    den = mpz(1) << bits
    return mpq(s, den), mpq(s + 1, den)


def golden_enclosure(bits: int = 128) -> tuple[mpq, mpq]:
    """(sqrt(5) - 1) / 2."""
    lo, hi = sqrt_enclosure(5, bits)
    return (lo - 1) / 2, (hi - 1) / 2


def chord_bounds(s):
    """(4 s, 2 pi s) bracketing |exp(2 pi i s) - 1| for s in [0, 1/2].

    The lower bound fails past s = 1/2, so callers pass s = ||x||.
    """
    s = mpmath.mpf(s)
    if not 0 <= s <= 0.5:
        raise ValueError("chord bounds hold for s in [0, 1/2] only")
    return 4 * s, 2 * mpmath.pi * s


@dataclass(frozen=True)
class DiophantineScan:
    min_lower: mpq  # min over q of the lower bound of q^{1+r} ||q alpha||
    min_upper: mpq
    argmin: int
    violating: int | None  # first q with q^{1+r} ||q alpha|| < C certified
    records: tuple  # q where ||q alpha|| reaches a new minimum (best approximations)
    method: str
    Q: int

    def to_json(self) -> dict:
        return {
            "min_lower": frac_to_str(self.min_lower),
            "min_upper": frac_to_str(self.min_upper),
            "min_approx": float(self.min_upper),
            "argmin": self.argmin,
            "violating": self.violating,
            "records": list(self.records),
            "method": self.method,
            "Q": self.Q,
        }


def _convergent_denominators(x: mpq, Q: int) -> list[int]:
    """Denominators of the continued-fraction convergents of x, up to Q."""
    out = []
    k0, k1 = mpz(1), mpz(0)  # k_{-2}, k_{-1}
    num, den = x.numerator, x.denominator
    while den:
        a = num // den
        num, den = den, num - a * den
        k0, k1 = k1, a * k1 + k0
        if k1 > Q:
            break
        if k1 >= 1 and (not out or out[-1] != k1):
            out.append(int(k1))
    return out


def diophantine_scan(enclosure, C, r, Q: int, method: str = "brute") -> DiophantineScan:
    """Exact-interval scan of q^{1+r} ||q alpha|| for 1 <= q <= Q.

    `enclosure` is (lo, hi) with lo <= alpha <= hi.  method="convergents" only
    visits continued-fraction denominators of the midpoint (the best
    approximations), which is what locates Liouville-type collapses for huge Q.
    """
    lo, hi = as_q(enclosure[0]), as_q(enclosure[1])
    C, r = as_q(C), as_q(r)
    if hi < lo:
        raise ValueError("empty enclosure")
    if (hi - lo) * (2 * Q) ** 2 >= max(C, mpq(1, 10**6)):
        raise EnclosureTooWide("enclosure too wide for this scan window; raise precision")
    if method == "brute":
        qs = range(1, Q + 1)
    elif method == "convergents":
        qs = _convergent_denominators((lo + hi) / 2, Q)
    else:
        raise ValueError(f"unknown method {method!r}")
    integer_r = r.denominator == 1
    best = None
    violating = None
    records = []
    record_val = None
    for q in qs:
        arc_lo, arc_hi = q * lo, q * hi
        fl = math.floor(arc_lo)
        a, b = arc_lo - fl, arc_hi - fl
        # ||x|| over [a, b] with 0 <= a < 1
        nlo = mpq(0) if b >= 1 else min(a, 1 - b)
        nhi = mpq(1, 2) if a <= mpq(1, 2) <= b else max(min(a, 1 - a), min(b, 1 - b))
        if integer_r:
            w = mpq(q) ** int(1 + r)
            qlo, qhi = w * nlo, w * nhi
        else:
            w = mpmath.mpf(q) ** (1 + mpmath.mpf(r.numerator) / r.denominator)
            qlo, qhi = as_q(mpmath.nstr(w * mpmath.mpf(nlo), 40)), as_q(mpmath.nstr(w * mpmath.mpf(nhi), 40))
        if record_val is None or nhi < record_val:
            record_val = nhi
            records.append(q)
        if best is None or qhi < best[1]:
            best = (qlo, qhi, q)
        if violating is None and qhi < C:
            violating = q
    if best is None:
        raise ValueError("empty scan window")
    return DiophantineScan(best[0], best[1], best[2], violating, tuple(records), method, Q)


def diophantine_scan_vector(enclosures, C, r, Q: int) -> DiophantineScan:
    """Vector form: min over 0 < |k|_inf <= Q of |k|^r ||<k, alpha>||."""
    los = [as_q(e[0]) for e in enclosures]
    his = [as_q(e[1]) for e in enclosures]
    C, r = as_q(C), int(as_q(r))
    p = len(los)
    best, violating = None, None
    import itertools

    for k in itertools.product(range(-Q, Q + 1), repeat=p):
        nz = [x for x in k if x]
        if not nz or next(x for x in k if x) < 0:
            continue  # k and -k give the same value
        a = sum((ki * (los[i] if ki > 0 else his[i]) for i, ki in enumerate(k)), mpq(0))
        b = sum((ki * (his[i] if ki > 0 else los[i]) for i, ki in enumerate(k)), mpq(0))
        fl = math.floor(a)
        a, b = a - fl, b - fl
        nlo = mpq(0) if b >= 1 else min(a, 1 - b)
        nhi = mpq(1, 2) if a <= mpq(1, 2) <= b else max(min(a, 1 - a), min(b, 1 - b))
        w = mpq(max(abs(x) for x in k)) ** r
        qlo, qhi = w * nlo, w * nhi
        if best is None or qhi < best[1]:
            best = (qlo, qhi, k)
        if violating is None and qhi < C:
            violating = k
    return DiophantineScan(best[0], best[1], best[2], violating, (), "vector-brute", Q)
