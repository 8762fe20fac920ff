"""Orbit simulation and equidistribution diagnostics for skew-product systems.

Two paths:

* ``simulate`` streams exact rational orbit points.  The base moves exactly;
  the fiber absorbs the dyadic value of F at the working precision, so the
  only error is the rounding of F, tracked as a sup-norm bound.
* ``simulate_fast`` keeps the base exact in integers and runs the fiber in
  float64; it is meant for long diagnostic runs and carries no error bound.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import mpmath
import numpy as np
from gmpy2 import mpq

from .errors import ErrorBudgetExhausted, PrecisionInsufficient
from .exact import as_q
from .fourier import needed_precision
from .skew import SkewProductSystem, _norm_inf, mod1

__all__ = [
    "OrbitPoint",
    "Orbit",
    "OrbitDiagnostics",
    "ERROR_BUDGET",
    "simulate",
    "simulate_fast",
    "translation_orbit",
    "collect",
    "diagnostics",
    "default_grid",
    "write_torb",
    "read_torb",
]

ERROR_BUDGET = mpmath.mpf(2) ** -32
MAX_BOXES = 1 << 22


@dataclass(frozen=True)
class OrbitPoint:
    index: int
    z: tuple  # exact mpq coordinates in [0, 1)
    error: mpmath.mpf  # accumulated sup-norm bound on the fiber


@dataclass
class Orbit:
    points: np.ndarray  # (N, n) float64 in [0, 1)
    precision: int  # bits used for F (53 for the float path)
    error_bound: object = None  # mpf bound for exact runs, None for float runs
    exact: list | None = None  # mpq tuples when kept
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.points.shape[0]


@dataclass
class OrbitDiagnostics:
    N: int
    weyl: dict  # character tuple -> |S_N(k)|
    coverage: float
    g: int
    precision_used: int
    error_bound: object = None

    def max_weyl(self, k_max: int | None = None) -> float:
        vals = [v for k, v in self.weyl.items() if any(k) and (k_max is None or max(map(abs, k)) <= k_max)]
        return max(vals, default=0.0)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "weyl": {",".join(map(str, k)): v for k, v in sorted(self.weyl.items())},
            "max_weyl_nonzero": self.max_weyl(),
            "coverage": self.coverage,
            "g": self.g,
            "precision_used": self.precision_used,
            "error_bound": mpmath.nstr(self.error_bound, 10) if self.error_bound is not None else None,
        }


def _start(sys: SkewProductSystem, z0):
    if z0 is None:
        return tuple(mpq(0) for _ in range(sys.n))
    z = tuple(map(as_q, z0))
    if len(z) != sys.n:
        raise ValueError(f"initial point must have {sys.n} coordinates")
    return mod1(z)


def simulate(sys: SkewProductSystem, N: int, z0=None, m_power: int = 1, precision: int | None = None,
             budget=ERROR_BUDGET) -> Iterator[OrbitPoint]:
    """Lazily yield z_k = psi^k(z0), k < N, for psi = phi^m_power, exactly up to F rounding."""
    prec = precision or sys.precision
    if not sys.F.is_zero() and prec < needed_precision(sys.F.max_frequency()):
        raise PrecisionInsufficient(f"{prec} bits < {needed_precision(sys.F.max_frequency())} needed by the frequencies of F")
    nb = mpmath.mpf(_norm_inf(sys.B.rows))
    z = _start(sys, z0)
    err = mpmath.mpf(0)
    budget = mpmath.mpf(budget)
    for k in range(N):
        yield OrbitPoint(k, z, err)
        for _ in range(m_power):
            z, e = sys.step(z, prec)
            z = mod1(z)
            err = nb * err + e
        if err > budget:
            raise ErrorBudgetExhausted(f"error bound {mpmath.nstr(err, 5)} exceeds {mpmath.nstr(budget, 5)} at step {k + 1}")


def collect(stream: Iterable[OrbitPoint], keep_exact: bool = False, precision: int = 0) -> Orbit:
    pts, exact, err = [], [], mpmath.mpf(0)
    for p in stream:
        pts.append([float(x) for x in p.z])
        if keep_exact:
            exact.append(p.z)
        err = p.error
    arr = np.array(pts, dtype=float).reshape(len(pts), -1)
    return Orbit(arr, precision, err, exact if keep_exact else None)


def _common_den(vals) -> int:
    return math.lcm(1, *(int(v.denominator) for v in vals))


def simulate_fast(sys: SkewProductSystem, N: int, z0=None, m_power: int = 1) -> Orbit:
    """Float64 orbit of psi = phi^m_power with an exact integer base orbit.

    The base coordinates are integers modulo a common denominator D, so the
    phases k x of F are reduced exactly before rounding to float.
    """
    z = _start(sys, z0)
    p, d = sys.p, sys.d
    X0 = list(z[:p])
    D = _common_den(list(sys.alpha) + X0)
    A = [list(map(int, r)) for r in sys.A.rows]
    a = [int(v * D) for v in sys.alpha]
    U = [int(v * D) for v in X0]
    steps = N * m_power
    base = np.empty((steps, p))
    x1 = []  # exact numerators of the first base coordinate
    shift = max(D.bit_length() - 62, 0)
    for i in range(steps):
        base[i] = [(u >> shift) / (D >> shift) for u in U]
        x1.append(U[0])
        U = [(sum(r[j] * U[j] for j in range(p)) + a[i2]) % D for i2, r in enumerate(A)]
    # F(x_i) from exact phases
    Fv = np.zeros((steps, d))
    for t in sys.F.terms:
        k = int(t.k[0])
        ph = np.array([((k * u) % D) >> shift for u in x1], dtype=float) / (D >> shift)
        e = np.exp(2j * np.pi * ph)
        for c in range(d):
            Fv[:, c] += np.real(complex(t.coeff[c]) * e)
    Bf = [list(map(float, r)) for r in sys.B.rows]
    Cf = [list(map(float, r)) for r in sys.C]
    Y = [float(v) for v in z[p:]]
    fiber = np.empty((steps, d))
    rd = range(d)
    for i in range(steps):
        fiber[i] = Y
        X = base[i]
        F_i = Fv[i]
        Y = [(sum(Cf[r][j] * X[j] for j in range(p)) + sum(Bf[r][j] * Y[j] for j in rd) + F_i[r]) % 1.0 for r in rd]
    pts = np.concatenate([base, fiber], axis=1)[::m_power][:N]
    return Orbit(pts, 53, None, None, {"m_power": m_power, "denominator_bits": D.bit_length()})


def translation_orbit(alpha, N: int, z0=None) -> Orbit:
    """Orbit of x -> x + alpha with exact rational arithmetic (float output)."""
    alpha = [as_q(a) for a in (alpha if isinstance(alpha, (list, tuple)) else [alpha])]
    z = [as_q(v) for v in z0] if z0 is not None else [mpq(0)] * len(alpha)
    D = _common_den(alpha + z)
    a = [int(v * D) for v in alpha]
    U = [int(v * D) for v in z]
    shift = max(D.bit_length() - 62, 0)
    pts = np.empty((N, len(alpha)))
    for i in range(N):
        pts[i] = [(u >> shift) / (D >> shift) for u in U]
        U = [(u + b) % D for u, b in zip(U, a)]
    return Orbit(pts, 53, None, None, {"denominator_bits": D.bit_length()})


def default_grid(n: int) -> int:
    """Largest per-axis box count with g^n <= 2^22 (capped at 64)."""
    g = 64
    while g ** n > MAX_BOXES:
        g //= 2
    return g


def diagnostics(orbit, k_max: int = 3, g: int | None = None) -> OrbitDiagnostics:
    """Weyl sums |S_N(k)| for |k|_inf <= k_max and box coverage on g boxes per axis."""
    if not isinstance(orbit, Orbit):
        orbit = collect(orbit)
    pts = orbit.points
    N = pts.shape[0]
    n = pts.shape[1] if pts.ndim == 2 else 0
    g = g or default_grid(max(n, 1))
    if g ** max(n, 1) > MAX_BOXES:
        raise ValueError(f"g^n = {g}^{n} exceeds {MAX_BOXES} boxes")
    if N == 0:
        return OrbitDiagnostics(0, {}, 0.0, g, orbit.precision, orbit.error_bound)
    # per-axis powers e^{2 pi i j x}, j = 0..k_max
    base = [np.exp(2j * np.pi * pts[:, a]) for a in range(n)]
    pw = []
    for a in range(n):
        P = np.empty((k_max + 1, N), dtype=complex)
        P[0] = 1.0
        for j in range(1, k_max + 1):
            P[j] = P[j - 1] * base[a]
        pw.append(P)
    weyl = {}
    for idx in np.ndindex(*([2 * k_max + 1] * n)):
        k = tuple(int(i) - k_max for i in idx)
        if k in weyl:
            continue
        prod = np.ones(N, dtype=complex)
        for a, ka in enumerate(k):
            if ka:
                prod = prod * (pw[a][ka] if ka > 0 else np.conj(pw[a][-ka]))
        v = float(min(abs(prod.sum()) / N, 1.0))
        weyl[k] = v
        weyl[tuple(-x for x in k)] = v
    boxes = np.minimum((pts * g).astype(np.int64), g - 1)
    flat = np.ravel_multi_index(boxes.T, (g,) * n)
    coverage = np.unique(flat).size / g**n
    return OrbitDiagnostics(N, weyl, float(coverage), g, orbit.precision, orbit.error_bound)


# ---------------------------------------------------------------------------
# binary orbit dump: "TORB", u16 version, u16 n, u32 precision, u64 count,
# then n * words little-endian u64 words per coordinate; the precision
# field is the number of fraction bits (a multiple of 64)

TORB_VERSION = 1


def _words(precision: int) -> int:
    return max(1, -(-precision // 64))


def write_torb(path, orbit: Orbit) -> None:
    """Fixed-point dump; exact orbits get enough bits for their (dyadic) denominators."""
    n = orbit.points.shape[1]
    bits = orbit.precision
    if orbit.exact is not None:
        bits = max([bits] + [int(x.denominator).bit_length() - 1 for row in orbit.exact for x in row])
    words = _words(bits)
    scale = 1 << (64 * words)
    with open(path, "wb") as fh:
        fh.write(b"TORB" + struct.pack("<HHIQ", TORB_VERSION, n, 64 * words, orbit.N))
        rows = orbit.exact if orbit.exact is not None else orbit.points
        for row in rows:
            for x in row:
                q = as_q(x) if orbit.exact is not None else mpq(float(x))
                v = (q.numerator * scale // q.denominator) % scale
                fh.write(int(v).to_bytes(8 * words, "little"))


def read_torb(path) -> Orbit:
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head != b"TORB":
            raise ValueError("not a TORB file")
        version, n, precision, count = struct.unpack("<HHIQ", fh.read(16))
        if version != TORB_VERSION:
            raise ValueError(f"unsupported TORB version {version}")
        words = _words(precision)
        scale = 1 << (64 * words)
        exact = []
        for _ in range(count):
            exact.append(tuple(mpq(int.from_bytes(fh.read(8 * words), "little"), scale) for _ in range(n)))
    pts = np.array([[float(x) for x in row] for row in exact], dtype=float).reshape(count, n)
    return Orbit(pts, precision, None, exact)
