"""Cohomological equations: hyperbolic semiconjugacies, Fourier witnesses of
non-solvability, and smooth conjugacies over Diophantine translations.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from gmpy2 import mpq
from scipy import ndimage

from .blockform import basis_with_last
from .errors import (
    BranchMismatch,
    NoConvergence,
    NotDiophantineCertified,
    NotHyperbolic,
    SingularDivisor,
)
from .exact import (
    IntegerMatrix,
    as_q,
    char_poly,
    frac_to_str,
    min_poly,
    rational_inverse,
    rational_kernel,
    saturate,
    to_mpf,
)
from .fourier import QuadElem, SparseFourierSeries, Term, phase_of, root_of_unity
from .liouville import diophantine_scan, diophantine_scan_vector
from .skew import SkewProductSystem, iterate_formula
from .spectra import prop1_obstruction, root_census

__all__ = [
    "SemiConjugacy",
    "ObstructionWitness",
    "WitnessVerdict",
    "SmoothConjugacy",
    "MismatchReport",
    "solve_hyperbolic",
    "hyperbolic_factor",
    "prop1_pipeline",
    "FactorCheck",
    "factor_check",
    "periodic_points",
    "obstruction_witness",
    "obstruction_witnesses",
    "affine_mismatch_check",
    "solve_diophantine_conjugacy",
]


# ---------------------------------------------------------------------------
# hyperbolic equation  B H - H o phi = R


def _check_hyperbolic(B: IntegerMatrix):
    census = root_census(char_poly(B))
    if census.n_roots_of_unity or census.n_unimodular_not_rou:
        raise NotHyperbolic(f"B has {census.n_roots_of_unity + census.n_unimodular_not_rou} unimodular eigenvalues")
    return census


def _spectral_projectors(B: np.ndarray):
    w, S = np.linalg.eig(B)
    Si = np.linalg.inv(S)
    up = np.real(S @ np.diag((abs(w) > 1).astype(float)) @ Si)
    down = np.real(S @ np.diag((abs(w) < 1).astype(float)) @ Si)
    rate = max(max((1 / abs(x) for x in w if abs(x) > 1), default=0), max((abs(x) for x in w if abs(x) < 1), default=0))
    return up, down, rate


def _grid_points(N: int, dim: int) -> np.ndarray:
    axes = [np.arange(N) / N] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh])


def _freqs(N: int, dim: int):
    f = np.fft.fftfreq(N, 1.0 / N)
    mesh = np.meshgrid(*([f] * dim), indexing="ij")
    return mesh


class _Translation:
    """Composition with x -> x + omega through Fourier multipliers."""

    def __init__(self, omega, N, dim):
        self.omega = np.asarray(omega, dtype=float) % 1.0
        mesh = _freqs(N, dim)
        ph = sum(k * w for k, w in zip(mesh, self.omega))
        self.fwd = np.exp(2j * np.pi * ph)
        # a shifted Nyquist mode is not representable on the grid: those modes
        # are removed from the solve (and show up in the shadow residual)
        self.keep = np.ones(self.fwd.shape, dtype=bool)
        if N % 2 == 0:
            for k in mesh:
                self.keep &= np.abs(k) != N // 2
        self.fwd = self.fwd * self.keep
        self.N, self.dim = N, dim

    def band_limit(self, H):
        shape = (H.shape[0],) + (self.N,) * self.dim
        axes = tuple(range(1, self.dim + 1))
        out = np.fft.ifftn(np.fft.fftn(H.reshape(shape), axes=axes) * self.keep, axes=axes)
        return np.real(out).reshape(H.shape)

    def compose(self, H, inverse=False):
        shape = (H.shape[0],) + (self.N,) * self.dim
        Hh = np.fft.fftn(H.reshape(shape), axes=tuple(range(1, self.dim + 1)))
        mult = np.conj(self.fwd) if inverse else self.fwd
        out = np.fft.ifftn(Hh * mult, axes=tuple(range(1, self.dim + 1)))
        return np.real(out).reshape(H.shape)

    def at(self, H, pts, shift=0.0):
        return _trig_eval(H, self.N, self.dim, pts + shift)


def _trig_eval(H, N, dim, pts, chunk_entries: int = 1 << 22):
    """Trigonometric interpolant of grid values H (Nyquist modes dropped) at
    arbitrary points, contracting one axis at a time."""
    r = H.shape[0]
    shape = (r,) + (N,) * dim
    axes = tuple(range(1, dim + 1))
    Hh = np.fft.fftn(H.reshape(shape), axes=axes) / N**dim
    f = np.fft.fftfreq(N, 1.0 / N)
    if N % 2 == 0:
        idx = np.nonzero(np.abs(f) == N // 2)[0]
        for ax in axes:
            sl = [slice(None)] * (dim + 1)
            sl[ax] = idx
            Hh[tuple(sl)] = 0
    M = pts.shape[1]
    out = np.empty((r, M))
    step = max(1, chunk_entries // (r * N ** max(dim - 1, 1)))
    for lo in range(0, M, step):
        P = pts[:, lo:lo + step]
        E = [np.exp(2j * np.pi * np.outer(P[d], f)) for d in range(dim)]
        T = np.tensordot(Hh, E[-1], axes=([dim], [1]))  # (r, N.., m)
        for d in range(dim - 2, -1, -1):
            T = np.einsum("r...kj,jk->r...j", T, E[d])
        out[:, lo:lo + step] = np.real(T)
    return out


class _TrigMap:
    """Composition with a general map through the grid's trigonometric interpolant."""

    def __init__(self, phi, phi_inv, N, dim):
        self.N, self.dim = N, dim
        pts = _grid_points(N, dim)
        self.fwd_pts = phi(pts) % 1.0
        self.inv_pts = phi_inv(pts) % 1.0

    def compose(self, H, inverse=False):
        return _trig_eval(H, self.N, self.dim, self.inv_pts if inverse else self.fwd_pts)

    def at(self, H, pts, shift=None):
        return _trig_eval(H, self.N, self.dim, pts % 1.0)


class _Spline:
    """Composition with a general map through periodic spline interpolation."""

    def __init__(self, phi, phi_inv, N, dim, order):
        self.N, self.dim, self.order = N, dim, order
        pts = _grid_points(N, dim)
        self.fwd_pts = phi(pts) % 1.0
        self.inv_pts = phi_inv(pts) % 1.0 if phi_inv is not None else None
        self.phi, self.phi_inv = phi, phi_inv

    def _interp(self, H, pts):
        shape = (self.N,) * self.dim
        coords = pts * self.N
        return np.stack([
            ndimage.map_coordinates(H[c].reshape(shape), coords, order=self.order, mode="grid-wrap")
            for c in range(H.shape[0])
        ])

    def compose(self, H, inverse=False):
        return self._interp(H, self.inv_pts if inverse else self.fwd_pts)

    def at(self, H, pts, shift=None):
        return self._interp(H, pts % 1.0)


@dataclass
class SemiConjugacy:
    H: np.ndarray  # (r, N^dim) grid samples
    B: IntegerMatrix
    N: int
    dim: int
    interp: str
    residual: float  # sup of B H - H o phi - R on the grid
    shadow_residual: float  # same on the grid of size 2N
    iterations: int
    contraction: float
    history: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "B": self.B.to_json(),
            "grid": self.N,
            "dim": self.dim,
            "interp": self.interp,
            "residual": self.residual,
            "shadow_residual": self.shadow_residual,
            "iterations": self.iterations,
            "contraction": self.contraction,
        }


def solve_hyperbolic(B: IntegerMatrix, rhs, phi, grid: int = 256, dim: int | None = None, tol: float = 1e-10,
                     max_iter: int = 200, interp="spectral", phi_inv=None, shadow: bool = True) -> SemiConjugacy:
    """Solve B H - H o phi = R for continuous H: T^dim -> R^r.

    rhs: callable taking points (dim, M) and returning (r, M).
    phi: a translation vector (composition is exact for the grid's
         trigonometric interpolant) or a callable on point arrays together with
         phi_inv.  interp: "spectral" (trigonometric interpolation) or a
         spline order 1..5.
    """
    _check_hyperbolic(B)
    Bn = np.array(B.rows, dtype=float)
    up, down, rate = _spectral_projectors(Bn)
    if rate >= 1:
        raise NoConvergence(f"contraction factor {rate} >= 1")
    Binv = np.linalg.inv(Bn)
    translation = not callable(phi)
    if dim is None:
        dim = len(phi) if translation else None
    if dim is None:
        raise ValueError("dim is required for a general map")
    if not translation and phi_inv is None:
        raise ValueError("composition with a general map needs phi_inv")
    if interp == "spectral":
        comp = _Translation(phi, grid, dim) if translation else _TrigMap(phi, phi_inv, grid, dim)
    else:
        if translation:
            w = np.asarray(phi, dtype=float)[:, None]
            phi, phi_inv = (lambda z: z + w), (lambda z: z - w)
        comp = _Spline(phi, phi_inv, grid, dim, int(interp))

    pts = _grid_points(grid, dim)
    R = np.asarray(rhs(pts), dtype=float)
    if isinstance(comp, _Translation):
        R = comp.band_limit(R)
    r = R.shape[0]
    H = np.zeros_like(R)
    history = []
    res = float(np.max(np.abs(R))) if R.size else 0.0
    it = 0
    if res <= tol:
        history.append(res)
    else:
        for it in range(1, max_iter + 1):
            Hphi = comp.compose(H)
            plus = Binv @ (up @ (Hphi + R))
            minus = comp.compose(down @ (Bn @ H - R), inverse=True)
            H = plus + minus
            res = float(np.max(np.abs(Bn @ H - comp.compose(H) - R)))
            history.append(res)
            if res < tol:
                break
        else:
            raise NoConvergence(f"residual {res:.3e} after {max_iter} iterations")
    shadow_res = float("nan")
    if shadow:
        fine = _grid_points(2 * grid, dim)
        Rf = np.asarray(rhs(fine), dtype=float)
        if isinstance(comp, _Translation):
            Hf = comp.at(H, fine) if grid ** dim <= 1024 else _upsample(H, grid, dim)
            Hf_phi = comp.at(H, fine, np.asarray(phi, dtype=float)[:, None]) if grid ** dim <= 1024 else _upsample(comp.compose(H), grid, dim)
        else:
            Hf = comp.at(H, fine)
            Hf_phi = comp.at(H, phi(fine) % 1.0)
        shadow_res = float(np.max(np.abs(Bn @ Hf - Hf_phi - Rf)))
    return SemiConjugacy(H, B, grid, dim, str(interp), res, shadow_res, it, rate, history)


def _upsample(H, N, dim):
    """Values of the trigonometric interpolant on the grid of size 2N (zero padding)."""
    shape = (H.shape[0],) + (N,) * dim
    axes = tuple(range(1, dim + 1))
    Hh = np.fft.fftshift(np.fft.fftn(H.reshape(shape), axes=axes), axes=axes)
    pad = [(0, 0)] + [(N // 2, N // 2)] * dim
    big = np.pad(Hh, pad)
    # Nyquist modes were excluded from the solve
    for ax in range(1, dim + 1):
        sl = [slice(None)] * (dim + 1)
        sl[ax] = N // 2
        big[tuple(sl)] = 0
    out = np.fft.ifftn(np.fft.ifftshift(big, axes=axes), axes=axes) * (2**dim)
    return np.real(out).reshape(H.shape[0], -1)


@dataclass
class HyperbolicFactor:
    """Z^n -> Z^r quotient by the invariant sublattice of the unimodular-root part."""

    P: list  # r x n integer rows
    B: IntegerMatrix  # induced action: P L = B P
    n: int

    def project(self, z):
        return np.asarray(self.P, dtype=float) @ z


def hyperbolic_factor(L: IntegerMatrix) -> HyperbolicFactor:
    cert = prop1_obstruction(L)
    if not cert.obstructed:
        raise NotHyperbolic("no hyperbolic factor of the minimal polynomial")
    q = cert.q
    n = L.n
    from .blockform import invariant_sublattice

    gamma = invariant_sublattice(L, q) if q.degree > 0 else []
    W = basis_with_last(gamma, n)
    Wi = W.inverse()
    M = Wi @ L @ W
    r = n - len(gamma)
    B = M.block(0, r)
    P = [list(Wi.rows[i]) for i in range(r)]
    assert all(M.rows[i][j] == 0 for i in range(r) for j in range(r, n))
    return HyperbolicFactor(P, B, n)


def prop1_pipeline(L: IntegerMatrix, F, grid: int = 16, interp="spectral", tol: float = 1e-8, max_iter: int = 200):
    """Factor map h = P + H with h o phi = b o h for phi(z) = L z + F(z).

    F: callable on (n, M) arrays (small smooth periodic perturbation).
    Returns (factor, semiconjugacy, phi, phi_inv).
    """
    fac = hyperbolic_factor(L)
    Ln = np.array(L.rows, dtype=float)
    Li = np.array(L.inverse().rows, dtype=float)
    Pn = np.array(fac.P, dtype=float)

    def phi(z):
        return Ln @ z + F(z)

    def phi_inv(w):
        z = Li @ w
        for _ in range(60):
            z_new = Li @ (w - F(z))
            if np.max(np.abs(z_new - z)) < 1e-15:
                return z_new
            z = z_new
        return z

    def rhs(z):
        return Pn @ F(z)

    sc = solve_hyperbolic(fac.B, rhs, phi, grid=grid, dim=L.n, tol=tol, max_iter=max_iter, interp=interp, phi_inv=phi_inv)
    return fac, sc, phi, phi_inv


def _wrap(x):
    return x - np.round(x)


@dataclass
class FactorCheck:
    defect: float  # max torus distance between h o phi and b o h on random points
    samples: int
    periodic: dict  # k -> number of fixed points of b^k
    preimage_gap: float  # max over periodic points of the distance to the sampled image of h
    modulus: float  # sampling modulus of h on the grid (neighbour jumps)
    preimages_found: bool

    def to_json(self) -> dict:
        return {
            "defect": self.defect,
            "samples": self.samples,
            "periodic": {str(k): v for k, v in self.periodic.items()},
            "preimage_gap": self.preimage_gap,
            "modulus": self.modulus,
            "preimages_found": self.preimages_found,
        }


def periodic_points(B: IntegerMatrix, k: int) -> list:
    """Exact fixed points of x -> B^k x on the torus: (B^k - I)^{-1} m mod 1."""
    r = B.n
    D = (B ** k) - IntegerMatrix.identity(r)
    Di = rational_inverse([list(row) for row in D.rows])
    det = abs(D.det())
    pts = set()
    # Z^r / D Z^r has det elements, all reached from m in [0, det)^r
    for m in np.ndindex(*([det] * r)):
        x = tuple(Fraction(sum(Di[i][j] * m[j] for j in range(r))) % 1 for i in range(r))
        pts.add(x)
        if len(pts) == det:
            break
    return sorted(pts)


def factor_check(fac: HyperbolicFactor, sc: SemiConjugacy, phi, samples: int = 1000, seed: int = 0, kmax: int = 3) -> FactorCheck:
    """Check h o phi = b o h for h = P + H at random points and look for
    h-preimages of the periodic points of b among the grid samples."""
    rng = np.random.default_rng(seed)
    n = fac.n
    Pn = np.array(fac.P, dtype=float)
    Bn = np.array(fac.B.rows, dtype=float)
    z = rng.random((n, samples))

    def h(pts):
        return Pn @ pts + _trig_eval(sc.H, sc.N, sc.dim, pts % 1.0)

    defect = float(np.max(np.abs(_wrap(h(phi(z)) - Bn @ h(z)))))
    grid = _grid_points(sc.N, sc.dim)
    hg = (Pn @ grid + sc.H) % 1.0
    shape = (hg.shape[0],) + (sc.N,) * sc.dim
    hs = hg.reshape(shape)
    modulus = 0.0
    for ax in range(1, sc.dim + 1):
        jump = _wrap(np.roll(hs, -1, axis=ax) - hs)
        modulus = max(modulus, float(np.max(np.linalg.norm(jump, axis=0))))
    periodic = {}
    gap = 0.0
    for k in range(1, kmax + 1):
        pts = periodic_points(fac.B, k)
        periodic[k] = len(pts)
        for x in pts:
            xv = np.array([float(c) for c in x])[:, None]
            gap = max(gap, float(np.min(np.linalg.norm(_wrap(hg - xv), axis=0))))
    return FactorCheck(defect, samples, periodic, gap, modulus, gap <= modulus)



# ---------------------------------------------------------------------------
# Fourier witnesses


class WitnessVerdict(str, enum.Enum):
    NO_CONTINUOUS_SOLUTION = "NoContinuousSolution"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class ObstructionWitness:
    lgamma: tuple
    m: int
    probes: list  # dicts: k, seq, value (mpc), exact (QuadElem | None)
    liminf_estimate: object
    verdict: WitnessVerdict
    c: object = None  # certified lower bound
    exact_constant: QuadElem | None = None
    sequence: int | None = None

    def values(self):
        return [p["value"] for p in self.probes]

    def to_json(self) -> dict:
        return {
            "lgamma": list(self.lgamma),
            "m": self.m,
            "verdict": self.verdict.value,
            "c": mpmath.nstr(self.c, 20) if self.c is not None else None,
            "exact_constant": self.exact_constant.to_json() if self.exact_constant is not None else None,
            "sequence": self.sequence,
            "liminf_estimate": mpmath.nstr(self.liminf_estimate, 20),
            "probes": [
                {
                    "k": str(p["k"]),
                    "seq": p["seq"],
                    "re": mpmath.nstr(mpmath.re(p["value"]), 30),
                    "im": mpmath.nstr(mpmath.im(p["value"]), 30),
                    "exact": p["exact"].to_json() if p["exact"] is not None else None,
                }
                for p in self.probes
            ],
        }


def _lam_elem(r: Fraction, K):
    """exp(2 pi i r) as an element of the field K when possible."""
    r = Fraction(r) % 1
    if r == 0:
        return QuadElem.of(1, K)
    if r == Fraction(1, 2):
        return QuadElem.of(-1, K)
    m, a = r.denominator, r.numerator
    z = root_of_unity(m)
    if z.K is not K:
        return None
    out = QuadElem.of(1, K)
    for _ in range(a):
        out = out * z
    return out


# orders q of the roots of unity that can be eigenvalues of a quasi-unipotent B, n <= 5
_ROOT_ORDERS = (1, 2, 3, 4, 5, 6, 8, 10, 12)


def _divisor_bits(theta) -> int:
    """-log2 of the distance from theta to the nearest root-of-unity angle a/q (exact)."""
    theta = as_q(theta)
    gap = None
    for q in _ROOT_ORDERS:
        x = theta * q
        x = x - (x.numerator // x.denominator)
        dist = min(x, 1 - x) / q
        gap = dist if gap is None else min(gap, dist)
    if gap == 0:
        return 0
    return max(0, int(gap.denominator).bit_length() - int(gap.numerator).bit_length() + 1)


def _probe_vectors(sys: SkewProductSystem, J: int | None, prec: int):
    """(term, (omega I - B)^{-1} F_hat(k)) for the synthesized frequencies."""
    B = sys.B
    d = B.n
    a1 = sys.alpha[0]
    out = []
    by_seq = {}
    for t in sys.F.terms:
        by_seq.setdefault(t.seq, []).append(t)
    with mpmath.workprec(prec):
        for s, ts in sorted(by_seq.items()):
            ts = sorted(ts, key=lambda t: (abs(t.k[0]), t.k[0]))
            if J is not None:
                ts = ts[: 2 * J]
            for t in ts:
                theta = phase_of(t.k, (a1,))
                if t.theta is not None and as_q(t.theta) != theta:
                    raise AssertionError("stored phase disagrees with the translation")
                # the solve cancels a divisor of size ~gap, so carry twice its bits
                wp = prec + 2 * _divisor_bits(theta)
                with mpmath.workprec(wp):
                    w = mpmath.expjpi(2 * to_mpf(theta))
                    M = w * mpmath.eye(d) - mpmath.matrix(B.rows)
                    if abs(mpmath.det(M)) < mpmath.mpf(2) ** (-wp // 2):
                        raise SingularDivisor(f"exp(2 pi i k alpha) is an eigenvalue of B at k={t.k}")
                    u = mpmath.lu_solve(M, mpmath.matrix([mpmath.mpc(c) for c in t.coeff]))
                out.append((t, [u[i] for i in range(d)]))
    return out


def _term_plan(t: Term, B: IntegerMatrix):
    """Character-independent data for the exact identity of one term."""
    if t.V is None:
        return None
    K = t.V[0].K
    lam = _lam_elem(t.lam, K)
    if lam is None:
        return None
    d = B.n
    BV = [sum((QuadElem.of(B.rows[i][j], K) * t.V[j] for j in range(d)), QuadElem.of(0, K)) for i in range(d)]
    right = all((x - lam * v).is_zero() for x, v in zip(BV, t.V))
    return K, lam, right, [v.a for v in t.V], [v.b for v in t.V]


def obstruction_witnesses(sys: SkewProductSystem, lgammas, m: int | None = None, J: int | None = None, prec: int = 256):
    m = sys.m if m is None else m
    d = sys.d
    Bm_I = (sys.B ** m) - IntegerMatrix.identity(d)
    vecs = _probe_vectors(sys, J, prec)
    plans = [_term_plan(t, sys.B) for t, _ in vecs]
    tol = mpmath.mpf(2) ** (-prec // 2)
    out = []
    with mpmath.workprec(prec):
        for lg in lgammas:
            lg = tuple(int(x) for x in lg)
            if len(lg) != d or not any(lg):
                raise ValueError("character must be a nonzero vector of the fiber dimension")
            if any(sum(lg[i] * Bm_I.rows[i][j] for i in range(d)) for j in range(d)):
                raise BranchMismatch(f"l_gamma {lg} is not fixed by B^{m}: the equation depends on the fiber")
            lB = [sum(lg[i] * sys.B.rows[i][j] for i in range(d)) for j in range(d)]
            probes = []
            for (t, u), plan in zip(vecs, plans):
                val = mpmath.fdot(lg, u)
                ex = None
                if plan is not None:
                    K, lam, right, va, vb = plan
                    left = lam.b == 0 and all(x == lam.a * l for x, l in zip(lB, lg))
                    if right or left:
                        ex = QuadElem(sum(l * a for l, a in zip(lg, va)), sum(l * b for l, b in zip(lg, vb)), K)
                        if abs(val - ex.value()) > tol:
                            raise AssertionError("exact probe disagrees with the numeric value")
                probes.append({"k": t.k[0], "seq": t.seq, "value": val, "exact": ex})
            out.append(_verdict(lg, m, probes))
    return out


def _verdict(lg, m, probes) -> ObstructionWitness:
    seqs = sorted({p["seq"] for p in probes})
    best = None
    for s in seqs:
        ps = [p for p in probes if p["seq"] == s and p["k"] > 0]
        if not ps or any(p["exact"] is None for p in ps):
            continue
        consts = {(p["exact"].a, p["exact"].b) for p in ps}
        if len(consts) == 1 and not ps[0]["exact"].is_zero():
            c = abs(ps[0]["exact"].value())
            if best is None or c > best[0]:
                best = (c, ps[0]["exact"], s)
    tail = [abs(p["value"]) for p in probes[-2:]] if probes else [mpmath.mpf(0)]
    liminf = min(tail) if tail else mpmath.mpf(0)
    if best is not None:
        return ObstructionWitness(lg, m, probes, liminf, WitnessVerdict.NO_CONTINUOUS_SOLUTION, best[0], best[1], best[2])
    return ObstructionWitness(lg, m, probes, liminf, WitnessVerdict.INCONCLUSIVE)


def obstruction_witness(sys: SkewProductSystem, lgamma, m: int | None = None, J: int | None = None, prec: int = 256) -> ObstructionWitness:
    """Fourier values G_hat(k_j) = <l_gamma, (omega_j I - B)^{-1} F_hat(k_j)>.

    NoContinuousSolution is returned only when along one sequence every probe
    equals the same nonzero constant by an exact identity (valid for all j);
    otherwise the verdict is Inconclusive.
    """
    return obstruction_witnesses(sys, [lgamma], m, J, prec)[0]


# ---------------------------------------------------------------------------
# affine parts


@dataclass(frozen=True)
class MismatchReport:
    mismatch: bool
    fiber_dependent: bool  # l_gamma (B^m - I) != 0
    linear_mismatch: bool  # l (A^m - I) != l_gamma C_m
    translation_mismatch: bool  # l S_A != l_gamma S_C
    lhs_translation: tuple
    rhs_translation: tuple

    def to_json(self) -> dict:
        return {
            "mismatch": self.mismatch,
            "fiber_dependent": self.fiber_dependent,
            "linear_mismatch": self.linear_mismatch,
            "translation_mismatch": self.translation_mismatch,
            "lhs_translation": list(self.lhs_translation),
            "rhs_translation": list(self.rhs_translation),
        }


def _translation_coeffs(sys: SkewProductSystem, m: int):
    """Integer matrices S_A, S_C with a^m(0) = S_A alpha and alpha(m) = S_C alpha."""
    p, d = sys.p, sys.d
    SA = IntegerMatrix.zeros(p)
    P = IntegerMatrix.identity(p)
    for _ in range(m):
        SA = SA + P
        P = P @ sys.A
    from .skew import C_l

    SC = [[0] * p for _ in range(d)]
    for l in range(m):
        Cl = C_l(sys, l)
        SC = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(SC, Cl)]
    return SA, SC


def affine_mismatch_check(sys: SkewProductSystem, m: int, l, lgamma) -> MismatchReport:
    """Exact comparison of the affine parts in

        <l, a^m(X) - X> + G(psi_0 X) - G(X) = <l_gamma, C_m X + (B^m - I) Y + alpha(m) + F_m(X)>.

    Translations are compared as integer combinations of the base translation
    vector, whose entries are independent over Q together with 1 for the
    systems we build.  Mismatch means no continuous G can exist.
    """
    l = tuple(int(x) for x in l)
    lg = tuple(int(x) for x in lgamma)
    f = iterate_formula(sys, m)
    d, p = sys.d, sys.p
    Bm_I = f.Bm - IntegerMatrix.identity(d)
    fiber = any(sum(lg[i] * Bm_I.rows[i][j] for i in range(d)) for j in range(d))
    Am_I = f.Am - IntegerMatrix.identity(p)
    lhs_lin = [sum(l[i] * Am_I.rows[i][j] for i in range(p)) for j in range(p)]
    rhs_lin = [sum(lg[i] * f.C_m[i][j] for i in range(d)) for j in range(p)]
    SA, SC = _translation_coeffs(sys, m)
    lhs_tr = tuple(sum(l[i] * SA.rows[i][j] for i in range(p)) for j in range(p))
    rhs_tr = tuple(sum(lg[i] * SC[i][j] for i in range(d)) for j in range(p))
    lin = lhs_lin != rhs_lin
    tr = lhs_tr != rhs_tr
    return MismatchReport(bool(fiber or lin or tr), bool(fiber), bool(lin), bool(tr), lhs_tr, rhs_tr)


# ---------------------------------------------------------------------------
# smooth conjugacy over a Diophantine translation


@dataclass
class SmoothConjugacy:
    G: SparseFourierSeries
    beta: list
    beta1: list
    projector: list  # exact rational projector onto ker (I - B)^T
    residual: float
    grid: int
    affine: dict  # data of phi_0 (matched exactly against the system)
    scan: object = None
    sign_convention: str = "h(X, Y) = (X, Y - G(X))"

    def to_json(self) -> dict:
        return {
            "G": self.G.to_json(),
            "beta": [mpmath.nstr(b, 30) for b in self.beta],
            "beta1": [mpmath.nstr(b, 30) for b in self.beta1],
            "projector": [[frac_to_str(x) for x in r] for r in self.projector],
            "residual": self.residual,
            "grid": self.grid,
            "affine": self.affine,
            "scan": self.scan.to_json() if self.scan is not None else None,
            "sign_convention": self.sign_convention,
        }


def _projector(B: IntegerMatrix) -> list:
    """Orthogonal projector onto ker (I - B)^T, exact over Q."""
    d = B.n
    IminusBT = [[int(i == j) - B.rows[j][i] for j in range(d)] for i in range(d)]
    K = rational_kernel(IminusBT, d)
    if not K:
        return [[Fraction(0)] * d for _ in range(d)]
    # P = K (K^T K)^{-1} K^T with K as columns
    KtK = [[sum(a * b for a, b in zip(u, v)) for v in K] for u in K]
    inv = rational_inverse(KtK)
    r = len(K)
    return [[sum(K[a][i] * inv[a][b] * K[b][j] for a in range(r) for b in range(r)) for j in range(d)] for i in range(d)]


def solve_diophantine_conjugacy(sys: SkewProductSystem, tol: float = 1e-12, enclosure=None, C="1/10", r=1, Q: int = 1000,
                                grid: int = 1024, from_samples: bool = False, prec: int = 256) -> SmoothConjugacy:
    """G with F = beta_1 + G(X + alpha) - B G(X), so h(X, Y) = (X, Y - G(X)) conjugates
    phi to phi_0(X, Y) = (X + alpha, C X + B Y + beta_1).

    enclosure: (lo, hi) bounds for the translation (scalar) or a list of them;
    the exact sys.alpha is used when omitted.  from_samples=True computes
    G_hat from F sampled on the grid (aliasing included) instead of from its terms.
    """
    if sys.A != IntegerMatrix.identity(sys.p):
        raise ValueError("the base must be a translation (A = I)")
    p, d = sys.p, sys.d
    if enclosure is None:
        enclosure = [(a, a) for a in sys.alpha]
    elif p == 1 and not isinstance(enclosure[0], (tuple, list)):
        enclosure = [enclosure]
    if p == 1:
        scan = diophantine_scan(enclosure[0], C, r, Q)
    else:
        scan = diophantine_scan_vector(enclosure, C, r, Q)
    if scan.violating is not None:
        raise NotDiophantineCertified(f"q={scan.violating} violates the Diophantine bound (C={C}, r={r})")

    F = sys.F
    with mpmath.workprec(prec):
        beta = [mpmath.mpf(0)] * d
        c0 = F.coefficient((0,) * F.dim_domain)
        if c0 is not None:
            beta = [mpmath.re(x) for x in c0]
        Pq = _projector(sys.B)
        beta1 = [sum((to_mpf(Pq[i][j]) * beta[j] for j in range(d)), mpmath.mpf(0)) for i in range(d)]
        rest = [b - b1 for b, b1 in zip(beta, beta1)]
        IminusB = mpmath.matrix([[int(i == j) - sys.B.rows[i][j] for j in range(d)] for i in range(d)])
        g0 = mpmath.qr_solve(IminusB, mpmath.matrix(rest))[0] if any(rest) else mpmath.matrix(d, 1)
        Bm = mpmath.matrix(sys.B.rows)
        if from_samples:
            if p != 1:
                raise ValueError("sampled mode is one-dimensional")
            vals = _eval_grid_exact(F, grid)
            spec = np.fft.fft(vals, axis=1) / grid
            kk = np.fft.fftfreq(grid, 1.0 / grid).astype(int)
            pairs = [((int(k),), [mpmath.mpc(complex(spec[c, i])) for c in range(d)]) for i, k in enumerate(kk) if k != 0 and abs(spec[:, i]).max() > 1e-300]
        else:
            pairs = [(t.k, list(t.coeff)) for t in F.terms if any(t.k)]
        terms = []
        for k, c in pairs:
            theta = phase_of(k, sys.alpha)
            w = mpmath.expjpi(2 * to_mpf(theta))
            M = w * mpmath.eye(d) - Bm
            if abs(mpmath.det(M)) < mpmath.mpf(2) ** (-prec // 2):
                raise SingularDivisor(f"small divisor vanishes at k={k}")
            u = mpmath.lu_solve(M, mpmath.matrix(c))
            terms.append(Term(tuple(k), tuple(u[i] for i in range(d))))
        if any(abs(g0[i]) > 0 for i in range(d)):
            terms.append(Term((0,) * p, tuple(mpmath.mpc(g0[i]) for i in range(d))))
        terms.sort(key=lambda t: t.k)
        G = SparseFourierSeries(p, d, tuple(terms), mpmath.mpf(0), prec, {"solves": "F = beta1 + G(x + alpha) - B G(x)"})
    residual = _conjugacy_residual(sys, G, [float(b) for b in beta1], grid)
    affine = {
        "A": sys.A.to_json(),
        "alpha": [frac_to_str(a) for a in sys.alpha],
        "C": [list(r) for r in sys.C],
        "B": sys.B.to_json(),
        "beta1": [mpmath.nstr(b, 30) for b in beta1],
        "matches_system": _affine_matches(sys, Pq),
    }
    return SmoothConjugacy(G, beta, beta1, Pq, residual, grid, affine, scan)


def _affine_matches(sys: SkewProductSystem, Pq) -> bool:
    """Exact checks behind phi_0: h is a shear, so phi_0 keeps the linear part
    and base translation of phi; beta_1 lies in ker (I - B)^T via P."""
    d = sys.d
    P2 = [[sum(Pq[i][k] * Pq[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
    idem = P2 == [list(r) for r in Pq]
    sym = all(Pq[i][j] == Pq[j][i] for i in range(d) for j in range(d))
    # (I - B)^T P = 0
    ker = all(sum((int(i == k) - sys.B.rows[k][i]) * Pq[k][j] for k in range(d)) == 0 for i in range(d) for j in range(d))
    shear = IntegerMatrix.identity(sys.n)
    lin = shear @ sys.linear_part() @ shear.inverse() == sys.linear_part()
    return bool(idem and sym and ker and lin)


def _eval_grid_exact(F: SparseFourierSeries, N: int, shift=None) -> np.ndarray:
    """F(i/N + shift) on the 1-D grid; phases k (i/N + shift) reduced exactly."""
    i = np.arange(N, dtype=np.int64)
    out = np.zeros((F.dim_range, N))
    for t in F.terms:
        k = int(t.k[0])
        base = float(phase_of((k,), (shift,))) if shift is not None else 0.0
        ph = 2 * np.pi * (((k % N) * i) % N / N + base)
        e = np.exp(1j * ph)
        for c_idx, c in enumerate(t.coeff):
            out[c_idx] += (complex(c) * e).real
    return out


def _conjugacy_residual(sys: SkewProductSystem, G: SparseFourierSeries, beta1, N: int) -> float:
    """sup over the grid of |h o phi - phi_0 o h| (fiber part; the base parts agree identically)."""
    if sys.p != 1:
        raise ValueError("grid residual implemented for one-dimensional bases")
    Fv = _eval_grid_exact(sys.F, N)
    G0 = _eval_grid_exact(G, N)
    Ga = _eval_grid_exact(G, N, sys.alpha[0])
    Bn = np.array(sys.B.rows, dtype=float)
    res = Fv - Ga + Bn @ G0 - np.asarray(beta1, dtype=float)[:, None]
    return float(np.max(np.abs(res))) if res.size else 0.0
