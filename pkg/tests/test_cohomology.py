import dataclasses
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from gmpy2 import mpq
from helpers import BRANCHES, CAT, EQ8
from hypothesis import given
from hypothesis import strategies as st

from torusmin.errors import BranchMismatch, NoConvergence, NotDiophantineCertified, NotHyperbolic
from torusmin.exact import IntegerMatrix
from torusmin.fourier import SparseFourierSeries, Term
from torusmin.liouville import golden_enclosure
from torusmin.skew import SkewProductSystem, construct_from_matrix
from torusmin.cohomology import (
    WitnessVerdict,
    affine_mismatch_check,
    factor_check,
    obstruction_witness,
    obstruction_witnesses,
    periodic_points,
    prop1_pipeline,
    solve_diophantine_conjugacy,
    solve_hyperbolic,
)

GOLDEN = np.array([(5**0.5 - 1) / 2, 2**0.5 - 1])


def trig3(z):
    x, y = z
    return np.array([np.cos(2 * np.pi * x) + 0.5 * np.sin(2 * np.pi * (x + 2 * y)) + 0.25 * np.cos(2 * np.pi * 3 * y)])


def trig3_vec(z):
    return np.vstack([trig3(z), 0.3 * np.sin(2 * np.pi * z[1])[None, :]])


# ---------------------------------------------------------------------------
# hyperbolic solver


def test_zero_rhs_gives_zero():
    sc = solve_hyperbolic(CAT, lambda z: np.zeros((2, z.shape[1])), GOLDEN, grid=16)
    assert sc.residual == 0 and not np.any(sc.H)


def test_not_hyperbolic():
    with pytest.raises(NotHyperbolic):
        solve_hyperbolic(IntegerMatrix([[0, -1], [1, 0]]), trig3_vec, GOLDEN, grid=8)


def test_cat_map_semiconjugacy_residual():
    sc = solve_hyperbolic(CAT, trig3_vec, GOLDEN, grid=64, tol=1e-12)
    assert sc.residual < 1e-12 and sc.iterations <= 200
    assert sc.contraction == pytest.approx((3 - 5**0.5) / 2, rel=1e-12)
    assert sc.shadow_residual <= 2 * sc.residual + 1e-13


def test_translation_oracle_single_mode():
    # scalar B = [[2]] is hyperbolic; for R = cos(2 pi x) the solution is
    # Re(c e^{2 pi i x}) with c = 1 / (2 - e^{2 pi i w})
    w = GOLDEN[:1]
    sc = solve_hyperbolic(IntegerMatrix([[2]]), lambda z: np.cos(2 * np.pi * z), w, grid=32, tol=1e-14)
    x = np.arange(32) / 32
    c = 1 / (2 - np.exp(2j * np.pi * w[0]))
    assert np.max(np.abs(sc.H[0] - np.real(c * np.exp(2j * np.pi * x)))) < 1e-13


def test_general_map_matches_translation_path():
    w = GOLDEN[:, None]
    a = solve_hyperbolic(CAT, trig3_vec, GOLDEN, grid=16, tol=1e-12)
    b = solve_hyperbolic(CAT, trig3_vec, lambda z: z + w, grid=16, dim=2, tol=1e-12, phi_inv=lambda z: z - w)
    assert np.max(np.abs(a.H - b.H)) < 1e-10


def test_nonconvergence_reported():
    with pytest.raises(NoConvergence):
        solve_hyperbolic(CAT, trig3_vec, GOLDEN, grid=16, tol=1e-30, max_iter=5)


# ---------------------------------------------------------------------------
# hyperbolic factor pipeline

PROP1 = IntegerMatrix([[0, 0, 1], [1, 0, -4], [0, 1, 4]])  # (x - 1)(x^2 - 3x + 1)


def _invariant_F(z):
    # l = (1, 1, 1) satisfies l L = l and l . v = 0, so l . z is phi-invariant
    v = np.array([1.0, -1.0, 0.0])[:, None]
    return 0.01 * v * np.sin(2 * np.pi * z.sum(axis=0))[None, :]


def test_prop1_factor_map():
    fac, sc, phi, _ = prop1_pipeline(PROP1, _invariant_F, grid=8)
    fc = factor_check(fac, sc, phi, samples=1000)
    assert fc.defect <= 1e-8
    assert fc.preimages_found
    # Lefschetz counts |det(B^k - I)| from traces of the hyperbolic block
    tr = [3, 7, 18]
    assert [fc.periodic[k] for k in (1, 2, 3)] == [abs(2 - t) for t in tr]


def test_periodic_points_exact():
    pts = periodic_points(CAT, 2)
    B2 = (CAT ** 2).rows
    assert len(pts) == 5
    for x in pts:
        y = [sum(B2[i][j] * x[j] for j in range(2)) for i in range(2)]
        assert all((a - b).denominator == 1 for a, b in zip(y, x))


# ---------------------------------------------------------------------------
# witnesses

SYS = {name: construct_from_matrix(IntegerMatrix(BRANCHES[name]), J=4) for name in ("eq9", "eq15p_3", "eq15p_4", "eq16", "eq2p", "eq_minus1", "eqB_2")}


@pytest.mark.parametrize("lg", [1, -1, 2, 7, -30])
def test_eq8_witness_equals_character(lg):
    w = obstruction_witness(SYS["eq9"], (lg,), J=4)
    assert w.verdict == WitnessVerdict.NO_CONTINUOUS_SOLUTION
    assert w.c == abs(lg)
    assert len(w.probes) == 8
    for p in w.probes:
        assert p["exact"] is not None and p["exact"].b == 0 and p["exact"].a == lg
        assert abs(p["value"] - lg) < mpmath.mpf(2) ** -120


def test_eq15p_witness_constant():
    s = SYS["eq15p_3"]
    V = s.F.terms[-1].V
    w = obstruction_witness(s, (1, 0), J=4)
    assert w.verdict == WitnessVerdict.NO_CONTINUOUS_SOLUTION
    assert w.exact_constant == V[0] and not V[0].is_zero()
    assert len({(p["exact"].a, p["exact"].b) for p in w.probes if p["k"] > 0}) == 1


def test_eq15p_witness_direct_oracle():
    # G_hat(k) = <l, (w - B)^{-1} F_hat(k)> by Cramer's rule at high precision
    s = SYS["eq15p_3"]
    (b11, b12), (b21, b22) = s.B.rows
    w = obstruction_witness(s, (2, -1), J=3)
    with mpmath.workprec(2048):
        a = mpmath.mpf(s.alpha[0].numerator) / s.alpha[0].denominator
        for p in w.probes:
            t = next(t for t in s.F.terms if t.k[0] == p["k"])
            om = mpmath.expjpi(2 * ((p["k"] * a) % 1))
            f1, f2 = t.coeff
            det = (om - b11) * (om - b22) - b12 * b21
            u1 = ((om - b22) * f1 + b12 * f2) / det
            u2 = (b21 * f1 + (om - b11) * f2) / det
            assert abs(p["value"] - (2 * u1 - u2)) < mpmath.mpf(2) ** -100


@pytest.mark.parametrize("name", ["eq15p_4", "eq16", "eq2p", "eq_minus1", "eqB_2"])
def test_other_branches_certify(name):
    s = SYS[name]
    d = s.d
    fixed = None
    Bm = (s.B ** s.m).rows
    for cand in ([1] + [0] * (d - 1), [0] * (d - 1) + [1], [1] * d):
        if all(sum(cand[i] * Bm[i][j] for i in range(d)) == cand[j] for j in range(d)):
            fixed = tuple(cand)
            break
    w = obstruction_witness(s, fixed, J=3)
    assert w.verdict == WitnessVerdict.NO_CONTINUOUS_SOLUTION and w.c > 0


def test_generic_series_is_inconclusive():
    s = SYS["eq9"]
    terms = []
    for k in range(1, 9):
        c = mpmath.mpc(mpmath.mpf(2) ** (-k * k), 0)
        terms += [Term((k,), (c,)), Term((-k,), (c,))]
    G = SparseFourierSeries(1, 1, tuple(sorted(terms, key=lambda t: t.k)), mpmath.mpf(0))
    w = obstruction_witness(dataclasses.replace(s, F=G), (1,))
    assert w.verdict == WitnessVerdict.INCONCLUSIVE
    assert w.liminf_estimate < 1e-15


def test_character_must_be_fixed():
    with pytest.raises(BranchMismatch):
        obstruction_witness(SYS["eq15p_3"], (1, 0), m=1)
    with pytest.raises(ValueError):
        obstruction_witness(SYS["eq9"], (0,))


def test_batch_matches_single():
    lgs = [(1, 0), (0, 1), (3, -2)]
    batch = obstruction_witnesses(SYS["eq15p_3"], lgs, J=2)
    for lg, w in zip(lgs, batch):
        assert w.to_json() == obstruction_witness(SYS["eq15p_3"], lg, J=2).to_json()


@given(st.integers(-20, 20).filter(bool), st.integers(-60, 60))
def test_eq8_mismatch_rule(lg, l):
    # translations match iff 2 l = 3 l_gamma
    r = affine_mismatch_check(SYS["eq9"], 2, (l,), (lg,))
    assert r.mismatch == (2 * l != 3 * lg)


def test_shear_branch_always_mismatched():
    s = construct_from_matrix(IntegerMatrix(BRANCHES["shear3"]), J=2)
    for lg in [(1, 0), (0, 1), (2, 3), (-1, 5)]:
        r = affine_mismatch_check(s, 2, (0,), lg)
        assert r.mismatch
    assert affine_mismatch_check(s, 2, (0,), (0, 1)).fiber_dependent


# ---------------------------------------------------------------------------
# Diophantine conjugacy


def golden_system(coeff="1/10", F=None):
    lo, hi = golden_enclosure(256)
    if F is None:
        c = mpmath.mpc(mpmath.mpf(Fraction(coeff).numerator) / Fraction(coeff).denominator)
        F = SparseFourierSeries(1, 1, (Term((-1,), (c,)), Term((1,), (c,))), mpmath.mpf(0))
    s = SkewProductSystem(1, 2, IntegerMatrix([[1]]), IntegerMatrix([[-1]]), ((0,),), (lo,), F, "golden")
    return s, (lo, hi)


def test_golden_conjugacy():
    s, enc = golden_system()
    conj = solve_diophantine_conjugacy(s, enclosure=enc, grid=1024)
    assert conj.residual < 1e-12
    g1 = conj.G.coefficient((1,))[0]
    phi = (5**0.5 - 1) / 2
    assert abs(complex(g1) - 0.1 / (np.exp(2j * np.pi * phi) + 1)) < 1e-14
    assert conj.affine["matches_system"]
    assert conj.beta1 == [0]


def test_constant_F_gives_zero_G():
    # B = 1 on the fiber: ker (I - B)^T is everything, beta_1 = beta
    c = mpmath.mpc("0.25")
    F = SparseFourierSeries(1, 1, (Term((0,), (c,)),), mpmath.mpf(0))
    lo, hi = golden_enclosure(256)
    s = SkewProductSystem(1, 2, IntegerMatrix([[1]]), IntegerMatrix([[1]]), ((1,),), (lo,), F, "const")
    conj = solve_diophantine_conjugacy(s, enclosure=(lo, hi), grid=64)
    assert conj.G.is_zero() and conj.residual == 0
    assert conj.beta1 == [mpmath.mpf("0.25")]


def test_projector_removes_only_invariant_part():
    # B = -1: ker (I - B)^T = 0, so beta_1 = 0 and G_hat(0) = beta / 2
    c = mpmath.mpc("0.5")
    F = SparseFourierSeries(1, 1, (Term((0,), (c,)),), mpmath.mpf(0))
    s, enc = golden_system(F=F)
    conj = solve_diophantine_conjugacy(s, enclosure=enc, grid=64)
    assert conj.beta1 == [0]
    assert abs(conj.G.coefficient((0,))[0] - mpmath.mpf("0.25")) < 1e-60
    assert conj.residual < 1e-15


def test_rational_alpha_rejected():
    s, _ = golden_system()
    s = dataclasses.replace(s, alpha=(mpq(1, 3),))
    with pytest.raises(NotDiophantineCertified):
        solve_diophantine_conjugacy(s, enclosure=(mpq(1, 3), mpq(1, 3)))


def test_liouville_alpha_rejected():
    e = SYS["eq9"]
    s = SkewProductSystem(1, 2, IntegerMatrix([[1]]), IntegerMatrix([[-1]]), ((0,),), e.alpha, e.F, "liouville")
    with pytest.raises(NotDiophantineCertified):
        solve_diophantine_conjugacy(s, Q=1000)


def test_conjugacy_residual_refines_with_grid():
    # sampled mode: aliasing of a high harmonic shrinks once the grid resolves it
    for k in (40, 90, 200):
        lo, hi = golden_enclosure(256)
        c = mpmath.mpc("0.01")
        F = SparseFourierSeries(1, 1, (Term((-k,), (c,)), Term((-1,), (c,)), Term((1,), (c,)), Term((k,), (c,))), mpmath.mpf(0))
        s = SkewProductSystem(1, 2, IntegerMatrix([[1]]), IntegerMatrix([[-1]]), ((0,),), (lo,), F, "golden")
        res = [solve_diophantine_conjugacy(s, enclosure=(lo, hi), grid=g, from_samples=True).residual for g in (64, 128, 256, 512)]
        assert all(b <= a + 1e-15 for a, b in zip(res, res[1:])), res
        assert res[-1] < 1e-12
