import math

import mpmath
import numpy as np
import pytest
from gmpy2 import mpq
from helpers import BRANCHES

from torusmin.errors import ErrorBudgetExhausted, PrecisionInsufficient
from torusmin.exact import IntegerMatrix
from torusmin.fourier import SparseFourierSeries
from torusmin.liouville import golden_enclosure
from torusmin.orbitlab import (
    collect,
    default_grid,
    diagnostics,
    read_torb,
    simulate,
    simulate_fast,
    translation_orbit,
    write_torb,
)
from torusmin.skew import SkewProductSystem, construct_from_matrix


def eq8_system(K=5, J=3):
    return construct_from_matrix(IntegerMatrix(BRANCHES["eq9"]), J=J, K=K)


def rotation_system(alpha):
    return SkewProductSystem(1, 1, IntegerMatrix([[1]]), IntegerMatrix([]), (), (mpq(alpha),), SparseFourierSeries.zero(1, 0), "rotation")


def test_rotation_orbit_is_exact():
    a = mpq(3, 17)
    pts = list(simulate(rotation_system(a), 10))
    assert [p.z[0] for p in pts] == [(k * a) % 1 for k in range(10)]
    assert all(p.error == 0 for p in pts)


def test_precision_insufficient_at_64_bits():
    with pytest.raises(PrecisionInsufficient):
        next(simulate(eq8_system(), 10, precision=64))


@pytest.mark.slow
def test_eq8_long_exact_run():
    s = eq8_system()
    last = None
    for last in simulate(s, 10**5, precision=512):
        pass
    assert last.index == 10**5 - 1
    assert last.error < mpmath.mpf(2) ** -100


def test_exact_and_fast_paths_agree():
    s = eq8_system()
    z0 = (mpq(1, 3), mpq(1, 5))
    ex = collect(simulate(s, 500, z0), keep_exact=True)
    fa = simulate_fast(s, 500, z0)
    diff = np.abs(ex.points - fa.points)
    diff = np.minimum(diff, 1 - diff)
    assert diff.max() < 1e-10


def test_m_power_subsamples():
    s = eq8_system()
    a = simulate_fast(s, 50, m_power=2)
    b = simulate_fast(s, 100)
    assert np.array_equal(a.points, b.points[::2])


def test_error_budget():
    s = eq8_system()
    with pytest.raises(ErrorBudgetExhausted):
        for _ in simulate(s, 100, precision=200, budget=mpmath.mpf(2) ** -190):
            pass


def test_diagnostics_rational_rotation():
    d = diagnostics(translation_orbit(mpq(1, 4), 1000), k_max=4, g=8)
    assert d.coverage == 0.5
    assert d.weyl[(4,)] == pytest.approx(1.0)
    assert d.weyl[(0,)] == 1.0
    assert d.weyl[(1,)] < 1e-12


def test_diagnostics_golden_rotation():
    lo, _ = golden_enclosure(128)
    d = diagnostics(translation_orbit(lo, 10**5), k_max=10, g=64)
    assert d.coverage == 1.0
    assert d.max_weyl(10) < 1e-3


def test_diagnostics_empty_orbit():
    d = diagnostics(translation_orbit(mpq(1, 3), 0), k_max=2, g=8)
    assert d.N == 0 and d.coverage == 0 and d.weyl == {}


def test_weyl_values_against_direct_sum():
    o = simulate_fast(eq8_system(), 2000)
    d = diagnostics(o, k_max=2, g=16)
    for k in [(1, 0), (0, 1), (2, -1), (-1, 2)]:
        direct = abs(np.mean(np.exp(2j * np.pi * (o.points @ np.array(k)))))
        assert d.weyl[k] == pytest.approx(direct, abs=1e-12)


def test_weyl_reverse_order_consistency():
    o = simulate_fast(eq8_system(), 5000)
    fwd = diagnostics(o, k_max=3, g=16)
    o.points = o.points[::-1].copy()
    rev = diagnostics(o, k_max=3, g=16)
    assert max(abs(fwd.weyl[k] - rev.weyl[k]) for k in fwd.weyl) < 1e-15


def test_weyl_bounds_and_symmetry():
    d = diagnostics(simulate_fast(eq8_system(), 1000), k_max=3, g=8)
    assert all(0 <= v <= 1 for v in d.weyl.values())
    assert all(d.weyl[k] == d.weyl[tuple(-x for x in k)] for k in d.weyl)


@pytest.mark.parametrize("alpha", [mpq(1, 7), mpq(355, 1130), None])
def test_coverage_monotone_in_N(alpha):
    alpha = alpha if alpha is not None else golden_enclosure(96)[0]
    cov = [diagnostics(translation_orbit(alpha, N), k_max=1, g=64).coverage for N in (16, 32, 64, 128, 256, 512)]
    assert all(b >= a for a, b in zip(cov, cov[1:]))


def test_default_grid():
    assert default_grid(1) == 64 and default_grid(2) == 64 and default_grid(3) == 64
    assert default_grid(4) == 32 and default_grid(5) == 16
    for n in range(1, 8):
        assert default_grid(n) ** n <= 1 << 22
    with pytest.raises(ValueError):
        diagnostics(translation_orbit([mpq(1, 3)] * 4, 10), g=64)


def test_torb_round_trip_exact(tmp_path):
    s = eq8_system()
    o = collect(simulate(s, 50, (mpq(1, 2), mpq(1, 8))), keep_exact=True, precision=256)
    path = tmp_path / "orbit.torb"
    write_torb(path, o)
    back = read_torb(path)
    assert back.N == 50 and back.exact == o.exact
    raw = path.read_bytes()
    assert raw[:4] == b"TORB"


def test_torb_round_trip_float(tmp_path):
    o = translation_orbit(mpq(2, 9), 20)
    path = tmp_path / "f.torb"
    write_torb(path, o)
    back = read_torb(path)
    assert np.array_equal(back.points, o.points)


@pytest.mark.slow
def test_eq8_coverage_threshold():
    d = diagnostics(simulate_fast(eq8_system(), 10**6), k_max=3, g=32)
    assert d.coverage >= 0.98


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="measured coverage 0.091: the base is within 3^-24 of a period-729 "
                                       "orbit and the fiber returns to within 1e-5 after 2187 steps")
def test_eq15p_coverage_threshold():
    s = construct_from_matrix(IntegerMatrix(BRANCHES["eq15p_3"]), J=3, K=5)
    d = diagnostics(simulate_fast(s, 10**6), k_max=3, g=32)
    assert d.coverage >= 0.98
