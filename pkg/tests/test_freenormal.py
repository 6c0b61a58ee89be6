import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from uhermite import freenormal as fn
from uhermite.errors import DomainError
from uhermite.freenormal import FreeNormalParams

S2_VALUES = [0.5, 1.0, 4.0, 6.0]
EDGE_MARGIN = 0.3


def test_params_validation():
    for bad in [0.0, -1.0, math.inf, math.nan]:
        with pytest.raises(DomainError):
            FreeNormalParams(bad)
    with pytest.raises(DomainError):
        FreeNormalParams(1.0, quad_tol=0)


def test_support_halfwidth():
    assert fn.support_halfwidth(4.0) == math.pi
    assert fn.support_halfwidth(9.0) == math.pi
    assert fn.support_halfwidth(1.0) == pytest.approx(math.pi / 3 + math.sqrt(3) / 2, abs=1e-15)
    assert fn.support_halfwidth(1.0) == pytest.approx(1.913222, abs=1e-6)
    assert fn.support_halfwidth(1e-6) == pytest.approx(2e-3, rel=1e-5)


def test_q_poly_examples():
    for x in [-50.0, -1.0, 0.0, 2.5]:
        assert fn.q_poly(0, x) == 1.0
        assert fn.q_poly(2, x) == pytest.approx(3 + 3 * x + x * x / 2, rel=1e-14, abs=1e-14)
    assert fn.q_poly(1, -2.0) == 0.0
    with pytest.raises(DomainError):
        fn.q_poly(-1, 0.0)


@given(st.integers(0, 40), st.floats(-60, 10))
def test_q_poly_vs_exact_sum(m, x):
    mp.mp.dps = 80
    xr = mp.mpf(x)
    ref = mp.fsum(xr ** j / mp.factorial(j) * mp.binomial(m + 1, j + 1) for j in range(m + 1))
    assert fn.q_poly(m, x) == pytest.approx(float(ref), rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("s2", S2_VALUES)
def test_moment_closed_forms(s2):
    assert fn.moment(s2, 0) == 1.0
    assert fn.moment(s2, 1) == pytest.approx(math.exp(-s2 / 2), rel=1e-15)
    m3 = 0.5 * math.exp(-1.5 * s2) * (2 - 6 * s2 + 3 * s2 * s2)
    assert fn.moment(s2, 3) == pytest.approx(m3, rel=1e-13, abs=1e-16)
    assert fn.moment(s2, -3) == fn.moment(s2, 3)
    np.testing.assert_allclose(fn.moments(s2, 3), [fn.moment(s2, k) for k in (1, 2, 3)])


@pytest.mark.parametrize("s2", [1.0, 4.0])
def test_moments_from_density(s2):
    p = FreeNormalParams(s2)
    m = fn.support_halfwidth(p)
    for ell in range(1, 9):
        # singular edges: substitute theta = m - v^2 (or v^3) on each half
        k = 2 if s2 < 4 else 3
        g = lambda v: np.cos(ell * (m - v ** k)) * fn.density(p, m - v ** k) * k * v ** (k - 1)
        val = 2 * fn.integrate(g, 0.0, m ** (1 / k), 1e-12)
        assert abs(val - fn.moment(p, ell)) <= 1e-7


def test_density_outside_support_is_zero():
    m = math.pi / 3 + math.sqrt(3) / 2
    assert fn.density(1.0, m + 0.1) == 0.0
    assert fn.density(1.0, -(m + 0.1)) == 0.0
    assert fn.density(1.0, 0.0) > 0


@pytest.mark.parametrize("s2", S2_VALUES)
def test_density_symmetric_and_periodic(s2):
    th = np.linspace(0, math.pi, 101)
    f = fn.density(s2, th)
    np.testing.assert_allclose(fn.density(s2, -th), f, atol=1e-12, rtol=0)
    np.testing.assert_allclose(fn.density(s2, th + 2 * math.pi), f, atol=1e-12, rtol=0)
    assert np.all(f >= 0)


@pytest.mark.parametrize("s2", S2_VALUES)
def test_density_mass(s2):
    assert abs(fn.total_mass(s2) - 1) <= 1e-8


@pytest.mark.parametrize("s2", [1.0, 4.0, 6.0])
def test_density_vs_fourier_series(s2):
    p = FreeNormalParams(s2)
    m = fn.support_halfwidth(p)
    if s2 > 4:
        th = np.linspace(-math.pi, math.pi, 201)
        approx = fn.density_series(p, th, 200)
    else:
        th = np.linspace(-(m - EDGE_MARGIN), m - EDGE_MARGIN, 201)
        approx = fn.density_series(p, th, 600, window="smooth")
    assert np.max(np.abs(approx - fn.density(p, th))) <= 1e-8


def test_series_limits():
    assert fn.density_series(2.0, 0.3, 0) == pytest.approx(1 / (2 * math.pi))
    with pytest.raises(DomainError):
        fn.density_series(2.0, 0.0, -1)


@pytest.mark.slow
def test_series_at_cubic_edge_converges_at_cube_root_rate():
    # f vanishes like eps^(1/3) at theta = pi, so truncation error ~ L^(-1/3):
    # eight times the terms halves the value
    a = fn.density_series(4.0, math.pi, 100)
    b = fn.density_series(4.0, math.pi, 800)
    assert 0 < b < a < 0.03
    assert 0.45 <= b / a <= 0.55
    with pytest.raises(DomainError):
        fn.density_series(2.0, 0.0, 10, window="hann")


def test_series_terms_needed():
    n = fn.series_terms_needed(6.0, 1e-14)
    assert abs(fn.moment(6.0, n)) < 1e-14 <= abs(fn.moment(6.0, n - 1))


def test_square_root_edge():
    s2, eps = 1.0, 1e-4
    m = fn.support_halfwidth(s2)
    pred = (4 * s2 / (4 - s2)) ** 0.25 * math.sqrt(eps) / (math.pi * s2)
    assert 0.9 <= fn.density(s2, m - eps) / pred <= 1.1
    expo, const = fn.edge_law(s2)
    assert expo == 0.5 and const * math.sqrt(eps) == pytest.approx(pred)


def test_cubic_edge():
    eps = 1e-4
    pred = math.sqrt(3) / (4 * math.pi) * (1.5 * eps) ** (1 / 3)
    assert 0.9 <= fn.density(4.0, math.pi - eps) / pred <= 1.1
    assert fn.edge_law(4.0)[0] == pytest.approx(1 / 3)
    assert fn.edge_law(5.0) is None


def test_semicircle_limit():
    s2 = 1e-4
    sig = math.sqrt(s2)
    for x in [0.0, 1.0, -1.0, 1.9, -1.9]:
        lhs = sig * fn.density(s2, sig * x)
        assert abs(lhs - math.sqrt(4 - x * x) / (2 * math.pi)) <= 1e-2


def test_cdf_values():
    p = FreeNormalParams(1.0)
    assert fn.cdf(p, -math.pi) == 0.0
    assert abs(fn.cdf(p, math.pi) - 1) <= 1e-8
    assert abs(fn.cdf(p, 0.0) - 0.5) <= 1e-8
    assert abs(fn.cdf(p, fn.support_halfwidth(p)) - 1) <= 1e-8
    for s2 in [4.0, 6.0]:
        assert abs(fn.cdf(s2, 0.0) - 0.5) <= 1e-8
    with pytest.raises(DomainError):
        fn.cdf(p, 4.0)


def test_cdf_monotone_array():
    th = np.linspace(-math.pi, math.pi, 41)
    c = fn.cdf(2.0, th)
    assert c.shape == th.shape
    assert np.all(np.diff(c) >= -1e-12)
    assert c[0] == 0.0 and abs(c[-1] - 1) <= 1e-8


@pytest.mark.parametrize("s2", [1.0, 4.0])
def test_psi_far_field(s2):
    assert abs(fn.psi(s2, 0.7 + 40j)) <= 1e-10


def test_psi_first_coefficient():
    # psi(z) = m_1 z + O(z^2) with z = -e^{i theta}
    # central difference along the real radius cancels the z^2 term
    s2, r = 1.5, 1e-3
    plus = fn.psi(s2, math.pi - 1j * math.log(r))  # z = r
    minus = fn.psi(s2, -1j * math.log(r))  # z = -r
    assert abs((plus - minus) / (2 * r) - fn.moment(s2, 1)) <= 1e-6


@pytest.mark.parametrize("s2", [1.0, 4.0, 6.0])
def test_psi_boundary_gives_density(s2):
    th = np.linspace(-3, 3, 61)
    vals = np.real(1 + 2 * fn.psi(s2, math.pi - th + 0j)) / (2 * math.pi)
    np.testing.assert_allclose(vals, fn.density(s2, th), atol=1e-9, rtol=0)


def test_s_transform():
    assert fn.s_transform(3.0, -0.5) == pytest.approx(1.0)
    assert fn.s_transform(3.0, 0.0) == pytest.approx(math.exp(1.5))


@pytest.mark.parametrize("s2", [0.5, 1.0, 4.0])
def test_psi_inverse_relation(s2):
    for theta in [0.3 + 2j, -1.0 + 3j, 2.0 + 5j]:
        w = fn.psi(s2, theta)
        lhs = w / (1 + w) * complex(fn.s_transform(s2, w))
        assert abs(lhs + np.exp(1j * theta)) <= 1e-8


def test_integrate_intervals():
    out = fn.integrate_intervals(np.sin, [0, 0], [np.pi, np.pi / 2], 1e-14)
    np.testing.assert_allclose(out, [2.0, 1.0], atol=1e-13)
    assert fn.integrate(lambda x: np.exp(x), 0, 1) == pytest.approx(math.e - 1, abs=1e-12)
