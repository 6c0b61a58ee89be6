import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from uhermite import curieweiss as cw
from uhermite import freenormal as fn
from uhermite.circleroots import kolmogorov_distance
from uhermite.curieweiss import CWParams
from uhermite.errors import DomainError, PoleError


def _Z(n, p):
    s, L, _ = cw.partition_sum(n, p)
    return s * math.exp(L)


def test_params_validation():
    with pytest.raises(DomainError):
        CWParams(0.0)
    with pytest.raises(DomainError):
        cw.partition_sum(0, CWParams(1.0))


@given(st.floats(0.01, 3), st.complex_numbers(max_magnitude=2))
def test_single_spin(beta, h):
    p = CWParams(beta, h)
    ref = 2 * math.exp(beta / 2) * cmath.cosh(h)
    assert abs(_Z(1, p) - ref) <= 1e-13 * abs(ref) * 10 + 1e-13


def test_independent_spins_limit():
    for n in [3, 10, 40]:
        for h in [0.3, 0.2 + 0.5j, -1.1]:
            ref = n * cmath.log(2 * cmath.cosh(h))
            got = cw.log_partition(n, CWParams(1e-12, h))
            assert abs(cmath.exp(got - ref) - 1) <= 1e-9


@pytest.mark.parametrize("n", [1, 2, 5, 12, 20])
def test_spin_sum_oracle(n):
    for beta, h in [(0.5, 0.3), (2.0, 0.1 + 0.4j), (1.0, -0.7j + 0.05)]:
        p = CWParams(beta, h)
        a = cw.log_partition(n, p)
        b = cw.log_partition_spins(n, p)
        assert abs(cmath.exp(a - b) - 1) <= 1e-12
    with pytest.raises(DomainError):
        cw.log_partition_spins(25, CWParams(1.0))


@given(st.integers(1, 300), st.floats(0.01, 3), st.complex_numbers(max_magnitude=3))
def test_field_reflection_is_exact(n, beta, h):
    assert cw.partition_sum(n, CWParams(beta, h)) == cw.partition_sum(n, CWParams(beta, -h))


@pytest.mark.parametrize("n", [1, 4, 7, 50])
def test_imaginary_periodicity(n):
    for h in [0.3 + 0.2j, -0.4 + 1.0j]:
        a = _Z(n, CWParams(0.8, h))
        b = _Z(n, CWParams(0.8, h + 1j * math.pi))
        assert abs(b - (-1) ** n * a) <= 1e-13 * abs(a)


def test_pole_at_zero():
    # n = 1: Z vanishes at h = i pi/2
    with pytest.raises(PoleError):
        cw.log_partition(1, CWParams(1.0, 0.5j * math.pi))


def test_free_energy_large_field():
    h = 20 + 0.3j
    assert abs(cw.free_energy(CWParams(1.0, h)) - (0.5 + h)) <= 1e-8


def test_free_energy_symmetries():
    for beta, h in [(0.5, 0.3 + 0.2j), (2.0, 0.05 - 1.0j)]:
        F = cw.free_energy(CWParams(beta, h))
        assert cw.free_energy(CWParams(beta, h.conjugate())) == pytest.approx(F.conjugate(), abs=1e-13)
        assert cw.free_energy(CWParams(beta, -h)) == pytest.approx(F, abs=1e-13)
    with pytest.raises(DomainError):
        cw.free_energy(CWParams(1.0, 0.4j))


def test_free_energy_real_field_matches_mean_field():
    # for real h the limit is the Curie-Weiss variational value
    from scipy.optimize import minimize_scalar

    beta, h = 0.5, 0.3

    def neg(m):
        ent = -((1 + m) / 2 * math.log((1 + m) / 2) + (1 - m) / 2 * math.log((1 - m) / 2))
        return -(beta * m * m / 2 + h * m + ent)

    best = -minimize_scalar(neg, bounds=(-1 + 1e-12, 1 - 1e-12), method="bounded",
                            options={"xatol": 1e-12}).fun
    assert cw.free_energy(CWParams(beta, h)).real == pytest.approx(best, abs=1e-9)


@pytest.mark.slow
def test_free_energy_convergence():
    p = CWParams(0.5, 0.3)
    F = cw.free_energy(p)
    errs = [abs(cw.log_partition(n, p) / n - F) for n in (100, 200, 400, 800)]
    assert errs[-1] <= 1e-2
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_lee_yang_single_spin():
    np.testing.assert_allclose(cw.lee_yang_zeros(1, 1.0), [math.pi / 2])


def test_lee_yang_zeros_are_zeros():
    n, beta = 30, 0.7
    for y in cw.lee_yang_zeros(n, beta):
        s, _, scale = cw.partition_sum(n, CWParams(beta, 1j * y))
        assert abs(s) <= 1e-8 * scale


def test_lee_yang_zeros_in_support():
    ys = cw.lee_yang_zeros(200, 0.25)
    sup = cw.lee_yang_support(0.25)
    assert len(ys) == 200
    assert np.all(sup.contains(ys, 0.05))
    assert np.all((ys > -math.pi / 2) & (ys <= math.pi / 2))


def test_support_examples():
    assert cw.lee_yang_support(1.0).full_line
    assert cw.lee_yang_support(3.0).full_line
    s = cw.lee_yang_support(0.25)
    assert s.center == pytest.approx(math.pi / 2)
    assert s.halfwidth == pytest.approx(math.pi / 6 + math.sqrt(0.1875), abs=1e-15)
    assert cw.lee_yang_support(1e-8).halfwidth == pytest.approx(2e-4, abs=1e-6)
    assert not s.contains(0.0) and s.contains(math.pi / 2) and s.contains(-math.pi / 2)


def test_density_values():
    assert cw.lee_yang_density(0.25, 0.0) == 0.0
    ys = np.linspace(-math.pi / 2, math.pi / 2, 201)
    f = cw.lee_yang_density(0.25, ys)
    assert np.argmax(f) in (0, 200)  # peak at +-pi/2
    assert cw.lee_yang_density(0.25, math.pi / 2) > 0
    np.testing.assert_allclose(cw.lee_yang_density(0.25, ys + math.pi), f, atol=1e-12)


@pytest.mark.parametrize("beta", [0.25, 1.0, 2.0])
def test_density_identity_and_mass(beta):
    ys = np.linspace(-1.5, 1.5, 61)
    ang = np.angle(-np.exp(2j * ys))
    np.testing.assert_allclose(cw.lee_yang_density(beta, ys), 2 * fn.density(4 * beta, ang),
                               atol=1e-10, rtol=0)
    assert cw.lee_yang_cdf(beta, math.pi / 2) == pytest.approx(1.0, abs=1e-6)
    assert cw.lee_yang_cdf(beta, -math.pi / 2) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("beta", [0.25, 1.0, 2.0])
def test_zero_histogram_vs_density(beta):
    ys = cw.lee_yang_zeros(200, beta)
    assert kolmogorov_distance(ys, lambda y: cw.lee_yang_cdf(beta, y)) <= 0.05
