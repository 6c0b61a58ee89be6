import math

import numpy as np
import pytest

from uhermite import circleroots as cr
from uhermite import freenormal as fn
from uhermite.errors import CertificationError, DomainError
from uhermite.polycore import CirclePoly, unitary_hermite


def test_precision_validation():
    with pytest.raises(DomainError):
        cr.EvalPrecision(working_digits=8)
    with pytest.raises(DomainError):
        cr.EvalPrecision(working_digits=64, max_digits=32)
    assert cr.EvalPrecision().ladder() == [32, 64, 128, 256]


def test_h1_single_root_at_zero():
    m = cr.find_roots(unitary_hermite(1, 0.7))
    assert m.n == 1 and m.angles[0] == 0.0
    v, err = cr.circle_function(unitary_hermite(1, 0.7), 0.0)
    assert abs(v) <= err


def test_h2_closed_form():
    m = cr.find_roots(unitary_hermite(2, 1.0))
    a = math.acos(math.exp(-0.5))
    assert a == pytest.approx(0.91910666, abs=1e-8)
    np.testing.assert_allclose(m.angles, [-a, a], atol=1e-12)


def test_circle_function_h2_changes_sign_at_roots():
    p = unitary_hermite(2, 1.0)
    a = math.acos(math.exp(-0.5))
    v, err = cr.circle_function(p, np.array([a - 1e-3, a + 1e-3]))
    assert v[0] * v[1] < 0 and np.all(err < np.abs(v))


def test_zero_variance_gives_multiple_root():
    m = cr.find_roots(unitary_hermite(6, 0.0))
    assert m.n == 6
    np.testing.assert_array_equal(m.angles, np.zeros(6))


@pytest.mark.parametrize("n,s2", [(50, 1.0), (50, 4.0), (201, 1.0), (37, 2.5)])
def test_certified_count_and_symmetry(n, s2):
    m = cr.hermite_roots(n, s2)
    assert m.n == n
    assert np.all(np.diff(m.angles) > 0)
    np.testing.assert_allclose(np.sort(-m.angles), m.angles, atol=max(m.enclosure_width, 1e-15))
    assert m.enclosure_width <= 1e-12
    # every bracket straddles a sign change at the certified precision
    lo, hi = m.brackets[:, 0], m.brackets[:, 1]
    p = unitary_hermite(n, s2 / n)
    va, ea = cr.circle_function(p, lo)
    vb, eb = cr.circle_function(p, hi)
    assert np.all(np.sign(va) * np.sign(vb) < 0)
    assert np.all((np.abs(va) > ea) & (np.abs(vb) > eb))


def test_confinement_n200():
    m = cr.hermite_roots(200, 1.0)
    assert m.n == 200
    assert np.max(np.abs(m.angles)) <= fn.support_halfwidth(1.0) + 0.05


def test_moments_vs_newton_girard():
    n = 200
    m = cr.hermite_roots(n, 1.0)
    ref = cr.newton_girard_reference(n, 1.0, 10)
    emp = np.array([cr.empirical_moment(m, k) for k in range(1, 11)])
    assert np.max(np.abs(emp.imag)) <= 1e-10
    assert np.max(np.abs(emp.real - ref)) <= 1e-8
    assert cr.empirical_moment(m, 0) == 1
    assert ref[0] == pytest.approx(math.exp(-(n - 1) / (2 * n)), rel=1e-14)


def test_newton_girard_third_power_sum():
    n, s2 = 9, 1.3
    e = [math.comb(n, k) * math.exp(-s2 * k * (n - k) / (2 * n)) for k in range(4)]
    p3 = (e[1] ** 3 - 3 * e[1] * e[2] + 3 * e[3]) / n
    assert cr.newton_girard_reference(n, s2, 3)[2] == pytest.approx(p3, rel=1e-13)
    with pytest.raises(DomainError):
        cr.newton_girard_reference(3, 1.0, 4)


def test_psi_empirical_small():
    p = unitary_hermite(40, 1.0 / 40)
    assert cr.psi_empirical(p, 0) == 0
    h = 1e-6
    d = (cr.psi_empirical(p, h) - cr.psi_empirical(p, -h)) / (2 * h)
    assert abs(d - math.exp(-39 / 80)) <= 1e-10
    with pytest.raises(DomainError):
        cr.psi_empirical(p, 1.0)


@pytest.mark.slow
def test_psi_empirical_converges():
    z = 0.3 * np.exp(0.7j)
    theta = -1j * np.log(-z)
    target = fn.psi(1.0, theta)
    errs = [abs(cr.psi_empirical(unitary_hermite(n, 1.0 / n), z) - target) for n in (100, 200, 400)]
    assert errs[-1] <= 0.02
    for a, b in zip(errs, errs[1:]):
        assert 0.4 <= b / a <= 0.6


def test_kolmogorov_quantile_sample():
    p = fn.FreeNormalParams(2.0)
    n = 20
    grid = np.linspace(-math.pi, math.pi, 801)
    F = fn.cdf(p, grid)
    q = np.interp((np.arange(n) + 0.5) / n, F, grid)
    d = cr.kolmogorov_distance(q, lambda x: fn.cdf(p, x))
    assert d <= 1 / (2 * n) + 1e-4


@pytest.mark.slow
def test_kolmogorov_decreasing():
    p = fn.FreeNormalParams(1.0)
    ks = [cr.kolmogorov_distance(cr.hermite_roots(n, 1.0), lambda x: fn.cdf(p, x)) for n in (100, 200, 400)]
    assert ks[1] <= 0.05
    assert ks[0] > ks[1] > ks[2]


def test_non_self_inversive_rejected():
    with pytest.raises(DomainError):
        cr.find_roots(CirclePoly.from_complex([1.0, 2.0, 5.0], self_inversive=False))


def test_roots_off_circle_fail_certification():
    # z^2 - 3z + 1 is self-inversive but both roots are real and off the circle
    p = CirclePoly.from_complex([1.0, -3.0, 1.0])
    assert p.self_inversive
    with pytest.raises(CertificationError) as info:
        cr.find_roots(p, cr.EvalPrecision(working_digits=16, max_digits=32))
    assert info.value.found == 0 and info.value.expected == 2


def test_general_self_inversive_input():
    angles = np.array([-2.0, -0.4, 0.1, 1.3, 2.9])
    coeffs = np.poly(np.exp(1j * angles))[::-1]
    p = CirclePoly.from_complex(coeffs)
    m = cr.find_roots(p)
    np.testing.assert_allclose(m.angles, angles, atol=1e-11)
