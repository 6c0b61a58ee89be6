"""End-to-end acceptance checks, shared by ``uhermite verify`` and the test suite.

Each ``criterion_k(fast=False)`` returns a :class:`CriterionResult`.  The
``fast`` flag trims the largest degrees so the whole suite runs in about a
minute; the thresholds themselves are never relaxed.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import curieweiss as cw
from . import freenormal as fn
from . import heatflow as hf
from . import saddle
from .circleroots import (empirical_moment, find_roots, kolmogorov_distance,
                          newton_girard_reference)
from .polycore import (CirclePoly, RealPoly, demoivre_laplace_product, finite_free_add,
                       finite_free_mult, poly_eval_adaptive, poly_eval_mp, unitary_hermite)
from .zetasolver import zeta_array, zeta_boundary_line

__all__ = ["CriterionResult", "CRITERIA", "run_suite", "format_result"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: list = field(default_factory=list)
    seconds: float = 0.0


def format_result(r: CriterionResult) -> str:
    tag = "PASS" if r.passed else "FAIL"
    return f"[{tag}] criterion {r.number:2d}: {r.title} ({r.seconds:.1f}s) " + "; ".join(r.details)


class _Check:
    """Collects named boolean checks with a short numeric summary each."""

    def __init__(self):
        self.ok = True
        self.details = []

    def __call__(self, label, cond, value=None):
        cond = bool(cond)
        self.ok &= cond
        txt = label if value is None else f"{label}={value:.3g}"
        self.details.append(txt if cond else f"{txt} (!)")
        return cond


def _rel_coeff_err(a: CirclePoly | RealPoly, b: CirclePoly | RealPoly) -> float:
    def vals(p):
        return p.to_complex() if isinstance(p, CirclePoly) else p.to_floats().astype(complex)
    x, y = vals(a), vals(b)
    m = max(len(x), len(y))
    x = np.pad(x, (0, m - len(x)))
    y = np.pad(y, (0, m - len(y)))
    return float(np.max(np.abs(x - y)) / np.max(np.abs(y)))


# ------------------------------------------------------------------ criteria

def criterion_1(fast=False):
    chk = _Check()
    ns = (50, 200) if fast else (50, 200, 400)
    for n in ns:
        for s2 in (1.0, 4.0):
            t = time.perf_counter()
            m = find_roots(unitary_hermite(n, s2 / n))
            dt = time.perf_counter() - t
            chk(f"n={n},s2={s2:g}: {len(m)} roots in {dt:.2f}s", len(m) == n and dt <= 10.0)
    return chk


def criterion_2(fast=False):
    chk = _Check()
    n, s2, K = 200, 1.0, 10
    m = find_roots(unitary_hermite(n, s2 / n))
    emp = np.array([empirical_moment(m, k) for k in range(1, K + 1)])
    ref = newton_girard_reference(n, s2, K)
    chk("max|emp-NG|", np.max(np.abs(emp - ref)) <= 1e-8, np.max(np.abs(emp - ref)))
    return chk


def criterion_3(fast=False):
    chk = _Check()
    s2 = 1.0
    ns = (100, 200) if fast else (100, 200, 400)
    p = fn.FreeNormalParams(s2)
    mk = fn.moments(p, 5)
    ks = []
    for n in ns:
        m = find_roots(unitary_hermite(n, s2 / n))
        pk = np.array([empirical_moment(m, k).real for k in range(1, 6)])
        dev = np.max(np.abs(pk - mk))
        chk(f"n={n} n*max|p_k-m_k|", dev <= 5 / n, n * dev)
        ks.append(kolmogorov_distance(m, lambda th: fn.cdf(p, th)))
    chk("KS(n=200)", ks[ns.index(200)] <= 0.05, ks[ns.index(200)])
    chk("KS decreasing " + ",".join(f"{k:.4f}" for k in ks), all(np.diff(ks) < 0))
    return chk


EDGE_MARGIN = 0.3  # radians kept clear of a support edge in the series comparison


def criterion_4(fast=False):
    chk = _Check()
    for s2 in (1.0, 4.0, 6.0):
        p = fn.FreeNormalParams(s2)
        if s2 < 4:
            th = np.linspace(-1, 1, 801) * (fn.support_halfwidth(p) - EDGE_MARGIN)
            ser = fn.density_series(p, th, 600, window="smooth")
        elif s2 == 4:
            th = np.linspace(-1, 1, 801) * (math.pi - EDGE_MARGIN)
            ser = fn.density_series(p, th, 600, window="smooth")
        else:
            th = np.linspace(-math.pi, math.pi, 801)
            ser = fn.density_series(p, th, 200)
        f = fn.density(p, th)
        err = np.max(np.abs(f - ser))
        chk(f"s2={s2:g} |zeta-series|", err <= 1e-8, err)
        mass = fn.total_mass(p)
        chk(f"s2={s2:g} |mass-1|", abs(mass - 1) <= 1e-8, abs(mass - 1))
        sym = np.max(np.abs(f - fn.density(p, -th)))
        chk(f"s2={s2:g} symmetry", sym <= 1e-12, sym)
    return chk


def criterion_5(fast=False):
    chk = _Check()
    eps = 1e-4
    for s2 in (1.0, 4.0):
        p = fn.FreeNormalParams(s2)
        a, c = fn.edge_law(p)
        ratio = fn.density(p, fn.support_halfwidth(p) - eps) / (c * eps ** a)
        chk(f"s2={s2:g} edge ratio", 0.9 <= ratio <= 1.1, ratio)
    return chk


def criterion_6(fast=False):
    chk = _Check()
    s2 = 1e-4
    sig = math.sqrt(s2)
    x = np.array([0.0, 1.0, -1.0, 1.9, -1.9])
    val = sig * fn.density(s2, sig * x)
    err = np.max(np.abs(val - np.sqrt(4 - x * x) / (2 * math.pi)))
    chk("max semicircle error", err <= 1e-2, err)
    return chk


def criterion_7(fast=False):
    chk = _Check()
    rng = np.random.default_rng(7)
    worst_res = worst_per = worst_ref = 0.0
    lift_ok = True
    for t in (0.25, 1.0, 2.0):
        N = 1000
        th = rng.uniform(-math.pi, math.pi, N) + 1j * np.concatenate([np.zeros(100), rng.uniform(0, 10, N - 100)])
        z, _, _ = zeta_array(t, th)
        worst_res = max(worst_res, float(np.max(np.abs(z - t * np.tan(z) - th))))
        z2, _, _ = zeta_array(t, th + math.pi)
        worst_per = max(worst_per, float(np.max(np.abs(z2 - z - math.pi))))
        z3, _, _ = zeta_array(t, -np.conj(th))
        worst_ref = max(worst_ref, float(np.max(np.abs(z3 + np.conj(z)))))
        inner = th.imag > 0
        lift_ok &= bool(np.all(z.imag[inner] > th.imag[inner]))
    chk("residual", worst_res <= 1e-12, worst_res)
    chk("periodicity", worst_per <= 1e-12, worst_per)
    chk("reflection", worst_ref <= 1e-12, worst_ref)
    chk("strict lift", lift_ok)
    worst = 0.0
    for t in (0.25, 1.0, 2.0):
        for tau in np.linspace(0, 10, 41):
            z, _, _ = zeta_array(t, np.array([-math.pi / 2 + 1j * tau]))
            yt = zeta_boundary_line(t, tau)
            worst = max(worst, abs(complex(z[0]) - complex(-math.pi / 2, yt)))
    chk("boundary line", worst <= 1e-10, worst)
    return chk


SADDLE_POINTS = (0.1, 0.3 * cmath.exp(0.7j), -0.25j)


def criterion_8(fast=False):
    chk = _Check()
    ns = (100, 200) if fast else (100, 200, 400, 800)
    nmax = ns[-1]
    for s2 in (1.0, 4.0):
        for z in SADDLE_POINTS:
            d = [saddle.delta_n(n, s2, z) for n in ns]
            tag = f"s2={s2:g},z={z:.2f}"
            ratios = [d[i + 1] / d[i] for i in range(len(d) - 1)]
            chk(f"{tag} max Delta ratio", all(r <= 0.55 for r in ratios), max(ratios))
            chk(f"{tag} Delta_{nmax}", d[-1] <= 1e-2, d[-1])
            p = unitary_hermite(nmax, s2 / nmax)
            ctx, v, dv = poly_eval_adaptive(p, z, derivative=True)
            ld = abs(complex(dv / v) / nmax - saddle.limit_logderivative(z, s2))
            chk(f"{tag} logderiv n={nmax}", ld <= 2e-2, ld)
        z = 0.3 * cmath.exp(0.7j)
        p = unitary_hermite(nmax, s2 / nmax)
        _, v = poly_eval_adaptive(p, z)
        ratio = abs(complex(v) * (-1) ** nmax / saddle.prefactor_asymptotics(nmax, s2, z) - 1)
        chk(f"s2={s2:g} prefactor n={nmax}", ratio <= 0.02, ratio)
    return chk


def criterion_9(fast=False):
    chk = _Check()
    worst = 0.0
    for n in (1, 2, 5, 10, 20, 30):
        for z in (0.0, 0.3, 0.3 * cmath.exp(0.7j)):
            I = saddle.integral_Hn(n, 1.0, z)
            D = complex(poly_eval_mp(unitary_hermite(n, 1.0 / n), z)[1])
            worst = max(worst, abs(I - D) / abs(D))
    chk("max rel error", worst <= 1e-10, worst)
    return chk


def _random_circle_poly(rng, n):
    th = rng.uniform(-math.pi, math.pi, n)
    return CirclePoly.from_complex(np.poly(np.exp(1j * th))[::-1])


def _random_real_poly(rng, n):
    return RealPoly.from_floats(np.poly(rng.normal(size=n))[::-1])


def criterion_10(fast=False):
    chk = _Check()
    rng = np.random.default_rng(10)
    e_add = e_mult = e_semi = e_comm = 0.0
    for n in range(1, 13):
        P = _random_real_poly(rng, n)
        zn = RealPoly.from_floats([0.0] * n + [1.0])
        e_add = max(e_add, _rel_coeff_err(finite_free_add(P, zn, n), P))
        C = _random_circle_poly(rng, n)
        e_mult = max(e_mult, _rel_coeff_err(finite_free_mult(C, unitary_hermite(n, 0.0)), C))
        a, b = rng.uniform(0, 2, 2)
        e_semi = max(e_semi, _rel_coeff_err(finite_free_mult(unitary_hermite(n, a), unitary_hermite(n, b)),
                                            unitary_hermite(n, a + b)))
        s = float(rng.uniform(0.1, 2))
        he = hf.backward_heat_algebraic(zn, s)
        e_comm = max(e_comm, _rel_coeff_err(hf.backward_heat_algebraic(P, s), finite_free_add(P, he, n)))
    chk("boxplus unit", e_add <= 1e-12, e_add)
    chk("boxtimes unit", e_mult <= 1e-12, e_mult)
    chk("H semigroup", e_semi <= 1e-12, e_semi)
    chk("heat/boxplus commutation", e_comm <= 1e-12, e_comm)
    # coefficientwise relative deviation from the limit, monotone in N
    d, sigma = 10, 1.0
    H = unitary_hermite(2 * d, sigma ** 2 / (2 * d - 1)).to_complex().real
    devs = []
    for N in (10, 100, 1000, 10000):
        Q = demoivre_laplace_product(d, sigma, N).to_complex().real
        devs.append(float(np.max(np.abs(Q / H - 1))))
    chk("de Moivre-Laplace N=1e4", devs[-1] <= 1e-3, devs[-1])
    chk("monotone in N", all(np.diff(devs) < 0))
    return chk


def criterion_11(fast=False):
    chk = _Check()
    n = 200
    zn = RealPoly.from_floats([0.0] * n + [1.0])
    r = hf.real_roots_algebraic(hf.backward_heat_algebraic(zn, 1 / n))
    x = np.sort(r)
    F = (x * np.sqrt(np.clip(4 - x * x, 0, None)) / 2 + 2 * np.arcsin(np.clip(x / 2, -1, 1))) / (2 * math.pi) + 0.5
    i = np.arange(1, n + 1)
    ks = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    chk(f"z^{n} semicircle KS", len(r) == n and ks <= 0.05, ks)

    d = 100

    def sq(ctx):
        return [ctx.mpf((-1) ** (d - k // 2) * math.comb(d, k // 2)) if k % 2 == 0 else ctx.zero
                for k in range(2 * d + 1)]
    P = RealPoly.from_mp(sq)
    roots = hf.real_roots_algebraic(hf.backward_heat_algebraic(P, 1 / (2 * d)))
    m2, m4 = np.mean(roots ** 2), np.mean(roots ** 4)
    chk("(z^2-1)^100 |m2-2|", abs(m2 - 2) <= 0.05, abs(m2 - 2))
    chk("(z^2-1)^100 |m4-7|", abs(m4 - 7) <= 0.1, abs(m4 - 7))

    T = hf.TrigPoly.sin_half_power(n)
    a = np.sort(hf.trig_roots(hf.backward_heat_trig(T, 1 / n)).angles)
    b = np.sort(find_roots(unitary_hermite(n, 1 / n)).angles)
    chk("trig flow vs H_200 roots", np.max(np.abs(a - b)) <= 1e-8, np.max(np.abs(a - b)))

    R = hf.TrigPoly.roots_of_unity(6, 0.3)
    base = hf.trig_roots(R).angles
    moved = max(float(np.max(np.abs(hf.trig_roots(hf.backward_heat_trig(R, s)).angles - base)))
                for s in (0.1, 1.0, 5.0))
    chk("roots of unity invariant", moved == 0.0, moved)
    return chk


def criterion_12(fast=False):
    chk = _Check()
    rng = np.random.default_rng(12)
    worst = 0.0
    for n in range(1, 21):
        p = cw.CWParams(float(rng.uniform(0.1, 2)), complex(rng.normal(), rng.normal()))
        a, b = cw.log_partition(n, p), cw.log_partition_spins(n, p)
        diff = abs(a.real - b.real) + abs(cmath.exp(1j * (a.imag - b.imag)) - 1)
        worst = max(worst, diff)
    chk("spin sum vs binomial", worst <= 1e-12, worst)
    sym = all(cw.partition_sum(n, cw.CWParams(0.7, h)) == cw.partition_sum(n, cw.CWParams(0.7, -h))
              for n in (5, 50, 200) for h in (0.3, 0.2 + 0.9j, -1.1 + 0.4j))
    chk("Z(h)=Z(-h) bitwise", sym)

    p = cw.CWParams(0.5, 0.3)
    F = cw.free_energy(p)
    errs = [abs(cw.log_partition(n, p) / n - F) for n in (100, 200, 400, 800)]
    chk("free energy n=800", errs[-1] <= 1e-2 and all(np.diff(errs) < 0), errs[-1])

    for beta in (0.25, 1.0, 2.0):
        y = cw.lee_yang_zeros(200, beta)
        ks = kolmogorov_distance(y, lambda v: cw.lee_yang_cdf(beta, v))
        chk(f"Lee-Yang KS beta={beta:g}", ks <= 0.05, ks)

    sup = cw.lee_yang_support(0.25)
    y = cw.lee_yang_zeros(200, 0.25)
    expected = math.pi / 6 + math.sqrt(0.1875)
    chk("support half-width formula", abs(sup.halfwidth - expected) <= 1e-12 and bool(np.all(sup.contains(y, 0.05))))

    worst = 0.0
    ys = np.linspace(-math.pi / 2 + 1e-3, math.pi / 2, 301)
    for beta in (0.25, 1.0, 2.0):
        lhs = cw.lee_yang_density(beta, ys)
        ang = np.angle(-np.exp(2j * ys))
        rhs = 2 * fn.density(4 * beta, ang)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    chk("density identity", worst <= 1e-10, worst)
    return chk


CRITERIA = {
    1: ("root certification", criterion_1),
    2: ("moments vs Newton-Girard", criterion_2),
    3: ("weak convergence", criterion_3),
    4: ("density self-consistency", criterion_4),
    5: ("edge laws", criterion_5),
    6: ("semicircle limit", criterion_6),
    7: ("zeta solver", criterion_7),
    8: ("saddle-point asymptotics", criterion_8),
    9: ("integral representation", criterion_9),
    10: ("finite free algebra", criterion_10),
    11: ("heat flow", criterion_11),
    12: ("Curie-Weiss", criterion_12),
}


def run_criterion(k: int, fast: bool = False) -> CriterionResult:
    title, fun = CRITERIA[k]
    t = time.perf_counter()
    try:
        chk = fun(fast)
        res = CriterionResult(k, title, chk.ok, chk.details)
    except Exception as exc:  # a crash is a failure with its message
        res = CriterionResult(k, title, False, [f"{type(exc).__name__}: {exc}"])
    res.seconds = time.perf_counter() - t
    return res


def run_suite(suite: str = "fast", only=None, echo=None) -> list[CriterionResult]:
    fast = suite == "fast"
    out = []
    for k in sorted(only or CRITERIA):
        r = run_criterion(k, fast)
        if echo:
            echo(format_result(r))
        out.append(r)
    return out
