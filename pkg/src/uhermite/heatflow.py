"""Backward heat flow ``exp(-(s/2) d^2)`` on algebraic and trigonometric polynomials."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .circleroots import EmpiricalCircleMeasure, EvalPrecision, _brackets, _refine, _scan, find_roots
from .errors import CertificationError, DomainError
from .polycore import CirclePoly, RealPoly
from .scaledarith import ScaledArray, logsumexp_signed

__all__ = [
    "TrigPoly",
    "sin_half_power",
    "backward_heat_algebraic",
    "backward_heat_trig",
    "backward_heat_circle",
    "real_roots_algebraic",
    "trig_roots",
    "free_cumulants_from_moments",
    "moments_from_free_cumulants",
    "root_trajectories",
]


class TrigPoly:
    """Real trigonometric polynomial ``sum_{l=-d}^{d} c_l e^{i l theta}``.

    ``c`` holds ``c_{-d}..c_d`` as complex doubles; ``exact`` rebuilds them
    (same order) in an mpmath context for high-precision root finding.
    """

    def __init__(self, c: Sequence[complex], exact=None, root_hint=None, rtol: float = 1e-12):
        c = np.asarray(c, dtype=complex)
        if c.ndim != 1 or len(c) % 2 == 0:
            raise DomainError("need 2d+1 coefficients c_{-d}..c_d")
        d = (len(c) - 1) // 2
        if c[-1] == 0:
            raise DomainError("top coefficient c_d must be nonzero")
        if np.max(np.abs(c - np.conj(c[::-1]))) > rtol * np.max(np.abs(c)):
            raise DomainError("coefficients must satisfy c_{-l} = conj(c_l)")
        self.d = d
        self.c = c
        if exact is None:
            vals = [complex(v) for v in c]

            def exact(ctx):
                return [ctx.mpc(v.real, v.imag) for v in vals]
        self._exact = exact
        self.root_hint = root_hint

    def coefficient(self, ell: int) -> complex:
        return complex(self.c[ell + self.d])

    def __call__(self, theta):
        th = np.asarray(theta, dtype=float)
        ell = np.arange(-self.d, self.d + 1)
        return np.real(np.exp(1j * np.multiply.outer(th, ell)) @ self.c)

    def to_circle_poly(self) -> CirclePoly:
        """``P(z) = z^d T`` with ``P_j = c_{j-d}``; ``P(e^{i t}) e^{-i d t} = T(t)``."""
        ex = self._exact
        return CirclePoly.from_mp(ex, self_inversive=True, lam=1.0, root_hint=self.root_hint)

    @classmethod
    def roots_of_unity(cls, d: int, phase: float = 0.0) -> "TrigPoly":
        """``cos(d theta - phase)``: zeroes equispaced with gap pi/d."""
        d = int(d)
        c = np.zeros(2 * d + 1, dtype=complex)
        c[-1] = 0.5 * np.exp(-1j * phase)
        c[0] = np.conj(c[-1])
        return cls(c)

    @classmethod
    def sin_half_power(cls, n: int) -> "TrigPoly":
        """``(sin(theta/2))^n`` for even ``n`` (a zero of multiplicity n at 0)."""
        n = int(n)
        if n < 2 or n % 2:
            raise DomainError("TrigPoly form needs even n >= 2; use sin_half_power() for odd n")
        # (sin t/2)^n = (2i)^-n e^{-i n t/2} (e^{i t} - 1)^n and (2i)^-n = (-4)^(-n/2)
        sgn = -1 if (n // 2) % 2 else 1
        ints = [sgn * (-1) ** (n - j) * math.comb(n, j) for j in range(n + 1)]

        def exact(ctx):
            return [ctx.mpc(ctx.ldexp(ctx.mpf(v), -n)) for v in ints]

        c = [math.ldexp(float(v), -n) for v in ints]
        return cls(c, exact=exact, root_hint=((0.0, n),))

    def __repr__(self):
        return f"TrigPoly(d={self.d})"


def sin_half_power(n: int) -> CirclePoly:
    """``(z - 1)^n``, whose circle function is ``(sin(theta/2))^n`` up to a constant."""
    from .polycore import unitary_hermite
    return unitary_hermite(n, 0.0)


# ------------------------------------------------------------------ flows

def backward_heat_algebraic(P: RealPoly, s: float) -> RealPoly:
    """``exp(-(s/2) d^2) P`` via ``z^j -> sum_m (-s/2)^m/m! j!/(j-2m)! z^(j-2m)``."""
    s = float(s)
    if s < 0 or not math.isfinite(s):
        raise DomainError("flow time s must be finite and nonnegative")
    if s == 0:
        return P
    n = P.n
    a = P.coeffs
    lf = gammaln(np.arange(n + 1) + 1.0)
    ls = math.log(s / 2)
    sign = np.zeros(n + 1, np.int8)
    ln = np.zeros(n + 1)
    for i in range(n + 1):
        m = np.arange(0, (n - i) // 2 + 1)
        j = i + 2 * m
        sg = a.sign[j] * np.where(m % 2 == 0, 1, -1)
        lt = a.ln[j] + m * ls - lf[m] + lf[j] - lf[i]
        r = logsumexp_signed(sg, lt)
        sign[i], ln[i] = r.sign, (r.ln_mag if r.sign else 0.0)
    pe = P.provider()

    def exact(ctx):
        c = pe(ctx)
        h = -ctx.mpf(s) / 2
        f = [ctx.factorial(k) for k in range(n + 1)]
        hp = [h ** m / f[m] for m in range(n // 2 + 1)]
        out = []
        for i in range(n + 1):
            acc = ctx.fsum(c[i + 2 * m] * f[i + 2 * m] * hp[m] for m in range(0, (n - i) // 2 + 1))
            out.append(acc / f[i])
        return out

    return RealPoly(ScaledArray(sign, ln), exact=exact)


def backward_heat_trig(T: TrigPoly, s: float) -> TrigPoly:
    """``c_l -> c_l exp((s/2) l^2)``."""
    s = float(s)
    if s < 0 or not math.isfinite(s):
        raise DomainError("flow time s must be finite and nonnegative")
    if s == 0:
        return T
    d = T.d
    ell = np.arange(-d, d + 1)
    # normalise by the top weight so large d*s stays in range
    w = np.exp((s / 2) * (ell.astype(float) ** 2 - d * d))
    ex = T._exact

    def exact(ctx):
        c = ex(ctx)
        return [c[k] * ctx.exp(ctx.mpf(s) / 2 * (int(ell[k]) ** 2 - d * d)) for k in range(len(c))]

    return TrigPoly(T.c * w, exact=exact)


def backward_heat_circle(P: CirclePoly, s: float) -> CirclePoly:
    """Trigonometric flow on the circle form ``P(e^{i t}) e^{-i n t/2}``.

    Coefficient ``j`` has frequency ``j - n/2`` (half-integers for odd n) and
    is multiplied by ``exp((s/2)(j - n/2)^2)``; only the products
    ``j(n-j)`` are ever formed, so no half-integer frequency is stored.
    The result is normalised by ``exp(s n^2/8)``.
    """
    s = float(s)
    if s < 0 or not math.isfinite(s):
        raise DomainError("flow time s must be finite and nonnegative")
    if s == 0:
        return P
    n = P.n
    j = np.arange(n + 1)
    dl = -(s / 2) * j * (n - j)
    re = ScaledArray(P.re.sign, np.where(P.re.sign != 0, P.re.ln + dl, 0.0))
    im = ScaledArray(P.im.sign, np.where(P.im.sign != 0, P.im.ln + dl, 0.0))
    pe = P.provider()

    def exact(ctx):
        c = pe(ctx)
        return [c[k] * ctx.exp(-ctx.mpf(s) / 2 * (k * (n - k))) for k in range(n + 1)]

    return CirclePoly(re, im, P.self_inversive, P.lam, exact=exact)


# ------------------------------------------------------------ root finding

def trig_roots(T, prec: EvalPrecision | None = None, grid_multiplier: int = 8) -> EmpiricalCircleMeasure:
    """Zeroes of a real-rooted TrigPoly (or circle-form CirclePoly) in (-pi, pi]."""
    poly = T.to_circle_poly() if isinstance(T, TrigPoly) else T
    return find_roots(poly, prec, grid_multiplier)


def _real_root_bound(P: RealPoly) -> float:
    """Bound on |roots| of a real-rooted polynomial (min of Fujiwara and Laguerre-Samuelson)."""
    n = P.n
    a = P.coeffs
    ln_an = a.ln[n]
    fj = -math.inf
    for k in range(1, n + 1):
        if a.sign[n - k]:
            fj = max(fj, (a.ln[n - k] - ln_an) / k)
    fuj = 2 * math.exp(fj) if fj > -math.inf else 0.0
    if n >= 2:
        c = a.to_floats(ln_an)
        e1 = -c[n - 1]
        e2 = c[n - 2]
        sq = e1 * e1 - 2 * e2
        mu = e1 / n
        var = max(sq / n - mu * mu, 0.0)
        sam = abs(mu) + math.sqrt(n - 1) * math.sqrt(var)
        if math.isfinite(sam):
            fuj = min(fuj, sam)
    return 1.05 * fuj + 1e-12


class _RealEvaluator:
    """Fixed-point Horner at dyadic nodes ``x = X / 2^Q``.

    Coefficients are normalised by the largest one and stored as integers at
    absolute scale ``2^-F``.  Each Horner step truncates once, and coefficients
    are rounded once, so the error is at most ``2 sum_k |x|^k + 1`` units.
    ``F`` grows with the requested digits and with ``n log2 B``.
    Values are reported as ``V * 2^-F`` (times the normalising factor).
    """

    Q = 64

    def __init__(self, P: RealPoly, B: float):
        self.P = P
        self.n = P.n
        self.lgB = max(0.0, math.log2(max(B, 1.0)))
        self.shift = P.coeffs.max_log()
        self._cache = {}

    def _coeffs(self, F):
        hit = self._cache.get(F)
        if hit is None:
            ctx, c = self.P.exact(F + 64)
            sc = ctx.exp(-ctx.mpf(self.shift))
            hit = [int(ctx.nint(ctx.ldexp(v * sc, F))) for v in c]
            self._cache[F] = hit
        return hit

    def eval_fixed(self, xs, digits):
        n, Q = self.n, self.Q
        F = int(math.ceil(digits * math.log2(10) + n * self.lgB)) + 16
        ints = self._coeffs(F)
        xs = np.asarray(xs, dtype=float)
        X = np.array([int(round(x * 2.0 ** 40)) << (Q - 40) for x in xs], dtype=object)
        acc = np.full(len(X), ints[n], dtype=object)
        for j in range(n - 1, -1, -1):
            acc = ((acc * X) >> Q) + ints[j]
        ax = np.abs(xs)
        with np.errstate(over="ignore"):
            geo = np.where(ax == 1, n + 1.0, (ax ** (n + 1) - 1) / np.where(ax == 1, 2, ax - 1))
        bound = [int(2 * g) + 4 if np.isfinite(g) else 1 << (F + 64) for g in geo]
        return acc, bound, F

    def eval_adaptive(self, xs, prec: EvalPrecision, start_digits=None):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        N = len(xs)
        V, Ps, D = [0] * N, [0] * N, [0] * N
        cert = np.zeros(N, dtype=bool)
        if np.ndim(start_digits) == 0:
            starts = np.full(N, start_digits or prec.working_digits)
        else:
            starts = np.asarray(start_digits)
        todo = np.arange(N)
        for digits in prec.ladder(prec.working_digits):
            sel = todo[starts[todo] <= digits]
            if len(sel) == 0:
                continue
            vals, bnd, F = self.eval_fixed(xs[sel], digits)
            keep = set()
            for idx, v, bd in zip(sel, vals, bnd):
                V[idx], Ps[idx], D[idx] = int(v), F, digits
                if abs(v) > bd:
                    cert[idx] = True
                else:
                    keep.add(int(idx))
            todo = np.array(sorted((set(todo.tolist()) - set(sel.tolist())) | keep), dtype=int)
            if len(todo) == 0:
                break
        return V, Ps, D, cert


def real_roots_algebraic(P: RealPoly, prec: EvalPrecision | None = None, grid_multiplier: int = 8,
                         tol: float = 1e-12) -> np.ndarray:
    """All real zeroes of a real-rooted polynomial, sorted, certified by sign-change count."""
    prec = prec or EvalPrecision()
    n = P.n
    if n == 0:
        return np.zeros(0)
    B = _real_root_bound(P)
    ev = _RealEvaluator(P, B)
    mult = int(grid_multiplier)
    digits = prec.working_digits
    while True:
        N = max(16, mult * n)
        # offset grid so that a root at 0 (even/odd inputs) never sits on a node
        h = 2 * B / N
        nodes = -B - h / 2 + (np.arange(N + 2) + 0.5) * h * (1 - 1e-9)
        recs = _scan(ev, nodes, prec, digits)
        br = _brackets(nodes, recs, None)
        if len(br) == n:
            break
        if digits >= prec.max_digits:
            raise CertificationError(f"certified {len(br)} of {n} real roots", found=len(br), expected=n)
        digits = min(prec.max_digits, digits * prec.escalation_factor)
        mult *= 2
    a, b, est, _ = _refine(ev, prec, [x[0] for x in br], [x[1] for x in br],
                           [x[2] for x in br], [x[3] for x in br], tol)
    return np.sort(est)


# ------------------------------------------------------- free cumulants

def _series_coeff_power(mom: list, s: int, k: int) -> float:
    """``[z^k] M(z)^s`` with ``M = 1 + sum m_i z^i`` truncated at degree k."""
    base = [1.0] + list(mom[:k])
    base = base[: k + 1] + [0.0] * max(0, k + 1 - len(base))
    out = [1.0] + [0.0] * k
    for _ in range(s):
        out = [sum(out[i] * base[t - i] for i in range(t + 1)) for t in range(k + 1)]
    return out[k]


def free_cumulants_from_moments(m: Sequence[float]) -> np.ndarray:
    """Free cumulants ``k_1..k_K`` from moments ``m_1..m_K``.

    Uses ``M(z) = 1 + sum_s k_s z^s M(z)^s``, the generating-function form of
    the moment / free-cumulant relation over non-crossing partitions.
    """
    m = [float(x) for x in m]
    K = len(m)
    kappa = []
    for k in range(1, K + 1):
        acc = m[k - 1]
        for s in range(1, k):
            acc -= kappa[s - 1] * _series_coeff_power(m, s, k - s)
        kappa.append(acc)
    return np.array(kappa)


def moments_from_free_cumulants(kappa: Sequence[float]) -> np.ndarray:
    kappa = [float(x) for x in kappa]
    K = len(kappa)
    m: list[float] = []
    for k in range(1, K + 1):
        acc = kappa[k - 1]
        for s in range(1, k):
            acc += kappa[s - 1] * _series_coeff_power(m, s, k - s)
        m.append(acc)
    return np.array(m)


# ------------------------------------------------------------ trajectories

def root_trajectories(poly, s_values: Sequence[float], prec: EvalPrecision | None = None):
    """Roots after flowing ``poly`` (RealPoly, TrigPoly or CirclePoly) by each ``s``.

    Returns an array of shape ``(len(s_values), n)``.
    """
    rows = []
    for s in s_values:
        if isinstance(poly, RealPoly):
            rows.append(real_roots_algebraic(backward_heat_algebraic(poly, s), prec))
        elif isinstance(poly, TrigPoly):
            rows.append(trig_roots(backward_heat_trig(poly, s), prec).angles)
        elif isinstance(poly, CirclePoly):
            flowed = backward_heat_circle(poly, s) if s > 0 else poly
            rows.append(find_roots(flowed, prec).angles)
        else:
            raise DomainError(f"unsupported polynomial type {type(poly).__name__}")
    return np.array(rows)
