"""Certified isolation of the zeroes of self-inversive polynomials on the unit circle.

A self-inversive polynomial ``P`` of degree ``n`` with ``c_j = lam*conj(c_{n-j})``
satisfies ``P(e^{i theta}) e^{-i n theta/2} = mu * r(theta)`` with
``mu**2 = lam`` and ``r`` real.  Its unit-circle zeroes are the sign changes
of ``r``.  ``r`` is evaluated by a Clenshaw recurrence in fixed-point integer
arithmetic at a chosen number of bits, with a rigorous-style error bound, so
a sign is trusted only when ``|r|`` exceeds the bound.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import mpmath
import numpy as np

from .errors import CertificationError, DomainError
from .polycore import CirclePoly, poly_eval_adaptive, unitary_hermite

__all__ = [
    "EvalPrecision",
    "EmpiricalCircleMeasure",
    "CircleEvaluator",
    "circle_function",
    "find_roots",
    "hermite_roots",
    "empirical_moment",
    "newton_girard_reference",
    "psi_empirical",
    "kolmogorov_distance",
]

_LOG2_10 = math.log2(10)


@dataclass(frozen=True)
class EvalPrecision:
    working_digits: int = 32
    escalation_factor: int = 2
    max_digits: int = 256

    def __post_init__(self):
        if self.working_digits < 16:
            raise DomainError("working_digits must be at least 16")
        if self.escalation_factor < 2:
            raise DomainError("escalation_factor must be at least 2")
        if self.max_digits < self.working_digits:
            raise DomainError("max_digits must be >= working_digits")

    def ladder(self, start: Optional[int] = None) -> list[int]:
        d = self.working_digits if start is None else start
        out = []
        while d < self.max_digits:
            out.append(d)
            d *= self.escalation_factor
        out.append(self.max_digits)
        return out


@dataclass(frozen=True)
class EmpiricalCircleMeasure:
    angles: np.ndarray
    enclosure_width: float
    brackets: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    max_digits_used: int = 0

    @property
    def n(self) -> int:
        return len(self.angles)

    def __len__(self):
        return len(self.angles)


class CircleEvaluator:
    """Fixed-point Clenshaw evaluation of the real circle function ``r(theta)``."""

    def __init__(self, p: CirclePoly):
        if not p.self_inversive:
            raise DomainError("circle function needs a self-inversive polynomial")
        self.p = p
        self.n = n = p.n
        self.eps = n % 2
        # frequencies in phi = theta/2 are 2m + eps, m = 0..K
        self.K = (n - self.eps) // 2
        self.j0 = (n + self.eps) // 2  # coefficient index of frequency eps
        mu = cmath.sqrt(p.lam)
        self.mu = complex(round(mu.real, 15), round(mu.imag, 15)) if abs(abs(mu) - 1) < 1e-15 else mu
        self.shift = p.max_log() + math.log(4.0)
        self.guard = int(math.ceil(4 * math.log2(self.K + 2))) + 8
        self.bound_units = 16 * (self.K + 2) ** 4
        self._coeff_cache: dict[int, tuple] = {}

    def bits_for(self, digits: int) -> int:
        return int(math.ceil(digits * _LOG2_10)) + self.guard

    def _coeffs(self, P: int):
        hit = self._coeff_cache.get(P)
        if hit is not None:
            return hit
        ctx, c = self.p.exact(P + 64)
        mubar = ctx.mpc(self.mu.real, -self.mu.imag)
        if self.eps == 0 and abs(self.mu - 1) == 0:
            mubar = ctx.mpc(1)
        scale = ctx.exp(-ctx.mpf(self.shift))
        one = ctx.ldexp(ctx.one, P)
        alpha, beta = [], []
        for m in range(self.K + 1):
            d = mubar * c[self.j0 + m] * scale
            w = 1 if (self.eps == 0 and m == 0) else 2
            alpha.append(int(ctx.nint(w * ctx.re(d) * one)))
            beta.append(int(ctx.nint(-w * ctx.im(d) * one)))
        if self.eps == 0:
            beta[0] = 0
        hit = (alpha, beta, any(beta), any(alpha))
        self._coeff_cache[P] = hit
        return hit

    def _trig(self, thetas, P: int):
        """Fixed-point ``cos(phi), sin(phi)`` at ``phi = theta/2`` (exact double input)."""
        ctx = mpmath.MPContext()
        ctx.prec = P + 32
        C, S = [], []
        for th in thetas:
            c, s = ctx.cos_sin(ctx.mpf(float(th)) / 2)
            C.append(int(ctx.nint(ctx.ldexp(c, P))))
            S.append(int(ctx.nint(ctx.ldexp(s, P))))
        return np.array(C, dtype=object), np.array(S, dtype=object)

    def eval_fixed(self, thetas, digits: int):
        """Integer values ``V`` with ``r(theta) ~ V * 2^-P * e^shift`` and the common ``P``."""
        P = self.bits_for(digits)
        alpha, beta, has_b, has_a = self._coeffs(P)
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        C, S = self._trig(thetas, P)
        one = 1 << P
        X = ((2 * C * C) >> P) - one  # cos(theta)
        X2 = 2 * X
        if self.eps == 0:
            F0, F1 = np.full(len(thetas), one, dtype=object), X
            G0, G1 = np.zeros(len(thetas), dtype=object), (2 * S * C) >> P
        else:
            C2 = (C * C) >> P
            S2 = (S * S) >> P
            F0, G0 = C, S
            F1 = (C * (4 * C2 - 3 * one)) >> P
            G1 = (S * (3 * one - 4 * S2)) >> P
        total = np.zeros(len(thetas), dtype=object)
        for coefs, A0, A1, use in ((alpha, F0, F1, has_a), (beta, G0, G1, has_b)):
            if not use:
                continue
            b1 = np.zeros(len(thetas), dtype=object)
            b2 = np.zeros(len(thetas), dtype=object)
            for k in range(self.K, 0, -1):
                b1, b2 = coefs[k] + ((X2 * b1) >> P) - b2, b1
            # S = a0 F0 + b1 F1 - b2 F0
            total = total + ((coefs[0] * A0 + b1 * A1 - b2 * A0) >> P)
        return total, P

    def eval_adaptive(self, thetas, prec: EvalPrecision, start_digits: Optional[int] = None):
        """Escalate precision per node until the sign is certified.

        Returns ``(V list, P list, digits list, certified mask)``.
        """
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        N = len(thetas)
        V = [0] * N
        Ps = [0] * N
        D = [0] * N
        cert = np.zeros(N, dtype=bool)
        todo = np.arange(N)
        if np.ndim(start_digits) == 0:
            starts = np.full(N, start_digits or prec.working_digits)
        else:
            starts = np.asarray(start_digits)
        for digits in prec.ladder(prec.working_digits):
            sel = todo[starts[todo] <= digits]
            if len(sel) == 0:
                continue
            vals, P = self.eval_fixed(thetas[sel], digits)
            keep = []
            for idx, v in zip(sel, vals):
                V[idx], Ps[idx], D[idx] = int(v), P, digits
                if abs(v) > self.bound_units:
                    cert[idx] = True
                else:
                    keep.append(idx)
            todo = np.array(sorted(set(todo) - set(sel) | set(keep)), dtype=int)
            if len(todo) == 0:
                break
        return V, Ps, D, cert


def circle_function(p: CirclePoly, theta, prec: EvalPrecision | None = None):
    """Real circle function ``r(theta)`` and an absolute error bound.

    ``P(e^{i theta}) e^{-i n theta/2} = mu * r(theta)`` with ``mu = sqrt(lam)``
    (``mu = i**(n % 2)`` for ``H_n``).  Values are returned as doubles, so
    they may underflow to 0 or overflow to inf for very high degrees.
    """
    prec = prec or EvalPrecision()
    ev = CircleEvaluator(p)
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    V, Ps, _, _ = ev.eval_adaptive(th, prec)
    vals, errs = [], []
    for v, P in zip(V, Ps):
        vals.append(_to_float(v, P, ev.shift))
        errs.append(_to_float(ev.bound_units, P, ev.shift))
    if np.ndim(theta) == 0:
        return vals[0], errs[0]
    return np.array(vals), np.array(errs)


def _to_float(v: int, P: int, shift: float) -> float:
    if v == 0:
        return 0.0
    lg = math.log(abs(v)) - P * math.log(2) + shift
    if lg > 709.7:
        return math.copysign(math.inf, v)
    if lg < -745:
        return math.copysign(0.0, v)
    return math.copysign(math.exp(lg), v)


def _sgn(v: int, certified: bool) -> int:
    if not certified:
        return 0
    return (v > 0) - (v < 0)


def _ratio(va: int, pa: int, vb: int, pb: int) -> float:
    """``va / (va - vb)`` after aligning the two fixed-point scales."""
    if pa < pb:
        va <<= pb - pa
    elif pb < pa:
        vb <<= pa - pb
    den = va - vb
    return va / den if den else 0.5


def _refine(ev: CircleEvaluator, prec: EvalPrecision, a, b, fa, fb, tol: float):
    """Vectorised Illinois / bisection on certified brackets ``[a, b]``.

    ``fa``/``fb`` are ``(V, P, digits, sign)`` tuples.  Returns the final
    bracket arrays, the interpolated root estimates and the digits used.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    fa, fb = list(fa), list(fb)
    side = np.zeros(len(a), dtype=int)  # Illinois bookkeeping
    maxd = 0
    active = np.nonzero(b - a > tol)[0]
    it = 0
    while len(active) and it < 200:
        it += 1
        cs = []
        for k in active:
            w = b[k] - a[k]
            (va, pa, _, _), (vb, pb, _, _) = fa[k], fb[k]
            if it % 5 == 0:
                lam = 0.5  # periodic bisection keeps the worst case linear
            else:
                lam = min(max(_ratio(va, pa, vb, pb), 1e-4), 1 - 1e-4)
            c = a[k] + lam * w
            if not a[k] < c < b[k]:
                c = 0.5 * (a[k] + b[k])
            cs.append(c)
        starts = [max(fa[k][2], fb[k][2]) for k in active]
        V, Ps, D, cert = ev.eval_adaptive(np.array(cs), prec, start_digits=np.array(starts))
        nxt = []
        for i, k in enumerate(active):
            maxd = max(maxd, D[i])
            s = _sgn(V[i], cert[i])
            rec = (V[i], Ps[i], D[i], s)
            if s == 0:
                # value below the error bound at max precision: the root is pinned here
                a[k] = b[k] = cs[i]
                continue
            if s == fa[k][3]:
                a[k], fa[k] = cs[i], rec
                if side[k] == -1:
                    fb[k] = (fb[k][0], fb[k][1] + 1, fb[k][2], fb[k][3])  # halve fb (Illinois)
                side[k] = -1
            else:
                b[k], fb[k] = cs[i], rec
                if side[k] == 1:
                    fa[k] = (fa[k][0], fa[k][1] + 1, fa[k][2], fa[k][3])
                side[k] = 1
            if b[k] - a[k] > tol:
                nxt.append(k)
        active = np.array(nxt, dtype=int)
    est = np.empty(len(a))
    for k in range(len(a)):
        if b[k] == a[k]:
            est[k] = a[k]
            continue
        (va, pa, _, _), (vb, pb, _, _) = fa[k], fb[k]
        lam = min(max(_ratio(va, pa, vb, pb), 0.0), 1.0)
        est[k] = a[k] + lam * (b[k] - a[k])
    return a, b, est, maxd


def _scan(ev: CircleEvaluator, nodes, prec: EvalPrecision, digits: int):
    V, Ps, D, cert = ev.eval_adaptive(nodes, prec, start_digits=digits)
    recs = [(V[i], Ps[i], D[i], _sgn(V[i], cert[i])) for i in range(len(nodes))]
    return recs


def _brackets(nodes, recs, wrap_sign: Optional[int]):
    """Sign changes between consecutive certified nodes (optionally across the wrap)."""
    idx = [i for i, r in enumerate(recs) if r[3] != 0]
    out = []
    for i, j in zip(idx[:-1], idx[1:]):
        if recs[i][3] != recs[j][3]:
            out.append((nodes[i], nodes[j], recs[i], recs[j]))
    if wrap_sign is not None and idx:
        i, j = idx[-1], idx[0]
        rj = recs[j]
        rj2 = (rj[0] * wrap_sign, rj[1], rj[2], rj[3] * wrap_sign)
        if recs[i][3] != rj2[3]:
            out.append((nodes[i], nodes[j] + 2 * np.pi, recs[i], rj2))
    return out


def find_roots(p: CirclePoly, prec: EvalPrecision | None = None, grid_multiplier: int = 8,
               tol: float = 1e-12) -> EmpiricalCircleMeasure:
    """All ``n`` zeroes of a self-inversive polynomial that lie on the unit circle.

    Raises :class:`CertificationError` if exactly ``n`` sign changes cannot
    be certified before the precision ceiling is reached.
    """
    prec = prec or EvalPrecision()
    if not p.self_inversive:
        raise DomainError("find_roots needs a self-inversive polynomial")
    n = p.n
    if p.root_hint is not None:
        angles = np.sort(np.concatenate([np.full(int(m), float(a)) for a, m in p.root_hint]))
        if len(angles) != n:
            raise CertificationError("root hint multiplicities do not sum to the degree",
                                     found=len(angles), expected=n)
        width = float(angles.max() - angles.min()) if len(set(angles.tolist())) > 1 else 0.0
        return EmpiricalCircleMeasure(angles, width, None, 0)
    ev = CircleEvaluator(p)
    symmetric = p.is_real() and p.lam in (1, -1)
    odd_r = symmetric and abs(ev.mu - 1j) < 1e-15
    forced0 = 1 if odd_r else 0
    forced_pi = 1 if symmetric and (odd_r != bool(n % 2)) else 0

    digits = prec.working_digits
    mult = int(grid_multiplier)
    found = 0
    while True:
        if symmetric:
            N = max(4, mult * n // 2)
            h = np.pi / N
            nodes = (np.arange(N) + 0.5) * h
            recs = _scan(ev, nodes, prec, digits)
            br = _brackets(nodes, recs, None)
            found = 2 * len(br) + forced0 + forced_pi
        else:
            N = max(8, mult * n)
            h = 2 * np.pi / N
            nodes = -np.pi + (np.arange(N) + 0.5) * h
            recs = _scan(ev, nodes, prec, digits)
            br = _brackets(nodes, recs, (-1) ** n)
            found = len(br)
        if found == n:
            break
        if digits >= prec.max_digits:
            raise CertificationError(
                f"certified {found} of {n} roots at {digits} digits", found=found, expected=n)
        digits = min(prec.max_digits, digits * prec.escalation_factor)
        mult *= 2

    if br:
        a, b, est, maxd = _refine(ev, prec, [x[0] for x in br], [x[1] for x in br],
                                  [x[2] for x in br], [x[3] for x in br], tol)
    else:
        a = b = est = np.zeros(0)
        maxd = digits
    width = float(np.max(b - a)) if len(a) else 0.0
    if symmetric:
        roots = np.concatenate([est, -est, np.zeros(forced0), np.full(forced_pi, np.pi)])
        brackets = np.concatenate([np.stack([a, b], 1), np.stack([-b, -a], 1)]) if len(a) else np.zeros((0, 2))
    else:
        roots = np.where(est > np.pi, est - 2 * np.pi, est)
        brackets = np.stack([a, b], 1)
    order = np.argsort(roots)
    return EmpiricalCircleMeasure(roots[order], width, brackets, max(maxd, digits))


def hermite_roots(n: int, sigma2: float, prec: EvalPrecision | None = None,
                  grid_multiplier: int = 8) -> EmpiricalCircleMeasure:
    """Zeroes of ``H_n(z; sigma2/n)``."""
    return find_roots(unitary_hermite(n, sigma2 / n), prec, grid_multiplier)


def empirical_moment(m, k: int) -> complex:
    angles = m.angles if isinstance(m, EmpiricalCircleMeasure) else np.asarray(m, dtype=float)
    return complex(np.mean(np.exp(1j * k * angles)))


def newton_girard_reference(n: int, sigma2: float, K: int) -> np.ndarray:
    """Normalised power sums ``p_{k:n}``, k = 1..K, of the zeroes of ``H_n(z; sigma2/n)``.

    Uses ``e_k = C(n,k) exp(-sigma2 k(n-k)/(2n))`` and the Newton-Girard
    recursion.  The recursion cancels roughly ``n**k`` in relative size, so it
    runs in mpmath at a matching precision.
    """
    n, K = int(n), int(K)
    if K > n or K < 0:
        raise DomainError("need 0 <= K <= n")
    ctx = mpmath.MPContext()
    ctx.dps = 40 + int(2 * K * math.log10(max(n, 2)))
    s = ctx.mpf(float(sigma2))
    e = [ctx.mpf(math.comb(n, k)) * ctx.exp(-s * k * (n - k) / (2 * n)) for k in range(K + 1)]
    pw = [ctx.zero] * (K + 1)
    for k in range(1, K + 1):
        acc = (-1) ** (k - 1) * k * e[k]
        for i in range(1, k):
            acc += (-1) ** (k - 1 + i) * e[k - i] * pw[i]
        pw[k] = acc
    return np.array([float(pw[k] / n) for k in range(1, K + 1)])


def psi_empirical(p: CirclePoly, z: complex) -> complex:
    """``-(z/n) P'(z)/P(z)`` for ``|z| < 1``."""
    z = complex(z)
    if abs(z) >= 1:
        raise DomainError("psi_empirical needs |z| < 1")
    if z == 0:
        return 0j
    ctx, v, dv = poly_eval_adaptive(p, z, derivative=True)
    return complex(-ctx.mpc(z) / p.n * dv / v)


def kolmogorov_distance(m, cdf: Callable) -> float:
    """Sup distance between the empirical CDF of the angles and ``cdf``."""
    angles = np.sort(m.angles if isinstance(m, EmpiricalCircleMeasure) else np.asarray(m, dtype=float))
    n = len(angles)
    try:
        F = np.asarray(cdf(angles), dtype=float)
        if F.shape != angles.shape:
            raise TypeError
    except (TypeError, ValueError):
        F = np.array([float(cdf(x)) for x in angles])
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
