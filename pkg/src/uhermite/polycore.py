"""Polynomial families and finite free convolutions.

Coefficients live in the log domain (:class:`ScaledArray`).  Every
polynomial also carries an *exact provider*: a function that rebuilds the
coefficients in an mpmath context at any requested precision.  Root
isolation on the unit circle needs far more than double precision because
the circle values cancel catastrophically, so the provider is threaded
through every constructor and convolution.
"""

from __future__ import annotations

import json
import math
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np
from scipy.special import gammaln

from .errors import DomainError
from .scaledarith import (
    ScaledArray,
    SignedScaled,
    log_binomial_array,
    logsumexp_signed,
)

__all__ = [
    "CirclePoly",
    "RealPoly",
    "unitary_hermite",
    "classical_hermite",
    "finite_free_add",
    "finite_free_mult",
    "demoivre_laplace_product",
    "poly_eval",
    "poly_eval_mp",
    "poly_eval_adaptive",
    "poly_derivative",
    "new_context",
]

Provider = Callable[[object], list]


def new_context(dps: int = 50):
    """A private mpmath context, so concurrent callers never share state."""
    ctx = mpmath.MPContext()
    ctx.dps = int(dps)
    return ctx


def _ss_from_mp(ctx, x) -> tuple[int, float]:
    if x == 0:
        return 0, 0.0
    return (1 if x > 0 else -1), float(ctx.log(abs(x)))


def _scaled_from_mp_real(ctx, values) -> ScaledArray:
    pairs = [_ss_from_mp(ctx, v) for v in values]
    return ScaledArray([p[0] for p in pairs], [p[1] for p in pairs])


class _ExactCache:
    """Memoizes provider output per precision (bits)."""

    def __init__(self, provider: Provider):
        self.provider = provider
        self._cache: dict[int, list] = {}

    def __call__(self, prec: int):
        prec = int(prec)
        hit = self._cache.get(prec)
        if hit is None:
            ctx = mpmath.MPContext()
            ctx.prec = prec
            hit = (ctx, self.provider(ctx))
            self._cache[prec] = hit
        return hit


class RealPoly:
    """Real polynomial ``sum a_j z^j`` with log-domain coefficients."""

    def __init__(self, coeffs: ScaledArray, exact: Optional[Provider] = None,
                 root_hint=None):
        if len(coeffs) == 0:
            raise DomainError("polynomial needs at least one coefficient")
        n = len(coeffs) - 1
        if coeffs.sign[n] == 0:
            raise DomainError("leading coefficient must be nonzero")
        self.n = n
        self.coeffs = coeffs
        if exact is None:
            sign, ln = coeffs.sign.copy(), coeffs.ln.copy()

            def exact(ctx):
                return [ctx.mpf(int(s)) * ctx.exp(ctx.mpf(float(l))) for s, l in zip(sign, ln)]
        self._exact = _ExactCache(exact)
        self.root_hint = root_hint

    @property
    def degree(self) -> int:
        return self.n

    @classmethod
    def from_floats(cls, values: Sequence[float]) -> "RealPoly":
        vals = [float(v) for v in values]
        return cls(ScaledArray.from_floats(vals), exact=lambda ctx: [ctx.mpf(v) for v in vals])

    @classmethod
    def from_mp(cls, build: Provider, dps: int = 60) -> "RealPoly":
        ctx = new_context(dps)
        return cls(_scaled_from_mp_real(ctx, build(ctx)), exact=build)

    def exact(self, prec: int):
        """``(ctx, [mpf, ...])`` with coefficients at ``prec`` bits."""
        return self._exact(prec)

    def provider(self) -> Provider:
        return self._exact.provider

    def to_floats(self) -> np.ndarray:
        return self.coeffs.to_floats()

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.to_floats())

    def __repr__(self):
        return f"RealPoly(n={self.n})"


class CirclePoly:
    """Complex polynomial ``sum c_j z^j`` aimed at the unit circle.

    ``lam`` is the unimodular constant with ``c_j = lam * conj(c_{n-j})``
    when ``self_inversive`` is set; for ``H_n`` it is ``(-1)**n``.
    """

    def __init__(self, re: ScaledArray, im: ScaledArray, self_inversive: bool = False,
                 lam: Optional[complex] = None, exact: Optional[Provider] = None,
                 root_hint=None):
        if len(re) != len(im) or len(re) == 0:
            raise DomainError("re and im must have the same nonzero length")
        n = len(re) - 1
        if re.sign[n] == 0 and im.sign[n] == 0:
            raise DomainError("leading coefficient must be nonzero")
        self.n = n
        self.re = re
        self.im = im
        if self_inversive and lam is None:
            lam = _detect_lambda(re, im)
            if lam is None:
                raise DomainError("coefficients are not self-inversive")
        self.self_inversive = bool(self_inversive)
        self.lam = complex(lam) if self_inversive else None
        if exact is None:
            rs, rl, is_, il = re.sign.copy(), re.ln.copy(), im.sign.copy(), im.ln.copy()

            def exact(ctx):
                return [
                    ctx.mpc(int(a) * ctx.exp(ctx.mpf(float(b))), int(c) * ctx.exp(ctx.mpf(float(d))))
                    for a, b, c, d in zip(rs, rl, is_, il)
                ]
        self._exact = _ExactCache(exact)
        self.root_hint = root_hint

    @classmethod
    def from_complex(cls, values: Sequence[complex], self_inversive: Optional[bool] = None,
                     root_hint=None) -> "CirclePoly":
        vals = [complex(v) for v in values]
        re = ScaledArray.from_floats([v.real for v in vals])
        im = ScaledArray.from_floats([v.imag for v in vals])
        lam = _detect_lambda(re, im)
        if self_inversive is None:
            self_inversive = lam is not None
        elif self_inversive and lam is None:
            raise DomainError("coefficients are not self-inversive")
        return cls(re, im, self_inversive, lam,
                   exact=lambda ctx: [ctx.mpc(v.real, v.imag) for v in vals],
                   root_hint=root_hint)

    @classmethod
    def from_mp(cls, build: Provider, self_inversive: bool = False, lam=None,
                dps: int = 60, root_hint=None) -> "CirclePoly":
        ctx = new_context(dps)
        vals = build(ctx)
        re = _scaled_from_mp_real(ctx, [ctx.re(v) for v in vals])
        im = _scaled_from_mp_real(ctx, [ctx.im(v) for v in vals])
        if self_inversive and lam is None:
            lam = _detect_lambda(re, im)
            if lam is None:
                raise DomainError("coefficients are not self-inversive")
        return cls(re, im, self_inversive, lam, exact=build, root_hint=root_hint)

    @property
    def degree(self) -> int:
        return self.n

    @property
    def coeffs(self) -> list[tuple[SignedScaled, SignedScaled]]:
        return list(zip(self.re, self.im))

    def exact(self, prec: int):
        """``(ctx, [mpc, ...])`` with coefficients at ``prec`` bits."""
        return self._exact(prec)

    def provider(self) -> Provider:
        return self._exact.provider

    def max_log(self) -> float:
        return max(self.re.max_log(), self.im.max_log())

    def is_real(self) -> bool:
        return not np.any(self.im.sign)

    def to_complex(self, shift: float = 0.0) -> np.ndarray:
        """Coefficients times ``exp(-shift)`` as complex doubles."""
        return self.re.to_floats(shift) + 1j * self.im.to_floats(shift)

    def to_json(self) -> str:
        rows = [
            [int(self.re.sign[j]), float(self.re.ln[j]), int(self.im.sign[j]), float(self.im.ln[j])]
            for j in range(self.n + 1)
        ]
        return json.dumps({"n": self.n, "coeffs": rows, "self_inversive": self.self_inversive})

    @classmethod
    def from_json(cls, text: str) -> "CirclePoly":
        d = json.loads(text) if isinstance(text, str) else text
        rows = d["coeffs"]
        if len(rows) != int(d["n"]) + 1:
            raise DomainError("coefficient count does not match n")
        re = ScaledArray([r[0] for r in rows], [r[1] for r in rows])
        im = ScaledArray([r[2] for r in rows], [r[3] for r in rows])
        return cls(re, im, bool(d.get("self_inversive", False)))

    def __repr__(self):
        return f"CirclePoly(n={self.n}, self_inversive={self.self_inversive})"


def _detect_lambda(re: ScaledArray, im: ScaledArray, rtol: float = 1e-12) -> Optional[complex]:
    n = len(re) - 1
    shift = max(re.max_log(), im.max_log())
    c = re.to_floats(shift) + 1j * im.to_floats(shift)
    if c[0] == 0 or abs(abs(c[n]) - abs(c[0])) > rtol * abs(c[n]):
        return None
    lam = c[n] / np.conj(c[0])
    lam /= abs(lam)
    if np.max(np.abs(c - lam * np.conj(c[::-1]))) > rtol * np.max(np.abs(c)):
        return None
    # snap to an exact value when it is one of +-1, +-i
    for cand in (1, -1, 1j, -1j):
        if abs(lam - cand) < 1e-14:
            return complex(cand)
    return complex(lam)


# ---------------------------------------------------------------- families

def unitary_hermite(n: int, s2: float) -> CirclePoly:
    """Monic ``H_n(z; s2)`` with coefficients ``(-1)^(n-j) C(n,j) e^{-s2 j(n-j)/2}``."""
    n = int(n)
    s2 = float(s2)
    if n < 1:
        raise DomainError("degree must be at least 1")
    if s2 < 0 or not math.isfinite(s2):
        raise DomainError("s2 must be a finite nonnegative number")
    j = np.arange(n + 1)
    ln = log_binomial_array(n) - s2 * (j * (n - j)) / 2.0
    sign = np.where((n - j) % 2 == 0, 1, -1)
    re = ScaledArray(sign, ln)
    im = ScaledArray.zeros(n + 1)

    def exact(ctx):
        s = ctx.mpf(s2)
        out = []
        for k in range(n + 1):
            v = ctx.mpf(math.comb(n, k)) * ctx.exp(-s * (k * (n - k)) / 2)
            out.append(ctx.mpc(v if (n - k) % 2 == 0 else -v, 0))
        return out

    hint = ((0.0, n),) if s2 == 0.0 else None
    return CirclePoly(re, im, True, (-1) ** n, exact=exact, root_hint=hint)


def classical_hermite(n: int) -> RealPoly:
    """Probabilists' Hermite polynomial ``He_n``."""
    n = int(n)
    if n < 0:
        raise DomainError("degree must be nonnegative")
    ints = [0] * (n + 1)
    for m in range(n // 2 + 1):
        ints[n - 2 * m] = (-1) ** m * math.factorial(n) // (
            math.factorial(m) * 2 ** m * math.factorial(n - 2 * m))
    sign = [(v > 0) - (v < 0) for v in ints]
    ln = [math.log(abs(v)) if v else 0.0 for v in ints]
    return RealPoly(ScaledArray(sign, ln), exact=lambda ctx: [ctx.mpf(v) for v in ints])


# ----------------------------------------------------------- convolutions

def _as_len(arr: ScaledArray, size: int) -> ScaledArray:
    if len(arr) > size:
        if np.any(arr.sign[size:]):
            raise DomainError("polynomial degree exceeds n")
        return ScaledArray(arr.sign[:size], arr.ln[:size])
    pad = size - len(arr)
    return ScaledArray(np.concatenate([arr.sign, np.zeros(pad, np.int8)]),
                       np.concatenate([arr.ln, np.zeros(pad)]))


def _pad_exact(vals, size, zero):
    if len(vals) > size:
        return list(vals[:size])
    return list(vals) + [zero] * (size - len(vals))


def finite_free_add(p: RealPoly, q: RealPoly, n: int) -> RealPoly:
    """Finite free additive convolution ``p ⊞_n q``."""
    n = int(n)
    if p.n > n or q.n > n:
        raise DomainError(f"degrees {p.n}, {q.n} exceed n={n}")
    a = _as_len(p.coeffs, n + 1)
    b = _as_len(q.coeffs, n + 1)
    lf = gammaln(np.arange(n + 1) + 1.0)
    sign = np.zeros(n + 1, np.int8)
    ln = np.zeros(n + 1)
    for ell in range(n + 1):
        i = np.arange(ell, n + 1)
        j = n + ell - i
        s = a.sign[i] * b.sign[j]
        lt = a.ln[i] + b.ln[j] + lf[i] + lf[j] - lf[n] - lf[ell]
        r = logsumexp_signed(s, lt)
        sign[ell], ln[ell] = r.sign, (r.ln_mag if r.sign else 0.0)
    top = int(np.max(np.nonzero(sign)[0])) if sign.any() else 0
    pe, qe = p.provider(), q.provider()

    def exact(ctx):
        av = _pad_exact(pe(ctx), n + 1, ctx.zero)
        bv = _pad_exact(qe(ctx), n + 1, ctx.zero)
        f = [ctx.factorial(k) for k in range(n + 1)]
        out = []
        for ell in range(top + 1):
            acc = ctx.fsum(av[i] * bv[n + ell - i] * f[i] * f[n + ell - i] for i in range(ell, n + 1))
            out.append(acc / (f[n] * f[ell]))
        return out

    return RealPoly(ScaledArray(sign[: top + 1], ln[: top + 1]), exact=exact)


def _mult_core(re1, im1, re2, im2, n):
    """Complex coefficientwise product divided by ``(-1)^(n-j) C(n,j)``."""
    j = np.arange(n + 1)
    lb = log_binomial_array(n)
    flip = np.where((n - j) % 2 == 0, 1, -1)
    out = []
    for (ra, rb), sgn in (((re1, re2), 1), ((im1, im2), -1), ((re1, im2), 1), ((im1, re2), 1)):
        out.append((ra.sign * rb.sign * flip, ra.ln + rb.ln - lb, sgn))
    re_parts, im_parts = out[:2], out[2:]

    def combine(parts):
        sign = np.zeros(n + 1, np.int8)
        ln = np.zeros(n + 1)
        for k in range(n + 1):
            ss = [p[0][k] * p[2] for p in parts]
            ll = [p[1][k] for p in parts]
            r = logsumexp_signed(np.array(ss), np.array(ll))
            sign[k], ln[k] = r.sign, (r.ln_mag if r.sign else 0.0)
        return ScaledArray(sign, ln)

    if not (np.any(im1.sign) or np.any(im2.sign)):
        s = re1.sign * re2.sign * flip
        return ScaledArray(s, np.where(s != 0, re1.ln + re2.ln - lb, 0.0)), ScaledArray.zeros(n + 1)
    return combine(re_parts), combine(im_parts)


def finite_free_mult(p: CirclePoly, q: CirclePoly, n: Optional[int] = None) -> CirclePoly:
    """Finite free multiplicative convolution ``p ⊠_n q``."""
    if n is None:
        n = max(p.n, q.n)
    n = int(n)
    if p.n > n or q.n > n:
        raise DomainError(f"degrees {p.n}, {q.n} exceed n={n}")
    re1, im1 = _as_len(p.re, n + 1), _as_len(p.im, n + 1)
    re2, im2 = _as_len(q.re, n + 1), _as_len(q.im, n + 1)
    re, im = _mult_core(re1, im1, re2, im2, n)
    pe, qe = p.provider(), q.provider()

    def exact(ctx):
        av = _pad_exact(pe(ctx), n + 1, ctx.mpc(0))
        bv = _pad_exact(qe(ctx), n + 1, ctx.mpc(0))
        return [
            (1 if (n - k) % 2 == 0 else -1) * av[k] * bv[k] / math.comb(n, k)
            for k in range(n + 1)
        ]

    si = p.self_inversive and q.self_inversive and p.n == n and q.n == n
    lam = None
    if si:
        # c_j = l1 l2 conj(c_{n-j}) since C(n,j) and (-1)^(n-j)(-1)^j = (-1)^n are symmetric up to sign
        lam = p.lam * q.lam * (-1) ** n
    hint = None
    for a, b in ((p, q), (q, p)):
        if a.root_hint == ((0.0, n),):
            hint = b.root_hint
    return CirclePoly(re, im, si, lam, exact=exact, root_hint=hint)


def demoivre_laplace_product(d: int, sigma: float, N: int, method: str = "power") -> CirclePoly:
    """``N``-fold ``⊠_{2d}`` power of ``(z^2 - 2 z cos(sigma/sqrt N) + 1)^d``.

    ``method="power"`` raises the per-factor multiplier to the ``N``-th power
    coefficientwise; ``method="repeat"`` performs ``N-1`` convolutions.
    """
    d, N = int(d), int(N)
    if d < 1 or N < 1:
        raise DomainError("d and N must be positive")
    n = 2 * d
    sigma = float(sigma)

    def q_exact(ctx):
        c = ctx.cos(ctx.mpf(sigma) / ctx.sqrt(N))
        base = [ctx.one, -2 * c, ctx.one]
        out = [ctx.one]
        for _ in range(d):
            nxt = [ctx.zero] * (len(out) + 2)
            for i, u in enumerate(out):
                for k, v in enumerate(base):
                    nxt[i + k] += u * v
            out = nxt
        return [ctx.mpc(v) for v in out]

    Q = CirclePoly.from_mp(q_exact, self_inversive=True, lam=1.0)
    if method == "repeat":
        acc = Q
        for _ in range(N - 1):
            acc = finite_free_mult(acc, Q, n)
        return acc
    if method != "power":
        raise DomainError(f"unknown method {method!r}")
    j = np.arange(n + 1)
    lb = log_binomial_array(n)
    # Q has coefficients (-1)^(n-j) * positive, so the multiplier is positive
    lu = Q.re.ln - lb
    re = ScaledArray(np.where((n - j) % 2 == 0, 1, -1), lb + N * lu)

    def exact(ctx):
        qv = q_exact(ctx)
        out = []
        for k in range(n + 1):
            sgn = 1 if (n - k) % 2 == 0 else -1
            u = sgn * ctx.re(qv[k]) / math.comb(n, k)
            out.append(ctx.mpc(sgn * math.comb(n, k) * u ** N))
        return out

    return CirclePoly(re, ScaledArray.zeros(n + 1), True, 1.0, exact=exact)


# --------------------------------------------------------------- evaluation

def poly_eval(p, z):
    """Evaluate a CirclePoly or RealPoly at ``z`` (Horner after max-log prescaling)."""
    if isinstance(p, RealPoly):
        shift = p.coeffs.max_log()
        c = p.coeffs.to_floats(shift).astype(complex)
    else:
        shift = p.max_log()
        c = p.to_complex(shift)
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for cj in c[::-1]:
        acc = acc * z + cj
    with np.errstate(over="ignore"):
        out = acc * math.exp(shift) if shift < 700 else acc * np.exp(shift)
    return out if out.ndim else complex(out)


def poly_eval_mp(p, z, dps: int = 50):
    """High-precision evaluation from the exact provider; returns ``(ctx, mpc)``."""
    prec = int(dps * 3.33) + 16
    ctx, c = p.exact(prec)
    zz = ctx.mpc(complex(z)) if not isinstance(z, (ctx.mpc, ctx.mpf)) else z
    acc = ctx.mpc(0)
    for cj in reversed(c):
        acc = acc * zz + cj
    return ctx, acc


def poly_derivative(p):
    """Derivative by coefficient shift, ``sum j c_j z^(j-1)``."""
    n = p.n
    if n == 0:
        raise DomainError("derivative of a constant polynomial has no leading term")
    lj = np.log(np.arange(1, n + 1))
    pe = p.provider()

    def exact(ctx):
        c = pe(ctx)
        return [k * c[k] for k in range(1, n + 1)]

    if isinstance(p, RealPoly):
        a = p.coeffs
        return RealPoly(ScaledArray(a.sign[1:], a.ln[1:] + lj), exact=exact)
    re = ScaledArray(p.re.sign[1:], p.re.ln[1:] + lj)
    im = ScaledArray(p.im.sign[1:], p.im.ln[1:] + lj)
    return CirclePoly(re, im, False, exact=exact)


def poly_eval_adaptive(p, z, derivative: bool = False, rel_digits: int = 20, max_dps: int = 4000):
    """Evaluate from the exact provider with enough digits to beat cancellation.

    Returns ``(ctx, value)`` or ``(ctx, value, derivative)``.  The working
    precision is raised until the result keeps ``rel_digits`` significant
    digits beyond the size of the largest Horner term.
    """
    dps = 40
    while True:
        ctx, c = p.exact(int(dps * 3.33) + 16)
        zz = ctx.mpc(complex(z))
        az = abs(zz)
        acc = ctx.mpc(0)
        dacc = ctx.mpc(0)
        big = ctx.zero
        for cj in reversed(c):
            dacc = dacc * zz + acc
            acc = acc * zz + cj
            big = big * az + abs(cj)
        if acc != 0 and big != 0:
            lost = float(ctx.log10(big) - ctx.log10(abs(acc)))
        else:
            lost = math.inf
        if (lost + rel_digits <= dps) or dps >= max_dps:
            return (ctx, acc, dacc) if derivative else (ctx, acc)
        dps = int(min(max_dps, max(2 * dps, (lost if math.isfinite(lost) else dps) + rel_digits + 20)))
