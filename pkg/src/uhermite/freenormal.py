"""The free unitary normal distribution N(s2) on the unit circle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .errors import DomainError, QuadratureError
from .zetasolver import ZetaConfig, zeta_array

__all__ = [
    "FreeNormalParams",
    "density",
    "support_halfwidth",
    "edge_law",
    "q_poly",
    "moment",
    "density_series",
    "cdf",
    "psi",
    "s_transform",
    "integrate",
    "integrate_intervals",
    "total_mass",
    "moments",
]


@dataclass(frozen=True)
class FreeNormalParams:
    s2: float
    zeta_cfg: ZetaConfig = field(default_factory=ZetaConfig)
    quad_tol: float = 1e-10

    def __post_init__(self):
        if not (self.s2 > 0 and math.isfinite(self.s2)):
            raise DomainError("s2 must be positive and finite")
        if self.quad_tol <= 0:
            raise DomainError("quad_tol must be positive")


def _params(p) -> FreeNormalParams:
    return p if isinstance(p, FreeNormalParams) else FreeNormalParams(float(p))


def _wrap(theta):
    """Map angles into (-pi, pi]."""
    th = np.asarray(theta, dtype=float)
    w = np.remainder(th + np.pi, 2 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def support_halfwidth(p) -> float:
    s2 = _params(p).s2
    if s2 >= 4:
        return math.pi
    s = math.sqrt(s2)
    return 2 * math.asin(s / 2) + (s / 2) * math.sqrt(4 - s2)


def density(p, theta):
    """Density w.r.t. arc length at ``e^{i theta}``."""
    p = _params(p)
    th = _wrap(theta)
    scalar = th.ndim == 0
    th = np.atleast_1d(th)
    out = np.zeros(th.shape)
    m = support_halfwidth(p)
    inside = np.abs(th) < m if p.s2 < 4 else np.ones(th.shape, bool)
    if inside.any():
        z, _, _ = zeta_array(p.s2 / 4, (th[inside] - np.pi) / 2 + 0j, p.zeta_cfg)
        out[inside] = np.maximum(z.imag, 0.0) * 2 / (np.pi * p.s2)
    return float(out[0]) if scalar else out


def edge_law(p):
    """``(exponent, constant)`` with ``f(m - eps) ~ constant * eps**exponent``.

    Defined for ``s2 <= 4``; ``None`` for ``s2 > 4`` where the density is
    positive everywhere.
    """
    s2 = _params(p).s2
    if s2 < 4:
        return 0.5, (4 * s2 / (4 - s2)) ** 0.25 / (math.pi * s2)
    if s2 == 4:
        return 1.0 / 3.0, math.sqrt(3) / (4 * math.pi) * 1.5 ** (1.0 / 3.0)
    return None


# ------------------------------------------------------------ moments / series

def _q_mp(ctx, m, x):
    # term_j = x^j / j! * C(m+1, j+1), built by ratios
    term = ctx.mpf(m + 1)
    acc = term
    big = abs(term)
    for j in range(m):
        term = term * x * (m - j) / ((j + 1) * (j + 2))
        acc += term
        big = max(big, abs(term))
    return acc, big


def _q_adaptive(m, x, extra=20):
    """``q_m(x)`` in enough working precision to survive the alternating cancellation."""
    dps = 30
    while True:
        ctx = mpmath.MPContext()
        ctx.dps = dps
        val, big = _q_mp(ctx, m, ctx.mpf(x))
        lost = 0 if val == 0 else max(0.0, float(ctx.log10(big) - ctx.log10(abs(val))))
        if val != 0 and dps >= lost + extra:
            return ctx, val
        if dps > 20000:
            return ctx, val
        dps = int(max(2 * dps, lost + extra + 10))


def q_poly(m: int, x: float) -> float:
    """``q_m(x) = sum_j x^j/j! C(m+1, j+1)``."""
    m = int(m)
    if m < 0:
        raise DomainError("m must be nonnegative")
    _, v = _q_adaptive(m, float(x))
    return float(v)


@lru_cache(maxsize=8192)
def _moment_cached(s2: float, ell: int) -> float:
    ctx, q = _q_adaptive(ell - 1, -ell * s2)
    return float(q * ctx.exp(-ctx.mpf(ell) * s2 / 2) / ell)


def moment(p, ell: int) -> float:
    """``ell``-th moment ``int u^ell dN(u)`` (real by conjugation symmetry)."""
    ell = abs(int(ell))
    if ell == 0:
        return 1.0
    return _moment_cached(_params(p).s2, ell)


def moments(p, L: int) -> np.ndarray:
    """Moments ``m_1..m_L``."""
    s2 = _params(p).s2
    return np.array([_moment_cached(s2, ell) for ell in range(1, int(L) + 1)])


def _smooth_window(L: int) -> np.ndarray:
    """C-infinity taper: 1 on [0, L/2], decaying smoothly to 0 at L."""
    ell = np.arange(1, L + 1, dtype=float)
    x = np.clip((ell - L / 2) / (L / 2), 0.0, 1.0)

    def bump(u):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)

    a, b = bump(1 - x), bump(x)
    return a / (a + b)


def density_series(p, theta, terms: int, window: str = "none"):
    """Truncated Fourier series of the density.

    ``window="smooth"`` applies a C-infinity taper to the last half of the
    coefficients, which accelerates convergence when the moments decay only
    algebraically (``s2 <= 4``).
    """
    p = _params(p)
    terms = int(terms)
    if terms < 0:
        raise DomainError("terms must be nonnegative")
    th = np.asarray(theta, dtype=float)
    if terms == 0:
        return np.full(th.shape, 1 / (2 * np.pi)) if th.ndim else 1 / (2 * np.pi)
    c = moments(p, terms)
    if window == "smooth":
        c = c * _smooth_window(terms)
    elif window != "none":
        raise DomainError(f"unknown window {window!r}")
    ell = np.arange(1, terms + 1)
    flat = np.atleast_1d(th).ravel()
    vals = 1 / (2 * np.pi) + np.cos(np.outer(flat, ell)) @ c / np.pi
    return float(vals[0]) if th.ndim == 0 else vals.reshape(th.shape)


def series_terms_needed(p, tol: float = 1e-14, max_terms: int = 5000) -> int:
    """Smallest L with the term bound ``|m_L| < tol`` (capped at ``max_terms``)."""
    p = _params(p)
    for ell in range(1, max_terms + 1):
        if abs(moment(p, ell)) < tol:
            return ell
    return max_terms


# ------------------------------------------------------------------- quadrature

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def integrate_intervals(fun, lo, hi, tol: float = 1e-12, max_rounds: int = 45):
    """Adaptive Gauss-Legendre over many intervals at once.

    ``fun`` is called on node arrays.  Every round evaluates all open panels
    (and their halves) in one vectorised call; a panel is accepted when the
    coarse and refined rules agree to ``tol * length / span``, where span is
    the total length of all intervals.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    out = np.zeros(lo.shape)
    span = float(np.sum(np.abs(hi - lo)))
    if span == 0:
        return out
    owner = np.arange(len(lo))
    a, b = lo.copy(), hi.copy()
    keep = a != b
    owner, a, b = owner[keep], a[keep], b[keep]
    for _ in range(max_rounds):
        if len(a) == 0:
            return out
        mid = 0.5 * (a + b)
        segs = [(a, b), (a, mid), (mid, b)]
        nodes = np.concatenate([
            (0.5 * (h - l))[:, None] * _GL_X[None, :] + (0.5 * (h + l))[:, None] for l, h in segs
        ])
        vals = np.asarray(fun(nodes.ravel()), dtype=float).reshape(nodes.shape)
        k = len(a)
        est = [(0.5 * (h - l)) * (vals[i * k:(i + 1) * k] @ _GL_W) for i, (l, h) in enumerate(segs)]
        coarse, fine = est[0], est[1] + est[2]
        ok = np.abs(coarse - fine) <= tol * np.abs(b - a) / span + 1e-300
        np.add.at(out, owner[ok], fine[ok])
        bad = ~ok
        owner = np.concatenate([owner[bad], owner[bad]])
        a, b = np.concatenate([a[bad], mid[bad]]), np.concatenate([mid[bad], b[bad]])
    raise QuadratureError("adaptive quadrature did not converge")


def integrate(fun, a: float, b: float, tol: float = 1e-12) -> float:
    """Adaptive Gauss-Legendre on a single interval."""
    return float(integrate_intervals(fun, [a], [b], tol)[0])


def _edge_power(p) -> int:
    if p.s2 < 4:
        return 2
    if p.s2 == 4:
        return 3
    return 1


def _half_masses(p, xs, side):
    """Masses ``int_{-m}^{x}`` (side=-1, x <= 0) or ``int_{x}^{m}`` (side=+1, x >= 0).

    Uses ``phi = -+(m - u^k)`` so the edge singularity becomes smooth in u, and
    integrates consecutive gaps between the sorted points in one batch.
    """
    m = support_halfwidth(p)
    k = _edge_power(p)
    xs = np.asarray(xs, dtype=float)
    dist = np.clip(m - side * xs, 0.0, None) if side > 0 else np.clip(xs + m, 0.0, None)
    u = np.sort(dist ** (1.0 / k))
    edges = np.concatenate([[0.0], u])

    def g(v):
        return density(p, side * (m - v ** k)) * k * v ** (k - 1)

    parts = integrate_intervals(g, edges[:-1], edges[1:], p.quad_tol)
    cum = np.cumsum(parts)
    inv = np.argsort(np.argsort(dist ** (1.0 / k), kind="stable"), kind="stable")
    return cum[inv]


def cdf(p, theta):
    """``int_{-pi}^{theta} f``, clamped to [0, 1]; accepts arrays."""
    p = _params(p)
    th = np.asarray(theta, dtype=float)
    if np.any(th < -np.pi - 1e-15) or np.any(th > np.pi + 1e-15):
        raise DomainError("theta must lie in [-pi, pi]")
    flat = np.atleast_1d(th).ravel()
    out = np.empty(flat.shape)
    neg = flat <= 0
    left = _half_masses(p, np.append(flat[neg], 0.0), -1)
    right = _half_masses(p, np.append(flat[~neg], 0.0), +1)
    out[neg] = left[:-1]
    out[~neg] = left[-1] + right[-1] - right[:-1]
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if th.ndim == 0 else out.reshape(th.shape)


def total_mass(p) -> float:
    """Numerical ``int f`` over the circle (not clamped)."""
    p = _params(p)
    return float(_half_masses(p, [0.0], -1)[0] + _half_masses(p, [0.0], +1)[0])


# ------------------------------------------------------------------ transforms

def psi(p, theta):
    """psi-transform at ``z = -e^{i theta}`` (``Im theta >= 0``)."""
    p = _params(p)
    th = np.asarray(theta, dtype=complex)
    z, _, _ = zeta_array(p.s2 / 4, th / 2, p.zeta_cfg)
    out = 1j * (th - 2 * z) / p.s2 - 0.5
    return complex(out) if np.ndim(out) == 0 else out


def s_transform(p, z):
    p = _params(p)
    return np.exp(p.s2 * (np.asarray(z, dtype=complex) + 0.5))
