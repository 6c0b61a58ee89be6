"""Saddle-point asymptotics of ``H_n(z; s2/n)`` inside the unit disk.

Everything is expressed through ``w = exp(2i zeta)`` with
``zeta = zeta_{s2/4}(theta/2)`` and ``z = -exp(i theta)``.  In that variable

    t0      = (s2/2) (w - 1)/(w + 1)
    S(t0)   = log(1 + w) - (s2/2) (w/(1 + w))^2
    d2S     = w/(1 + w)^2 - 1/s2
    dS/dz   = (1/z) w/(1 + w)

and ``w -> 0`` as ``z -> 0`` (``w ~ -z e^{-s2/2}``), so no formula needs a
separate limit except the division by ``z``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureError
from .freenormal import integrate_intervals
from .polycore import poly_eval_adaptive, unitary_hermite
from .zetasolver import ZetaConfig, zeta_array

__all__ = [
    "SaddleData",
    "S",
    "dS",
    "t0",
    "t0_theta",
    "saddle_data",
    "limit_logH",
    "limit_logderivative",
    "d2S",
    "integral_Hn",
    "prefactor_asymptotics",
    "log_Hn",
    "delta_n",
]


@dataclass(frozen=True)
class SaddleData:
    t0: complex
    S_at_saddle: complex
    d2S: complex


def _check_s2(s2):
    if not (s2 > 0 and math.isfinite(s2)):
        raise DomainError("s2 must be positive and finite")


def _check_disk(z):
    if np.any(np.abs(z) >= 1):
        raise DomainError("z must lie in the open unit disk")


def _w_theta(theta, s2, cfg=None):
    th = np.asarray(theta, dtype=complex)
    if np.any(th.imag <= 0):
        raise DomainError("theta must lie in the open upper half-plane")
    zt, _, _ = zeta_array(s2 / 4, th / 2, cfg)
    return np.exp(2j * zt)


def _w(z, s2, cfg=None):
    """``exp(2i zeta)`` for each ``z`` (0 at ``z = 0``)."""
    z = np.asarray(z, dtype=complex)
    _check_s2(s2)
    _check_disk(z)
    out = np.zeros(z.shape, dtype=complex)
    nz = z != 0
    if np.any(nz):
        theta = -1j * np.log(-z[nz])
        out[nz] = _w_theta(theta, s2, cfg)
    return out


def _ret(x):
    return complex(x) if np.ndim(x) == 0 else x


def S(t, z, s2):
    """``log(1 - z e^t) - (t/sigma + sigma/2)^2 / 2`` (principal log)."""
    _check_s2(s2)
    t = np.asarray(t, dtype=complex)
    z = np.asarray(z, dtype=complex)
    _check_disk(z)
    if np.any(t.real >= 0):
        raise DomainError("S needs Re t < 0")
    sig = math.sqrt(s2)
    return _ret(np.log(1 - z * np.exp(t)) - 0.5 * (t / sig + sig / 2) ** 2)


def dS(t, z, s2):
    """Partial derivative of S in ``t``."""
    t = np.asarray(t, dtype=complex)
    z = np.asarray(z, dtype=complex)
    e = z * np.exp(t)
    return _ret(-e / (1 - e) - (t / s2 + 0.5))


def t0_theta(theta, s2, cfg: ZetaConfig | None = None):
    """Saddle point for ``z = -e^{i theta}``; depends on theta only modulo 2 pi."""
    _check_s2(s2)
    w = _w_theta(theta, s2, cfg)
    return _ret(0.5 * s2 * (w - 1) / (w + 1))


def t0(z, s2, cfg: ZetaConfig | None = None):
    """The unique solution of ``dS = 0`` in ``Re t < 0``."""
    w = _w(z, s2, cfg)
    return _ret(0.5 * s2 * (w - 1) / (w + 1))


def limit_logH(z, s2, cfg: ZetaConfig | None = None):
    """Limit of ``(1/n) log(H_n(z; s2/n) / (-1)^n)``; equals ``S(t0(z); z)``."""
    w = _w(z, s2, cfg)
    return _ret(np.log1p(w) - 0.5 * s2 * (w / (1 + w)) ** 2)


def limit_logderivative(z, s2, cfg: ZetaConfig | None = None):
    """Limit of ``(1/n) H_n'(z)/H_n(z)``; ``-exp(-s2/2)`` at the origin."""
    z = np.asarray(z, dtype=complex)
    w = _w(z, s2, cfg)
    safe = np.where(z == 0, 1.0, z)
    out = np.where(z == 0, -math.exp(-s2 / 2), w / ((1 + w) * safe))
    return _ret(out)


def d2S(z, s2, cfg: ZetaConfig | None = None):
    """Second t-derivative of S at the saddle.

    With ``u = z e^{t0} = -w`` the log term contributes ``-u/(1-u)^2``, which
    is ``+1/(4 cos^2 zeta)``; the total is ``1/(4 cos^2 zeta) - 1/s2``.
    """
    w = _w(z, s2, cfg)
    return _ret(w / (1 + w) ** 2 - 1 / s2)


def saddle_data(z: complex, s2: float, cfg: ZetaConfig | None = None) -> SaddleData:
    w = complex(_w(complex(z), s2, cfg))
    return SaddleData(
        t0=0.5 * s2 * (w - 1) / (w + 1),
        S_at_saddle=cmath.log(1 + w) - 0.5 * s2 * (w / (1 + w)) ** 2,
        d2S=w / (1 + w) ** 2 - 1 / s2,
    )


# ---------------------------------------------------------------- quadrature

def _window(n, s2, z, drop=60.0):
    """Interval outside which the integrand is below ``e^-drop`` times its bound's peak."""
    sig = math.sqrt(s2)
    az = abs(z)

    def bound(t):
        return n * math.log1p(az * math.exp(min(t, 700.0))) - 0.5 * n * (t / sig + sig / 2) ** 2

    c = -s2 / 2
    ts = c + np.linspace(-1, 1, 401) * (sig * math.sqrt(2 * drop / n) + 10 * s2)
    peak = max(bound(t) for t in ts)
    lo, hi = c, c
    step = sig / math.sqrt(n)
    while bound(lo) > peak - drop:
        lo -= step
    while bound(hi) > peak - drop:
        hi += step
    return lo, hi, peak


def integral_Hn(n: int, s2: float, z: complex, tol: float = 1e-13) -> complex:
    """``H_n(z; s2/n)`` from its Gaussian integral representation on the real line.

    Adaptive Gauss-Legendre on the truncation window, real and imaginary
    parts separately; ``tol`` is relative to the peak of the integrand bound.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be positive")
    _check_s2(s2)
    z = complex(z)
    if abs(z) >= 1:
        raise DomainError("z must lie in the open unit disk")
    sig = math.sqrt(s2)
    lo, hi, peak = _window(n, s2, z)
    norm = math.sqrt(n / (2 * math.pi * s2))

    def f(t):
        # scaled by e^{-peak} so both parts are O(1) at most
        return (1 - z * np.exp(t)) ** n * np.exp(-0.5 * n * (t / sig + sig / 2) ** 2 - peak)

    pieces = np.linspace(lo, hi, 33)
    abs_tol = tol * (hi - lo)
    try:
        re = integrate_intervals(lambda t: f(t).real, pieces[:-1], pieces[1:], abs_tol).sum()
        im = integrate_intervals(lambda t: f(t).imag, pieces[:-1], pieces[1:], abs_tol).sum()
    except QuadratureError as exc:
        raise QuadratureError(f"Gaussian integral for H_{n} did not converge: {exc}") from exc
    return (-1) ** n * norm * math.exp(peak) * complex(re, im)


# ---------------------------------------------------------------- prefactor

def _radial_sqrt(fun, z, steps=64):
    """``sqrt(fun(r z))`` continued from r = 0 along the radius (principal at 0).

    ``fun`` must accept an array of points.
    """
    vals = np.sqrt(np.asarray(fun(np.linspace(0, 1, steps + 1) * z), dtype=complex))
    root = vals[0] if vals[0].real >= 0 else -vals[0]
    for cand in vals[1:]:
        root = cand if abs(cand - root) <= abs(cand + root) else -cand
    return complex(root)


def prefactor_asymptotics(n: int, s2: float, z: complex, cfg: ZetaConfig | None = None) -> complex:
    """Saddle-point prediction of ``H_n(z; s2/n) / (-1)^n``."""
    z = complex(z)
    _check_s2(s2)
    if abs(z) >= 1:
        raise DomainError("z must lie in the open unit disk")
    pref = _radial_sqrt(lambda u: -1 / (s2 * d2S(u, s2, cfg)), z)
    return pref * cmath.exp(int(n) * complex(limit_logH(z, s2, cfg)))


# ------------------------------------------------------ log with continuation

def _hn_value(p, z, sign):
    ctx, v = poly_eval_adaptive(p, z)
    v = v * sign
    return float(ctx.log(abs(v))), float(ctx.arg(v))


def log_Hn(n: int, s2: float, z: complex, max_step: float = math.pi / 4) -> complex:
    """``log(H_n(z; s2/n) / (-1)^n)`` with the branch continued from ``z = 0``.

    Real part is ``log|H_n|``; the imaginary part is the argument unwrapped
    along the segment ``[0, z]``, refined until consecutive samples differ by
    less than ``max_step`` in phase.
    """
    n = int(n)
    z = complex(z)
    if abs(z) >= 1:
        raise DomainError("z must lie in the open unit disk")
    p = unitary_hermite(n, s2 / n)
    sign = (-1) ** n
    cache = {}

    def at(r):
        if r not in cache:
            cache[r] = _hn_value(p, r * z, sign)
        return cache[r]

    phase = at(0.0)[1]  # 0 since H_n(0)/(-1)^n = 1
    # walk left to right, splitting any segment with a large phase jump
    rs = list(np.linspace(0, 1, 33))
    k = 0
    while k < len(rs) - 1:
        a, b = rs[k], rs[k + 1]
        d = at(b)[1] - at(a)[1]
        d = (d + math.pi) % (2 * math.pi) - math.pi
        if abs(d) > max_step and b - a > 1e-12:
            rs.insert(k + 1, 0.5 * (a + b))
            continue
        phase += d
        k += 1
    return complex(at(1.0)[0], phase)


def delta_n(n: int, s2: float, z: complex) -> float:
    """``|(1/n) log(H_n/(-1)^n) - limit_logH(z)|``."""
    return abs(log_Hn(n, s2, z) / n - complex(limit_logH(z, s2)))
