"""Curie-Weiss partition function at complex field, free energy and Lee-Yang zeroes."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import freenormal
from .circleroots import EvalPrecision, find_roots
from .errors import DomainError, PoleError
from .polycore import unitary_hermite
from .scaledarith import log_binomial_array
from .zetasolver import ZetaConfig, zeta_array

__all__ = [
    "CWParams",
    "LeeYangSupport",
    "partition_sum",
    "log_partition",
    "log_partition_spins",
    "free_energy",
    "lee_yang_zeros",
    "lee_yang_density",
    "lee_yang_cdf",
    "lee_yang_support",
]


@dataclass(frozen=True)
class CWParams:
    beta: float
    h: complex = 0.0

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError("beta must be positive and finite")


def partition_sum(n: int, p: CWParams):
    """``Z_n`` as ``(s, L, scale)`` with ``Z_n = e^L * s`` and ``scale = sum |term| e^{-L}``.

    Terms with magnetisations ``k`` and ``-k`` are paired, which makes the
    result invariant (bit for bit) under ``h -> -h``.  ``scale`` bounds the
    sum of the unpaired term moduli, so it measures cancellation.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be at least 1")
    beta = float(p.beta)
    h = complex(p.h)
    # Z(h + i pi) = (-1)^n Z(h): reduce Im h into [-pi/2, pi/2] first
    r = math.remainder(h.imag, math.pi)
    flip = round((h.imag - r) / math.pi) * n % 2
    h = complex(h.real, r)
    a = abs(h.real)
    lb = log_binomial_array(n)
    js = range(n // 2 + 1)  # k = n - 2j >= 0
    L = []
    W = []
    B = []
    for j in js:
        k = n - 2 * j
        Lk = lb[j] + beta / (2 * n) * k * k + a * k
        # cosh(h k) e^{-|Re h| k}; both exponentials have nonpositive real part
        e1, e2 = cmath.exp((h - a) * k), cmath.exp((-h - a) * k)
        w = 0.5 * (e1 + e2)
        b = 0.5 * (abs(e1) + abs(e2))
        if k != 0:
            w *= 2.0  # the j and n-j terms coincide after pairing
            b *= 2.0
        L.append(Lk)
        W.append(w)
        B.append(b)
    L = np.array(L)
    Lmax = float(L.max())
    e = np.exp(L - Lmax)
    terms = [complex(x) * w for x, w in zip(e, W)]
    s = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    if flip:
        s = -s
    scale = math.fsum(float(x) * b for x, b in zip(e, B))
    return s, Lmax, scale


def log_partition(n: int, p: CWParams, pole_tol: float = 1e-12) -> complex:
    """Principal ``log Z_n(beta, h)`` from the binomial form.

    The branch is the principal log of the final sum; no continuity across
    zero crossings is implied.
    """
    s, L, scale = partition_sum(n, p)
    if abs(s) <= pole_tol * scale:
        raise PoleError(f"Z_n vanishes to working accuracy at h={p.h!r}")
    return L + cmath.log(s)


def log_partition_spins(n: int, p: CWParams) -> complex:
    """``log Z_n`` by direct summation over all ``2^n`` spin configurations (n <= 24)."""
    n = int(n)
    if not 1 <= n <= 24:
        raise DomainError("spin-sum oracle is limited to 1 <= n <= 24")
    cfg = np.arange(2 ** n, dtype=np.int64)
    ups = np.zeros(cfg.shape, dtype=np.int64)
    for bit in range(n):
        ups += (cfg >> bit) & 1
    M = 2 * ups - n
    h = complex(p.h)
    expo = p.beta / (2 * n) * M.astype(float) ** 2 + h * M
    mx = expo.real.max()
    tot = np.sum(np.exp(expo - mx))
    if tot == 0:
        raise PoleError("spin sum vanishes")
    return mx + cmath.log(complex(tot))


def free_energy(p: CWParams, cfg: ZetaConfig | None = None) -> complex:
    """Limit of ``(1/n) log Z_n`` for ``Re h != 0`` (uses ``h -> -h`` symmetry when Re h < 0)."""
    h = complex(p.h)
    if h.real == 0:
        raise DomainError("free energy closed form needs Re h != 0")
    if h.real < 0:
        h = -h
    beta = float(p.beta)
    z, _, _ = zeta_array(beta, 1j * h, cfg)
    z = complex(z)
    w = cmath.exp(2j * z)  # |w| < 1 since Im zeta > Re h > 0
    return beta / 2 + h + _log1p(w) - 2 * beta / (1 + cmath.exp(-2j * z)) ** 2


def _log1p(w: complex) -> complex:
    # principal branch of log(1+w) for |w| < 1, accurate for small |w|
    if abs(w) < 1e-5:
        return w - w * w / 2 + w ** 3 / 3
    return cmath.log(1 + w)


def lee_yang_zeros(n: int, beta: float, prec: EvalPrecision | None = None) -> np.ndarray:
    """Values ``y`` in (-pi/2, pi/2] such that ``Z_n(beta, i y) = 0``."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    m = find_roots(unitary_hermite(n, 4 * beta / n), prec)
    y = (m.angles - np.pi) / 2
    y = np.where(y <= -np.pi / 2, y + np.pi, y)
    return np.sort(y)


def lee_yang_density(beta: float, y, cfg: ZetaConfig | None = None):
    """Density of the limiting Lee-Yang zero distribution, ``Im zeta_beta(y) / (pi beta)``."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    yy = np.asarray(y, dtype=float)
    # reduce to one period first; zeta is pi-periodic up to a real shift
    red = np.remainder(yy + np.pi / 2, np.pi) - np.pi / 2
    z, _, _ = zeta_array(beta, red + 0j, cfg)
    out = np.maximum(np.imag(z), 0.0) / (np.pi * beta)
    return float(out) if yy.ndim == 0 else out


def lee_yang_cdf(beta: float, y):
    """CDF of the limiting zero distribution restricted to the period (-pi/2, pi/2]."""
    yy = np.asarray(y, dtype=float)
    phi = 2 * yy + np.pi  # in (0, 2pi]
    p = freenormal.FreeNormalParams(4 * beta)
    flat = np.atleast_1d(phi).ravel()
    c0 = freenormal.cdf(p, 0.0)
    low = flat <= np.pi
    vals = np.empty(flat.shape)
    vals[low] = freenormal.cdf(p, flat[low]) - c0
    vals[~low] = 1 - c0 + freenormal.cdf(p, flat[~low] - 2 * np.pi)
    vals = np.clip(vals, 0.0, 1.0)
    return float(vals[0]) if yy.ndim == 0 else vals.reshape(yy.shape)


@dataclass(frozen=True)
class LeeYangSupport:
    """Support ``center + pi*Z +- halfwidth`` (the whole line when ``full_line``)."""

    center: float
    halfwidth: float
    full_line: bool

    def contains(self, y, slack: float = 0.0):
        if self.full_line:
            return np.ones(np.shape(y), bool)
        d = np.remainder(np.asarray(y) - self.center + np.pi / 2, np.pi) - np.pi / 2
        return np.abs(d) <= self.halfwidth + slack


def lee_yang_support(beta: float) -> LeeYangSupport:
    if not beta > 0:
        raise DomainError("beta must be positive")
    if beta >= 1:
        return LeeYangSupport(np.pi / 2, np.pi / 2, True)
    hw = math.asin(math.sqrt(beta)) + math.sqrt(beta - beta * beta)
    return LeeYangSupport(np.pi / 2, hw, False)
