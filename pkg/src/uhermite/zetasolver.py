"""The root ``zeta_t(theta)`` of ``zeta - t*tan(zeta) = theta`` in the upper half-plane."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SolverError

__all__ = ["ZetaConfig", "ZetaValue", "zeta", "zeta_array", "zeta_boundary_line"]


def _default_descent():
    return tuple(10.0 ** -k for k in range(1, 13))


@dataclass(frozen=True)
class ZetaConfig:
    max_fixed_point_iters: int = 200
    newton_tol: float = 1e-14
    boundary_descent: tuple = field(default_factory=_default_descent)
    max_newton_iters: int = 60
    edge_tol: float = 1e-10  # accepted residual where the root is nearly double

    def __post_init__(self):
        if self.newton_tol <= 0 or self.edge_tol <= 0:
            raise DomainError("tolerances must be positive")
        d = np.asarray(self.boundary_descent, dtype=float)
        if d.size == 0 or np.any(d <= 0) or np.any(np.diff(d) >= 0):
            raise DomainError("boundary_descent must be positive and strictly decreasing")


@dataclass(frozen=True)
class ZetaValue:
    zeta: complex
    residual: float
    iterations_used: int


_EPS = np.finfo(float).eps


def _g(z, t, theta):
    return z - t * np.tan(z) - theta


def _accept(z, t, theta, cfg):
    """Residual bound per point: ``newton_tol`` scaled for roundoff, relaxed near double roots."""
    tz = np.tan(z)
    scale = np.abs(z) + t * np.abs(tz) + np.abs(theta)
    tol = np.maximum(cfg.newton_tol, 8 * _EPS * scale)
    dg = np.abs(1 - t * (1 + tz * tz))
    return np.where(dg < 1e-3, np.maximum(tol, cfg.edge_tol), tol)


def _newton(z, t, theta, cfg, floor=None):
    """Vectorised Newton on ``g``; keeps iterates in ``Im >= floor``."""
    z = z.copy()
    its = 0
    for its in range(1, cfg.max_newton_iters + 1):
        tz = np.tan(z)
        g = z - t * tz - theta
        dg = 1 - t * (1 + tz * tz)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = g / dg
        step = np.where(np.isfinite(step), step, 0.0)
        znew = z - step
        if floor is not None:
            # damp steps that would leave the admissible half-plane
            for _ in range(30):
                bad = znew.imag < floor
                if not bad.any():
                    break
                step = np.where(bad, step / 2, step)
                znew = z - step
        done = np.abs(step) <= 4 * _EPS * np.maximum(np.abs(z), 1.0)
        z = znew
        if done.all():
            break
    return z, its


def _interior(t, theta, cfg):
    """Solve for ``Im theta > 0``: fixed-point iteration then Newton, with a continuation fallback."""
    z = theta + 1j * t
    its = 0
    for its in range(1, cfg.max_fixed_point_iters + 1):
        znew = theta + t * np.tan(z)
        diff = np.abs(znew - z)
        z = znew
        if np.all(diff <= 1e-15 * np.maximum(1.0, np.abs(z))):
            break
    z, nits = _newton(z, t, theta, cfg, floor=0.0)
    its += nits
    bad = ~(np.abs(_g(z, t, theta)) <= _accept(z, t, theta, cfg)) | (z.imag <= theta.imag)
    if bad.any():
        zb, extra = _descend(t, theta[bad], cfg, offsets=np.geomspace(4.0 + 2 * t, 1e-3, 40),
                             base_imag=theta[bad].imag)
        z[bad] = zb
        its += extra
    return z, its


def _descend(t, theta, cfg, offsets, base_imag):
    """Continuation in the imaginary direction: solve at ``theta + i*delta`` for decreasing delta."""
    re = theta.real
    offsets = np.asarray(offsets, dtype=float)
    start = re + 1j * (base_imag + offsets[0])
    z = start + 1j * t
    for _ in range(cfg.max_fixed_point_iters):
        z = start + t * np.tan(z)
    z, its = _newton(z, t, start, cfg, floor=0.0)
    prev = offsets[0]
    for d in list(offsets[1:]) + [0.0]:
        z, k = _step_to(t, re, base_imag, z, prev, d, cfg)
        its += k
        prev = d
    return z, its


_MAX_SUBSTEPS = 4000


def _step_to(t, re, base_imag, z, d_from, d_to, cfg, depth=0, budget=None):
    """Warm-started Newton from offset ``d_from`` to ``d_to``; bisects the step when Newton stalls.

    ``budget`` caps the total number of bisections shared by the recursion;
    once spent, the unconverged iterate is returned and the caller's residual
    check reports the failure.
    """
    if budget is None:
        budget = [_MAX_SUBSTEPS]
    target = re + 1j * (base_imag + d_to)
    znew, its = _newton(z, t, target, cfg, floor=0.0 if np.all(base_imag + d_to > 0) else -np.inf)
    ok = (np.abs(_g(znew, t, target)) <= _accept(znew, t, target, cfg)) & (np.abs(znew - z) < 0.5)
    if ok.all() or depth >= 24 or budget[0] <= 0:
        return znew, its
    budget[0] -= 1
    bad = ~ok
    mid = math.sqrt(d_from * d_to) if d_to > 0 else d_from / 10
    bi = base_imag[bad] if np.ndim(base_imag) else base_imag
    zm, k1 = _step_to(t, re[bad], bi, z[bad], d_from, mid, cfg, depth + 1, budget)
    zf, k2 = _step_to(t, re[bad], bi, zm, mid, d_to, cfg, depth + 1, budget)
    znew[bad] = zf
    return znew, its + k1 + k2


def zeta_array(t: float, theta, cfg: ZetaConfig | None = None, check: bool = True):
    """Vectorised ``zeta_t``.  Returns ``(zeta, residual, iterations)`` arrays/ints."""
    cfg = cfg or ZetaConfig()
    t = float(t)
    if not t > 0:
        raise DomainError("t must be positive")
    th = np.atleast_1d(np.asarray(theta, dtype=complex))
    if np.any(th.imag < 0):
        raise DomainError("theta must lie in the closed upper half-plane")
    out = np.empty_like(th)
    its = 0
    upper = th.imag > 0
    if upper.any():
        out[upper], k = _interior(t, th[upper], cfg)
        its += k
    real = ~upper
    if real.any():
        thr = th[real]
        d = np.asarray(cfg.boundary_descent, dtype=float)
        z0, k = _interior(t, thr + 1j * d[0], cfg)
        its += k
        prev = d[0]
        for dd in list(d[1:]) + [0.0]:
            z0, k = _step_to(t, thr.real, np.zeros(len(thr)), z0, prev, dd, cfg)
            its += k
            prev = dd
        out[real] = np.where(z0.imag < 0, z0.real + 0j, z0)
    res = np.abs(_g(out, t, th))
    if check:
        bad = ~(res <= _accept(out, t, th, cfg))
        if bad.any():
            k = int(np.argmax(np.where(bad, res, -1)))
            raise SolverError(f"zeta solver residual {res[k]:.3g} at theta={th[k]!r}, t={t}",
                              residual=float(res[k]))
    shape = np.shape(theta)
    return out.reshape(shape), res.reshape(shape), its


def zeta(t: float, theta: complex, cfg: ZetaConfig | None = None) -> ZetaValue:
    """``zeta_t(theta)`` for ``Im theta >= 0``."""
    z, r, its = zeta_array(t, complex(theta), cfg)
    return ZetaValue(complex(z), float(r), int(its))


def zeta_boundary_line(t: float, tau: float) -> float:
    """Positive root ``y`` of ``y - t*coth(y) = tau`` (safeguarded Newton)."""
    t, tau = float(t), float(tau)
    if not t > 0 or tau < 0:
        raise DomainError("need t > 0 and tau >= 0")

    def f(y):
        return y - t / math.tanh(y) - tau

    rp = 0.5 * (tau + math.sqrt(tau * tau + 4 * t))
    lo, hi = 0.5 * rp, tau + t + 1.0
    while f(lo) >= 0:
        lo *= 0.5
    y = min(max(rp, lo), hi)
    for _ in range(200):
        fy = f(y)
        if fy == 0:
            return y
        if fy < 0:
            lo = y
        else:
            hi = y
        s = math.sinh(y)
        ynew = y - fy / (1 + t / (s * s)) if s != 0 else 0.5 * (lo + hi)
        if not lo < ynew < hi:
            ynew = 0.5 * (lo + hi)
        if abs(ynew - y) <= 2 * _EPS * y:
            return ynew
        y = ynew
    return y
