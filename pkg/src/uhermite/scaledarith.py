"""Signed log-scale real arithmetic.

A real number is stored as ``(sign, ln_mag)`` so that products of huge
binomials and tiny Gaussian weights never overflow or underflow.  Scalars
use :class:`SignedScaled`; coefficient vectors use :class:`ScaledArray`,
which holds the same data as two numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

__all__ = [
    "SignedScaled",
    "ScaledArray",
    "ss_mul",
    "ss_add",
    "ss_neg",
    "log_binomial",
    "log_binomial_array",
    "logsumexp_signed",
]

_DEC_DIGITS = 40


@dataclass(frozen=True)
class SignedScaled:
    """Real number ``sign * exp(ln_mag + ln_lo)``.

    ``ln_lo`` is a tiny low-order correction to the logarithm that lets
    :meth:`from_float` / :meth:`to_float` round-trip every finite double.
    Arithmetic results carry ``ln_lo = 0`` unless both operands had one.
    """

    sign: int
    ln_mag: float = 0.0
    ln_lo: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if self.sign != 0 and not math.isfinite(self.ln_mag):
            raise DomainError("ln_mag must be finite for a nonzero value")

    @classmethod
    def from_float(cls, x: float) -> "SignedScaled":
        x = float(x)
        if x == 0.0:
            return cls(0, 0.0)
        if not math.isfinite(x):
            raise DomainError("cannot represent a non-finite value")
        with localcontext() as ctx:
            ctx.prec = _DEC_DIGITS
            lg = Decimal(abs(x)).ln()
            hi = float(lg)
            lo = float(lg - Decimal(hi))
        return cls(1 if x > 0 else -1, hi, lo)

    @classmethod
    def from_log(cls, sign: int, ln_mag: float) -> "SignedScaled":
        return cls(int(sign), float(ln_mag) if sign else 0.0)

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.ln_lo == 0.0:
            return self.sign * math.exp(self.ln_mag) if self.ln_mag < 709.8 else self.sign * math.inf
        with localcontext() as ctx:
            ctx.prec = _DEC_DIGITS
            v = (Decimal(self.ln_mag) + Decimal(self.ln_lo)).exp()
        return self.sign * float(v)

    @property
    def log(self) -> float:
        """Full-precision log magnitude as a double (``-inf`` for zero)."""
        return self.ln_mag + self.ln_lo if self.sign else -math.inf

    def __mul__(self, other):
        return ss_mul(self, _coerce(other))

    __rmul__ = __mul__

    def __add__(self, other):
        return ss_add(self, _coerce(other))

    __radd__ = __add__

    def __neg__(self):
        return ss_neg(self)

    def __sub__(self, other):
        return ss_add(self, ss_neg(_coerce(other)))

    def __rsub__(self, other):
        return ss_add(_coerce(other), ss_neg(self))

    def __float__(self):
        return self.to_float()

    def __repr__(self):
        if self.sign == 0:
            return "SignedScaled(0)"
        s = "+" if self.sign > 0 else "-"
        return f"SignedScaled({s}, {self.log!r})"


SignedScaled.ZERO = SignedScaled(0, 0.0)
SignedScaled.ONE = SignedScaled(1, 0.0)


def _coerce(x) -> SignedScaled:
    if isinstance(x, SignedScaled):
        return x
    return SignedScaled.from_float(x)


def ss_neg(a: SignedScaled) -> SignedScaled:
    return SignedScaled(-a.sign, a.ln_mag, a.ln_lo)


def ss_mul(a: SignedScaled, b: SignedScaled) -> SignedScaled:
    if a.sign == 0 or b.sign == 0:
        return SignedScaled.ZERO
    # two-sum on the high parts so the low-order information survives
    hi = a.ln_mag + b.ln_mag
    bb = hi - a.ln_mag
    err = (a.ln_mag - (hi - bb)) + (b.ln_mag - bb)
    lo = err + a.ln_lo + b.ln_lo
    hi2 = hi + lo
    lo2 = lo - (hi2 - hi)
    return SignedScaled(a.sign * b.sign, hi2, lo2)


def ss_add(a: SignedScaled, b: SignedScaled) -> SignedScaled:
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    la, lb = a.log, b.log
    if lb > la or (lb == la and b.sign < a.sign):
        a, b, la, lb = b, a, lb, la
    d = lb - la  # <= 0
    if a.sign == b.sign:
        return SignedScaled(a.sign, la + math.log1p(math.exp(d)))
    if d == 0.0:
        d = (b.ln_mag - a.ln_mag) + (b.ln_lo - a.ln_lo)
        if d == 0.0:
            return SignedScaled.ZERO
        if d > 0:
            a, b, d = b, a, -d
    # a dominates; the result keeps a's sign
    return SignedScaled(a.sign, la + math.log(-math.expm1(d)))


def log_binomial(n: int, k: int) -> float:
    """Natural log of ``C(n, k)``."""
    n, k = int(n), int(k)
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"log_binomial needs 0 <= k <= n, got n={n}, k={k}")
    k = min(k, n - k)
    if k == 0:
        return 0.0
    if n <= 1000:
        return math.log(math.comb(n, k))
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def log_binomial_array(n: int) -> np.ndarray:
    """``ln C(n, j)`` for ``j = 0..n``, exactly symmetric in ``j <-> n-j``."""
    n = int(n)
    if n < 0:
        raise DomainError("n must be nonnegative")
    half = np.array([log_binomial(n, j) for j in range(n // 2 + 1)])
    out = np.empty(n + 1)
    out[: n // 2 + 1] = half
    out[n - np.arange(n // 2 + 1)] = half
    return out


def logsumexp_signed(sign: np.ndarray, ln: np.ndarray) -> SignedScaled:
    """Sum of ``sign * exp(ln)`` as a SignedScaled (double precision)."""
    sign = np.asarray(sign)
    ln = np.asarray(ln, dtype=float)
    mask = sign != 0
    if not mask.any():
        return SignedScaled.ZERO
    m = ln[mask].max()
    s = math.fsum((sign[mask] * np.exp(ln[mask] - m)).tolist())
    if s == 0.0:
        return SignedScaled.ZERO
    return SignedScaled(1 if s > 0 else -1, m + math.log(abs(s)))


class ScaledArray:
    """Vector of SignedScaled values stored as ``sign`` and ``ln`` arrays."""

    __slots__ = ("sign", "ln")

    def __init__(self, sign, ln):
        sign = np.asarray(sign, dtype=np.int8).copy()
        ln = np.asarray(ln, dtype=float).copy()
        if sign.shape != ln.shape:
            raise DomainError("sign and ln must have the same shape")
        ln[sign == 0] = 0.0
        if not np.all(np.isfinite(ln)):
            raise DomainError("ln entries must be finite")
        sign.setflags(write=False)
        ln.setflags(write=False)
        self.sign = sign
        self.ln = ln

    @classmethod
    def zeros(cls, size: int) -> "ScaledArray":
        return cls(np.zeros(size, dtype=np.int8), np.zeros(size))

    @classmethod
    def from_floats(cls, values) -> "ScaledArray":
        v = np.asarray(values, dtype=float)
        a = np.abs(v)
        with np.errstate(divide="ignore"):
            ln = np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), 0.0)
        return cls(np.sign(v).astype(np.int8), ln)

    def __len__(self):
        return len(self.sign)

    def __getitem__(self, j) -> SignedScaled:
        return SignedScaled.from_log(int(self.sign[j]), float(self.ln[j]))

    def __iter__(self):
        for j in range(len(self)):
            yield self[j]

    def max_log(self) -> float:
        nz = self.sign != 0
        return float(self.ln[nz].max()) if nz.any() else -math.inf

    def to_floats(self, shift: float = 0.0) -> np.ndarray:
        """Values times ``exp(-shift)`` as doubles."""
        with np.errstate(over="ignore", under="ignore"):
            return np.where(self.sign != 0, self.sign * np.exp(self.ln - shift), 0.0)

    def mul(self, other: "ScaledArray") -> "ScaledArray":
        return ScaledArray(self.sign * other.sign, self.ln + other.ln)

    def scale_log(self, delta) -> "ScaledArray":
        return ScaledArray(self.sign, self.ln + np.asarray(delta, dtype=float))

    def negate(self) -> "ScaledArray":
        return ScaledArray(-self.sign, self.ln)

    def __eq__(self, other):
        return (
            isinstance(other, ScaledArray)
            and np.array_equal(self.sign, other.sign)
            and np.array_equal(self.ln, other.ln)
        )

    def __repr__(self):
        return f"ScaledArray(len={len(self)}, max_log={self.max_log():.6g})"
