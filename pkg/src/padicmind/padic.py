"""Fixed-precision p-adic numbers.

A nonzero value is stored as ``p**valuation * unit`` where ``unit`` is an
integer coprime to ``p`` known modulo ``p**prec`` (``prec <= K`` relative
digits).  Cancellation in addition lowers ``prec``; nothing is silently
invented below the known digits.  Zero is a distinguished value: exact, or
known only modulo ``p**abs_prec`` after cancellation.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational


class PrecisionError(ArithmeticError):
    """Raised when a result would depend on digits that are not known."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def valuation_of_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class BaseConfig:
    """Coding base ``p`` (prime) and digit precision ``K``."""

    p: int
    K: int = 20

    def __post_init__(self):
        if not isinstance(self.p, Integral) or not is_prime(int(self.p)):
            raise ValueError(f"p must be prime, got {self.p!r}")
        if not isinstance(self.K, Integral) or self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K!r}")


class PadicNumber:
    """An element of Q_p at fixed relative precision.

    Instances are immutable.  Use :func:`encode` or :meth:`from_digits` to
    build values; arithmetic operators follow the usual Python protocol and
    accept plain ints / Fractions on either side.
    """

    __slots__ = ("_cfg", "_v", "_u", "_prec")

    def __init__(self, cfg: BaseConfig, valuation, unit: int, prec: int | None):
        # internal constructor; callers should go through encode/from_digits
        object.__setattr__(self, "_cfg", cfg)
        object.__setattr__(self, "_v", valuation)
        object.__setattr__(self, "_u", unit)
        object.__setattr__(self, "_prec", prec)

    def __setattr__(self, name, value):
        raise AttributeError("PadicNumber is immutable")

    # -- construction -------------------------------------------------

    @classmethod
    def zero(cls, cfg: BaseConfig, abs_prec: int | None = None) -> "PadicNumber":
        """Exact zero, or a zero known only modulo ``p**abs_prec``."""
        return cls(cfg, None, 0, abs_prec)

    @classmethod
    def _make(cls, cfg: BaseConfig, v: int, u: int, prec: int) -> "PadicNumber":
        """Normalize ``p**v * u`` with ``u`` known mod ``p**prec``."""
        p = cfg.p
        prec = min(prec, cfg.K)
        if prec <= 0:
            return cls.zero(cfg, v)
        u %= p**prec
        if u == 0:
            return cls.zero(cfg, v + prec)
        t = valuation_of_int(u, p)
        u //= p**t
        v += t
        prec = min(prec - t, cfg.K)
        return cls(cfg, v, u % p**prec, prec)

    @classmethod
    def from_digits(cls, cfg: BaseConfig, valuation: int, digits, prec: int | None = None):
        """Build ``sum(d_i p**(valuation+i))`` from a digit sequence.

        Leading zero digits are absorbed into the valuation.
        """
        p = cfg.p
        digits = list(digits)
        if any(not 0 <= d < p for d in digits):
            raise ValueError(f"digits must lie in [0, {p - 1}]")
        if prec is None:
            prec = cfg.K
        if len(digits) > cfg.K:
            digits = digits[: cfg.K]
        u = sum(d * p**i for i, d in enumerate(digits))
        if u == 0 and prec >= cfg.K and len(digits) <= cfg.K:
            return cls.zero(cfg)
        return cls._make(cfg, valuation, u, prec)

    # -- accessors ----------------------------------------------------

    @property
    def config(self) -> BaseConfig:
        return self._cfg

    @property
    def p(self) -> int:
        return self._cfg.p

    @property
    def valuation(self):
        """Valuation ``v`` (``None`` for zero)."""
        return self._v

    @property
    def is_zero(self) -> bool:
        return self._v is None

    @property
    def precision(self) -> int:
        """Number of reliable relative digits (0 for zero)."""
        return 0 if self.is_zero else self._prec

    @property
    def absolute_precision(self) -> float:
        """Exponent ``a`` such that the value is known modulo ``p**a``."""
        if self.is_zero:
            return math.inf if self._prec is None else self._prec
        return self._v + self._prec

    @property
    def is_exact_zero(self) -> bool:
        return self.is_zero and self._prec is None

    @property
    def unit(self) -> int:
        return self._u

    @property
    def digits(self) -> tuple:
        """K digits starting at the valuation; unknown digits read as 0."""
        p, K = self.p, self._cfg.K
        u = self._u
        out = []
        for _ in range(K):
            out.append(u % p)
            u //= p
        return tuple(out)

    def digit(self, i: int) -> int:
        """Coefficient of ``p**i`` in the expansion."""
        if self.is_zero:
            if i >= self.absolute_precision:
                raise PrecisionError(f"digit {i} of an inexact zero is unknown")
            return 0
        if i < self._v:
            return 0
        if i >= self._v + self._prec:
            raise PrecisionError(f"digit {i} is beyond known precision")
        return (self._u // self.p ** (i - self._v)) % self.p

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            if other._cfg != self._cfg:
                raise ValueError(f"config mismatch: {self._cfg} vs {other._cfg}")
            return other
        if isinstance(other, (Integral, Rational)):
            return _encode_any(other, self._cfg)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_exact_zero:
            return other
        if other.is_exact_zero:
            return self
        a = min(self.absolute_precision, other.absolute_precision)
        if self.is_zero or other.is_zero:
            nz = other if self.is_zero else self
            if nz.is_zero:
                return PadicNumber.zero(self._cfg, a)
            return PadicNumber._make(self._cfg, nz._v, nz._u, a - nz._v)
        vmin = min(self._v, other._v)
        p = self.p
        s = self._u * p ** (self._v - vmin) + other._u * p ** (other._v - vmin)
        return PadicNumber._make(self._cfg, vmin, s, a - vmin)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero:
            return self
        return PadicNumber(self._cfg, self._v, (-self._u) % self.p**self._prec, self._prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        cfg = self._cfg
        if self.is_exact_zero or other.is_exact_zero:
            return PadicNumber.zero(cfg)
        if self.is_zero or other.is_zero:
            z, nz = (self, other) if self.is_zero else (other, self)
            if nz.is_zero:
                return PadicNumber.zero(cfg, z._prec + nz._prec)
            return PadicNumber.zero(cfg, z._prec + nz._v)
        prec = min(self._prec, other._prec)
        return PadicNumber._make(cfg, self._v + other._v, self._u * other._u, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNumber":
        if self.is_zero:
            raise ZeroDivisionError("p-adic division by zero")
        m = self.p**self._prec
        return PadicNumber(self._cfg, -self._v, pow(self._u, -1, m), self._prec)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, Integral):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return encode(1, self._cfg)
        if self.is_zero:
            if self.is_exact_zero:
                return self
            return PadicNumber.zero(self._cfg, self._prec * n)
        m = self.p**self._prec
        return PadicNumber(self._cfg, self._v * n, pow(self._u, n, m), self._prec)

    def shift(self, k: int) -> "PadicNumber":
        """Multiply by ``p**k`` exactly."""
        if self.is_zero:
            return self if self.is_exact_zero else PadicNumber.zero(self._cfg, self._prec + k)
        return PadicNumber(self._cfg, self._v + k, self._u, self._prec)

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except ValueError:
            return False
        if other is NotImplemented:
            return other
        d = self - other
        return d.is_zero

    __hash__ = None

    # -- analysis -----------------------------------------------------

    def norm(self) -> Fraction:
        """``|x|_p = p**(-v)``; zero has norm 0."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(1, self.p**self._v) if self._v >= 0 else Fraction(self.p ** (-self._v))

    def frac(self) -> Fraction:
        """Fractional part ``{x}`` as an exact rational in [0, 1)."""
        if self.is_zero or self._v >= 0:
            if self.is_zero and self.absolute_precision < 0:
                raise PrecisionError("fractional part of an inexact zero below p^0")
            return Fraction(0)
        if self._v + self._prec < 0:
            raise PrecisionError("fractional part needs digits beyond known precision")
        q = self.p ** (-self._v)
        return Fraction(self._u % q, q)

    def character(self) -> complex:
        """``e(x) = exp(2 pi i {x})``."""
        f = self.frac()
        if f == 0:
            return 1 + 0j
        if f == Fraction(1, 2):
            return -1 + 0j
        return cmath.exp(2j * math.pi * f)

    def to_fraction(self) -> Fraction:
        """Rational value of the known digits (truncated expansion)."""
        if self.is_zero:
            return Fraction(0)
        return self._u * Fraction(self.p) ** self._v

    # -- text ---------------------------------------------------------

    def __str__(self):
        p, K = self.p, self._cfg.K
        if self.is_exact_zero:
            return f"{p}^inf * ({' '.join('0' * K)})_{p}"
        if self.is_zero:
            return f"{p}^{self._prec} * ({' '.join('?' * K)})_{p}"
        shown = [str(d) for d in self.digits[: self._prec]] + ["?"] * (K - self._prec)
        return f"{p}^{self._v} * ({' '.join(shown)})_{p}"

    def __repr__(self):
        return f"PadicNumber({self})"


def _encode_any(value, cfg: BaseConfig) -> PadicNumber:
    p = cfg.p
    if isinstance(value, Integral):
        n = int(value)
        if n == 0:
            return PadicNumber.zero(cfg)
        v = valuation_of_int(n, p)
        return PadicNumber._make(cfg, v, n // p**v, cfg.K)
    q = Fraction(value)
    if q.denominator == 1:
        return _encode_any(q.numerator, cfg)
    if q.denominator % p == 0:
        raise ValueError(f"denominator {q.denominator} is divisible by p={p}")
    a, b = q.numerator, q.denominator
    v = valuation_of_int(a, p)
    m = p**cfg.K
    return PadicNumber._make(cfg, v, (a // p**v) * pow(b, -1, m), cfg.K)


def encode(value, cfg: BaseConfig) -> PadicNumber:
    """Encode an integer or a rational ``a/b`` with ``p`` not dividing ``b``."""
    if isinstance(value, bool) or not isinstance(value, (Integral, Rational)):
        raise TypeError(f"cannot encode {type(value).__name__}")
    return _encode_any(value, cfg)


def arith(x: PadicNumber, y: PadicNumber, kind: str) -> PadicNumber:
    if x.config != y.config:
        raise ValueError("config mismatch")
    if kind == "add":
        return x + y
    if kind == "sub":
        return x - y
    if kind == "mul":
        return x * y
    if kind == "div":
        return x / y
    raise ValueError(f"unknown operation {kind!r}")


def norm(x: PadicNumber) -> Fraction:
    return x.norm()


def distance(x: PadicNumber, y: PadicNumber) -> Fraction:
    """Ultrametric ``rho_p(x, y) = |x - y|_p``."""
    if x.config != y.config:
        raise ValueError("config mismatch")
    return (x - y).norm()


def frac(x: PadicNumber) -> Fraction:
    return x.frac()


def character(x: PadicNumber) -> complex:
    return x.character()


_TEXT = re.compile(r"^\s*(\d+)\^(-?\d+|inf)\s*\*\s*\(([^)]*)\)_(\d+)\s*$")


def parse(text: str, K: int | None = None) -> PadicNumber:
    """Parse the ``p^v * (d0 d1 ...)_p`` form produced by ``str``."""
    m = _TEXT.match(text)
    if not m:
        raise ValueError(f"malformed p-adic literal: {text!r}")
    p1, v, body, p2 = m.groups()
    if p1 != p2:
        raise ValueError(f"base mismatch in {text!r}")
    toks = body.split()
    cfg = BaseConfig(int(p1), K if K is not None else len(toks))
    if v == "inf":
        return PadicNumber.zero(cfg)
    v = int(v)
    if all(t == "?" for t in toks):
        return PadicNumber.zero(cfg, v)
    known = []
    for t in toks:
        if t == "?":
            break
        known.append(int(t))
    if len(known) < len(toks) and any(t != "?" for t in toks[len(known):]):
        raise ValueError("unknown digits must be trailing")
    if not known or known[0] == 0:
        raise ValueError("leading digit of a nonzero literal must be nonzero")
    return PadicNumber.from_digits(cfg, v, known, prec=len(known))


@dataclass(frozen=True)
class Ball:
    """Closed ball ``B_{p^m}(center) = {x : |x - center|_p <= p^m}``."""

    center: PadicNumber
    m: int

    @property
    def radius(self) -> Fraction:
        p = self.center.p
        return Fraction(p) ** self.m

    def contains(self, x: PadicNumber) -> bool:
        return distance(x, self.center) <= self.radius


def ball_relation(b1: Ball, b2: Ball) -> str:
    """One of ``'disjoint'``, ``'equal'``, ``'subset'`` (b1 in b2), ``'superset'``."""
    if b1.center.config != b2.center.config:
        raise ValueError("config mismatch")
    d = distance(b1.center, b2.center)
    big = max(b1.radius, b2.radius)
    if d > big:
        return "disjoint"
    if b1.m == b2.m:
        return "equal"
    return "subset" if b1.m < b2.m else "superset"
