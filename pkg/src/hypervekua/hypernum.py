"""Arithmetic for the commutative ring of hyperbolic (split-complex) numbers.

A hyperbolic number is z = x + j t with j*j = +1.  The ring has zero
divisors exactly on the light cone |x| = |t|, so inversion is partial and
guarded by an explicit zero-divisor test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ZeroDivisor

# Relative guard around the light cone: derived quantities that land within
# this band of |re| == |im| are treated as zero divisors.
LIGHT_CONE_EPS = 1e-14


@dataclass(frozen=True, slots=True)
class HyperbolicNumber:
    """Element x + j t of the hyperbolic plane, with j*j = 1."""

    re: float = 0.0
    im: float = 0.0

    def __add__(self, other):
        other = _coerce(other)
        return HyperbolicNumber(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return HyperbolicNumber(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        return HyperbolicNumber(
            self.re * other.re + self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * inverse(_coerce(other))

    def __rtruediv__(self, other):
        return _coerce(other) * inverse(self)

    def __neg__(self):
        return HyperbolicNumber(-self.re, -self.im)

    def __abs__(self):
        """Componentwise max norm (the hyperbolic modulus is degenerate)."""
        return max(abs(self.re), abs(self.im))

    def conj(self):
        return HyperbolicNumber(self.re, -self.im)

    def is_zero_divisor(self) -> bool:
        gap = abs(abs(self.re) - abs(self.im))
        return gap <= LIGHT_CONE_EPS * max(abs(self.re), abs(self.im))

    def is_invertible(self) -> bool:
        return not self.is_zero_divisor()

    def to_json_pair(self):
        return [self.re, self.im]

    @staticmethod
    def from_json_pair(pair) -> "HyperbolicNumber":
        re, im = pair
        return HyperbolicNumber(float(re), float(im))

    def __repr__(self):
        sign = "+" if self.im >= 0 else "-"
        return f"({self.re:g} {sign} {abs(self.im):g}j)"


ONE = HyperbolicNumber(1.0, 0.0)
ZERO = HyperbolicNumber(0.0, 0.0)
J = HyperbolicNumber(0.0, 1.0)


def _coerce(value) -> HyperbolicNumber:
    if isinstance(value, HyperbolicNumber):
        return value
    if isinstance(value, (int, float)):
        return HyperbolicNumber(float(value), 0.0)
    raise TypeError(f"cannot interpret {value!r} as a hyperbolic number")


def hyper(re, im=0.0) -> HyperbolicNumber:
    """Convenience constructor accepting floats, pairs, or passthrough."""
    if isinstance(re, HyperbolicNumber):
        return re
    if isinstance(re, (tuple, list)):
        re, im = re
    return HyperbolicNumber(float(re), float(im))


def mul(a: HyperbolicNumber, b: HyperbolicNumber) -> HyperbolicNumber:
    return _coerce(a) * _coerce(b)


def conj(a: HyperbolicNumber) -> HyperbolicNumber:
    return _coerce(a).conj()


def inverse(a: HyperbolicNumber) -> HyperbolicNumber:
    """Multiplicative inverse conj(a) / (re^2 - im^2).

    Raises ZeroDivisor on the light cone |re| = |im|, which includes 0.
    """
    a = _coerce(a)
    if a.is_zero_divisor():
        raise ZeroDivisor(f"{a!r} lies on the light cone and has no inverse")
    q = a.re * a.re - a.im * a.im
    return HyperbolicNumber(a.re / q, -a.im / q)


def modulus_squared(a: HyperbolicNumber) -> float:
    """a * conj(a), always real: re^2 - im^2.  Negative inside the cone."""
    a = _coerce(a)
    return a.re * a.re - a.im * a.im


@dataclass(frozen=True, slots=True)
class IdempotentCoords:
    """Coordinates in the idempotent basis e+ = (1+j)/2, e- = (1-j)/2.

    Multiplication acts componentwise here, which is what makes the basis
    useful for fast invertibility checks.
    """

    p: float
    q: float

    def to_hyper(self) -> HyperbolicNumber:
        return HyperbolicNumber((self.p + self.q) / 2.0, (self.p - self.q) / 2.0)


def to_idempotent(a: HyperbolicNumber) -> IdempotentCoords:
    a = _coerce(a)
    return IdempotentCoords(a.re + a.im, a.re - a.im)


def from_idempotent(coords: IdempotentCoords) -> HyperbolicNumber:
    return coords.to_hyper()


def exp(a: HyperbolicNumber) -> HyperbolicNumber:
    """Hyperbolic exponential: exp(x + jt) = e^x (cosh t + j sinh t)."""
    a = _coerce(a)
    scale = math.exp(a.re)
    return HyperbolicNumber(scale * math.cosh(a.im), scale * math.sinh(a.im))


def power(a: HyperbolicNumber, n: int) -> HyperbolicNumber:
    """Integer power by repeated multiplication (n >= 0)."""
    if n < 0:
        raise ValueError("negative exponents are not part of the ring API")
    out = ONE
    base = _coerce(a)
    for _ in range(n):
        out = out * base
    return out
