"""Exact scalars in Q or a single quadratic field Q(sqrt d).

A :class:`Scalar` is ``a + b*sqrt(d)`` with rational ``a``, ``b`` and squarefree
``d >= 2`` (``d == 1`` and ``b == 0`` for plain rationals).  All arithmetic and
all order comparisons are exact.  :class:`PowScalar` extends this to values of
the form ``base**exponent * factor`` with a rational exponent, which is what
weighted norms like ``|q|^(m k_j) * ||L_j(q) - alpha_j||`` produce; those are
compared exactly by raising both sides to a common integer power.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Iterable, Union

from .errors import MixedFieldError

Rational = Union[int, Fraction]

DEFAULT_BITS = 128


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, Scalar):
        if not x.is_rational:
            raise TypeError(f"{x} is irrational")
        return x.a
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


@lru_cache(maxsize=4096)
def squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(s, d)`` with ``n == s*s*d`` and ``d`` squarefree."""
    if n <= 0:
        raise ValueError("need a positive integer")
    r = math.isqrt(n)
    if r * r == n:
        return r, 1
    s, core, rest = 1, 1, n
    p = 2
    while p * p <= rest:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        if e:
            s *= p ** (e // 2)
            if e % 2:
                core *= p
        p += 1 if p == 2 else 2
    # what is left is 1 or a prime
    return s, core * rest


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for integers n >= 0, k >= 1."""
    if n < 0:
        raise ValueError("negative radicand")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def rpow_bounds(x: Rational, e: Rational, bits: int = DEFAULT_BITS) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= x**e <= hi`` with ``hi - lo <= 2**-bits``.

    Exact (``lo == hi``) whenever ``x**e`` is rational.
    """
    x = as_fraction(x)
    e = as_fraction(e)
    if x < 0:
        raise ValueError("negative base")
    if x == 0:
        if e <= 0:
            raise ZeroDivisionError("0 to a non-positive power")
        return Fraction(0), Fraction(0)
    if e < 0:
        x, e = 1 / x, -e
    p, q = e.numerator, e.denominator
    y = x ** p
    if q == 1:
        return y, y
    num, den = y.numerator, y.denominator
    rn, rd = iroot(num, q), iroot(den, q)
    if rn ** q == num and rd ** q == den:
        v = Fraction(rn, rd)
        return v, v
    K = bits + 2
    scaled = (num << (q * K)) // den
    r = iroot(scaled, q)
    lo = Fraction(r, 1 << K)
    hi = Fraction(r + 1, 1 << K)
    return lo, hi


def ceil_rpow(x: Rational, e: Rational) -> int:
    """Exact ceil(x**e) for rational x > 0."""
    x = as_fraction(x)
    e = as_fraction(e)
    if e < 0:
        x, e = 1 / x, -e
    p, q = e.numerator, e.denominator
    lo, _ = rpow_bounds(x, e, 16)
    c = max(0, math.floor(lo))
    target = x ** p
    while Fraction(c) ** q < target:
        c += 1
    while c > 0 and Fraction(c - 1) ** q >= target:
        c -= 1
    return c


def floor_rpow(x: Rational, e: Rational) -> int:
    """Exact floor(x**e) for rational x >= 0."""
    x = as_fraction(x)
    e = as_fraction(e)
    if x == 0:
        return 0
    if e < 0:
        x, e = 1 / x, -e
    p, q = e.numerator, e.denominator
    target = x ** p
    c = math.floor(rpow_bounds(x, e, 16)[0])
    while Fraction(c + 1) ** q <= target:
        c += 1
    while c > 0 and Fraction(c) ** q > target:
        c -= 1
    return c


@total_ordering
class Scalar:
    """Exact element ``a + b*sqrt(d)`` of Q or Q(sqrt d)."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a: Rational = 0, b: Rational = 0, d: int = 1):
        a = as_fraction(a)
        b = as_fraction(b)
        d = int(d)
        if b == 0:
            d = 1
        else:
            if d < 1:
                raise ValueError("d must be positive for a radical part")
            s, sf = squarefree_split(d)
            if sf == 1:
                a, b, d = a + b * s, Fraction(0), 1
            else:
                b, d = b * s, sf
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @classmethod
    def _raw(cls, a: Fraction, b: Fraction, d: int) -> "Scalar":
        # trusted fast path: d already squarefree and consistent with b
        obj = object.__new__(cls)
        object.__setattr__(obj, "a", a)
        object.__setattr__(obj, "b", b)
        object.__setattr__(obj, "d", d if b else 1)
        return obj

    @classmethod
    def sqrt(cls, n: int, coeff: Rational = 1) -> "Scalar":
        """``coeff * sqrt(n)`` for a non-negative integer n."""
        if n == 0:
            return cls(0)
        return cls(0, coeff, n)

    @classmethod
    def coerce(cls, x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        return cls._raw(as_fraction(x), Fraction(0), 1)

    # -- structure -----------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.b == 0

    @property
    def kind(self) -> str:
        return "rat" if self.is_rational else "quad"

    def _field(self, other: "Scalar") -> int:
        if self.d == 1:
            return other.d
        if other.d == 1 or other.d == self.d:
            return self.d
        raise MixedFieldError(f"Q(sqrt {self.d}) and Q(sqrt {other.d}) do not mix")

    def conjugate(self) -> "Scalar":
        return Scalar(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field(other)
        return Scalar._raw(self.a + other.a, self.b + other.b, d)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Scalar._raw(self.a * other, self.b * other, self.d)
        if not isinstance(other, Scalar):
            return NotImplemented
        d = self._field(other)
        return Scalar._raw(
            self.a * other.a + self.b * other.b * d,
            self.a * other.b + self.b * other.a,
            d,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Scalar(self.a / other, self.b / other, self.d)
        if not isinstance(other, Scalar):
            return NotImplemented
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero Scalar")
        return self * other.conjugate() * Fraction(1) / n

    def __rtruediv__(self, other):
        return Scalar.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return Scalar(1) / (self ** (-k))
        result, base = Scalar(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- order ---------------------------------------------------------
    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        sa = (a > 0) - (a < 0)
        sb = 1 if b > 0 else -1
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 d
        diff = a * a - b * b * self.d
        return sa if diff > 0 else sb

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.a == other.a and self.b == other.b and self.d == other.d
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __lt__(self, other):
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return (self - other).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    # -- rounding ------------------------------------------------------
    def enclosure(self, bits: int = DEFAULT_BITS) -> tuple[Fraction, Fraction]:
        """Rational ``lo <= self <= hi`` with ``hi - lo <= 2**(1-bits)``."""
        if self.b == 0:
            return self.a, self.a
        b = self.b
        # |b| sqrt(d) = sqrt(p^2 d) / q
        p, q = abs(b.numerator), b.denominator
        N = p * p * self.d
        s = math.isqrt(N << (2 * bits))
        lo = Fraction(s, q << bits)
        hi = Fraction(s + 1, q << bits)
        if b < 0:
            lo, hi = -hi, -lo
        return self.a + lo, self.a + hi

    def floor(self) -> int:
        if self.b == 0:
            return math.floor(self.a)
        bits = 64
        while True:
            lo, hi = self.enclosure(bits)
            flo, fhi = math.floor(lo), math.floor(hi)
            if flo == fhi:
                return flo
            # hi sits on an integer boundary; decide exactly
            if fhi == flo + 1:
                return flo if self < fhi else fhi
            bits *= 2

    def round_half_even(self) -> int:
        f = self.floor()
        frac = self - f
        c = (frac - Fraction(1, 2)).sign()
        if c < 0:
            return f
        if c > 0:
            return f + 1
        return f if f % 2 == 0 else f + 1

    def frac(self) -> "Scalar":
        return self - self.floor()

    def dist_to_int(self) -> "Scalar":
        f = self - self.floor()
        g = 1 - f
        return f if f <= g else g

    def __float__(self):
        if self.b == 0:
            return float(self.a)
        lo, hi = self.enclosure(80)
        return float((lo + hi) / 2)

    # -- text / json ---------------------------------------------------
    def __repr__(self):
        if self.b == 0:
            return f"Scalar({self.a})"
        return f"Scalar({self.a} + {self.b}*sqrt({self.d}))"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        sign = "+" if self.b > 0 else "-"
        return f"{self.a} {sign} {abs(self.b)}*sqrt({self.d})"

    def to_json(self) -> dict:
        if self.b == 0:
            return {"kind": "rat", "p": str(self.a.numerator), "q": str(self.a.denominator)}
        return {"kind": "quad", "a": str(self.a), "b": str(self.b), "d": self.d}

    @classmethod
    def from_json(cls, obj) -> "Scalar":
        if isinstance(obj, (int, str)):
            return cls(Fraction(obj))
        kind = obj["kind"]
        if kind == "rat":
            return cls(Fraction(int(obj["p"]), int(obj["q"])))
        if kind == "quad":
            return cls(Fraction(obj["a"]), Fraction(obj["b"]), int(obj["d"]))
        raise ValueError(f"unknown scalar kind {kind!r}")


def nearest_int_dist(s) -> Scalar:
    """Distance ``||s||`` from ``s`` to the nearest integer, exact."""
    return Scalar.coerce(s).dist_to_int()


def common_field(values: Iterable[Scalar]) -> int:
    d = 1
    for v in values:
        if v.d != 1:
            if d not in (1, v.d):
                raise MixedFieldError(f"Q(sqrt {d}) and Q(sqrt {v.d}) do not mix")
            d = v.d
    return d


@total_ordering
class PowScalar:
    """Exact positive real ``base**exponent * factor``.

    ``base`` and ``exponent`` are rationals, ``factor`` a non-negative
    :class:`Scalar`.  Comparisons raise both sides to the least common
    denominator of the exponents, which keeps everything inside Q(sqrt d).
    """

    __slots__ = ("base", "exponent", "factor")

    def __init__(self, base: Rational = 1, exponent: Rational = 1, factor=1):
        base = as_fraction(base)
        exponent = as_fraction(exponent)
        factor = Scalar.coerce(factor)
        if base < 0 or factor.sign() < 0:
            raise ValueError("PowScalar needs non-negative base and factor")
        if base == 0 and exponent <= 0:
            raise ZeroDivisionError("0 to a non-positive power")
        if base == 1 or base == 0 or exponent.denominator == 1:
            # fold rational powers into the factor
            factor = factor * (base ** exponent.numerator if exponent.denominator == 1 else base)
            base, exponent = Fraction(1), Fraction(1)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", exponent)
        object.__setattr__(self, "factor", factor)

    def __setattr__(self, name, value):
        raise AttributeError("PowScalar is immutable")

    def is_zero(self) -> bool:
        return not self.factor

    def times(self, s) -> "PowScalar":
        return PowScalar(self.base, self.exponent, self.factor * Scalar.coerce(s))

    def _powered(self, n: int) -> Scalar:
        e = self.exponent * n
        assert e.denominator == 1
        return (self.factor ** n) * (self.base ** int(e))

    def cmp(self, other) -> int:
        if not isinstance(other, PowScalar):
            other = PowScalar(1, 1, Scalar.coerce(other))
        if self.is_zero() or other.is_zero():
            return int(not self.is_zero()) - int(not other.is_zero())
        n = math.lcm(self.exponent.denominator, other.exponent.denominator)
        return (self._powered(n) - other._powered(n)).sign()

    def __eq__(self, other):
        if not isinstance(other, (PowScalar, Scalar, int, Fraction)):
            return NotImplemented
        return self.cmp(other) == 0

    def __lt__(self, other):
        if not isinstance(other, (PowScalar, Scalar, int, Fraction)):
            return NotImplemented
        return self.cmp(other) < 0

    __hash__ = None

    def exact(self) -> Scalar | None:
        """The value as a Scalar when the power is rational, else None."""
        if self.base == 1:
            return self.factor
        lo, hi = rpow_bounds(self.base, self.exponent, 8)
        if lo == hi:
            return self.factor * lo
        return None

    def enclosure(self, bits: int = DEFAULT_BITS) -> tuple[Fraction, Fraction]:
        flo, fhi = self.factor.enclosure(bits + 4)
        plo, phi = rpow_bounds(self.base, self.exponent, bits + 4)
        flo = max(flo, Fraction(0))
        return flo * plo, fhi * phi

    def __float__(self):
        lo, hi = self.enclosure(64)
        return float((lo + hi) / 2)

    def __repr__(self):
        if self.base == 1:
            return f"PowScalar({self.factor})"
        return f"PowScalar({self.base}**{self.exponent} * ({self.factor}))"

    def to_json(self) -> dict:
        lo, hi = self.enclosure(DEFAULT_BITS)
        out = {"base": str(self.base), "exponent": str(self.exponent),
               "factor": self.factor.to_json(),
               "lo": fmt_decimal(lo, 20), "hi": fmt_decimal(hi, 20, up=True)}
        return out


def fmt_decimal(x: Fraction, digits: int = 20, up: bool = False) -> str:
    """Decimal string rounded down (or up) at ``digits`` significant places."""
    x = as_fraction(x)
    if x == 0:
        return "0"
    neg = x < 0
    ax = -x if neg else x
    exp10 = math.floor(math.log10(ax.numerator) - math.log10(ax.denominator))
    shift = digits - 1 - exp10
    scaled = ax * Fraction(10) ** shift
    toward_up = up != neg
    n = math.ceil(scaled) if toward_up else math.floor(scaled)
    s = str(n)
    if shift > 0:
        s = s.rjust(shift + 1, "0")
        s = s[:-shift] + "." + s[-shift:]
        s = s.rstrip("0").rstrip(".")
    else:
        s = s + "0" * (-shift)
    return ("-" if neg else "") + s


def pow_max(values: Iterable[PowScalar]) -> PowScalar:
    it = iter(values)
    best = next(it)
    for v in it:
        if v.cmp(best) > 0:
            best = v
    return best
