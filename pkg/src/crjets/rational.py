"""Exact complex scalars a + b*i with arbitrary-precision rational parts."""

from __future__ import annotations

from fractions import Fraction


class ComplexRational:
    """Gaussian rational: real and imaginary parts are ``Fraction`` values.

    Immutable.  Equality is exact; there is no tolerance anywhere on this
    backend.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("ComplexRational is immutable")

    @staticmethod
    def coerce(value) -> "ComplexRational":
        if isinstance(value, ComplexRational):
            return value
        if isinstance(value, (int, Fraction)):
            return ComplexRational(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to ComplexRational")

    @property
    def is_zero(self) -> bool:
        return not self.re and not self.im

    @property
    def is_real(self) -> bool:
        return not self.im

    def conjugate(self) -> "ComplexRational":
        return ComplexRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        """Squared modulus, an exact rational."""
        return self.re * self.re + self.im * self.im

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __add__(self, other):
        other = ComplexRational.coerce(other)
        return ComplexRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return ComplexRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-ComplexRational.coerce(other))

    def __rsub__(self, other):
        return ComplexRational.coerce(other) + (-self)

    def __mul__(self, other):
        other = ComplexRational.coerce(other)
        return ComplexRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = ComplexRational.coerce(other)
        n = other.norm2()
        if not n:
            raise ZeroDivisionError("division by zero ComplexRational")
        return ComplexRational(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __rtruediv__(self, other):
        return ComplexRational.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("exponent must be an integer")
        if k < 0:
            return ComplexRational(1) / self ** (-k)
        result = ComplexRational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ComplexRational)):
            other = ComplexRational.coerce(other)
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero

    def __repr__(self):
        return f"ComplexRational({self.re!r}, {self.im!r})"

    def __str__(self):
        return format_scalar(self)


ZERO = ComplexRational(0)
ONE = ComplexRational(1)
I = ComplexRational(0, 1)


def format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(c) -> str:
    """Render a coefficient in the series-literal grammar (exact backend)
    or as a float pair (float backend, for report witnesses only)."""
    if isinstance(c, ComplexRational):
        if not c.im:
            return format_fraction(c.re)
        if not c.re:
            return f"{format_fraction(c.im)}*i"
        sign = "+" if c.im > 0 else "-"
        return f"({format_fraction(c.re)}{sign}{format_fraction(abs(c.im))}*i)"
    z = complex(c)
    if z.imag == 0.0:
        return repr(z.real)
    return f"({z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}*i)"


def _int_kth_root(n: int, k: int):
    """Exact integer k-th root of n >= 0, or None."""
    if n < 0:
        return None
    if n in (0, 1):
        return n
    lo, hi = 0, 1
    while hi**k < n:
        hi <<= 1
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**k < n:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo**k == n else None


def fraction_kth_root(q: Fraction, k: int):
    """Exact k-th root of a nonnegative rational, or None if irrational."""
    if q < 0:
        return None
    num = _int_kth_root(q.numerator, k)
    den = _int_kth_root(q.denominator, k)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def gaussian_sqrt(c: ComplexRational):
    """Principal square root when it stays in the Gaussian rationals, else None."""
    if c.is_zero:
        return ZERO
    if not c.im:
        r = fraction_kth_root(abs(c.re), 2)
        if r is None:
            return None
        # principal branch: sqrt of a negative real is purely imaginary with im > 0
        return ComplexRational(r) if c.re > 0 else ComplexRational(0, r)
    n = fraction_kth_root(c.norm2(), 2)
    if n is None:
        return None
    x2 = (n + c.re) / 2
    x = fraction_kth_root(x2, 2)
    if x is None or x == 0:
        return None
    y = c.im / (2 * x)
    return ComplexRational(x, y)


def gaussian_kth_root(c: ComplexRational, k: int):
    """Principal k-th root when it stays in the field.

    Covers positive reals for any k and powers of two via iterated square
    roots; returns None otherwise (the caller falls back to floats).
    """
    if k <= 0:
        raise ValueError("root index must be positive")
    if k == 1:
        return c
    if c.is_zero:
        return ZERO
    if not c.im and c.re > 0:
        r = fraction_kth_root(c.re, k)
        if r is not None:
            return ComplexRational(r)
    if k % 2 == 0:
        s = gaussian_sqrt(c)
        if s is None:
            return None
        return gaussian_kth_root(s, k // 2)
    return None
