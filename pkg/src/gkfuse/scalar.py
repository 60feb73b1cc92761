"""Exact Gaussian rationals a + b*i with a, b in Q."""
from __future__ import annotations

from fractions import Fraction


class Scalar:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @staticmethod
    def coerce(x) -> "Scalar":
        if type(x) is Scalar:
            return x
        if isinstance(x, (int, Fraction)):
            return Scalar(x)
        if isinstance(x, complex):
            return Scalar(Fraction(x.real), Fraction(x.imag))
        if isinstance(x, str):
            return parse_scalar(x)
        raise TypeError(f"cannot make a scalar from {x!r}")

    def __add__(self, other):
        if type(other) is not Scalar:
            other = Scalar.coerce(other)
        return Scalar(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is not Scalar:
            other = Scalar.coerce(other)
        return Scalar(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __mul__(self, other):
        if type(other) is not Scalar:
            other = Scalar.coerce(other)
        if not self.im and not other.im:
            return Scalar(self.re * other.re)
        return Scalar(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if not self.im:
            if not self.re:
                raise ZeroDivisionError("zero scalar has no inverse")
            return Scalar(1 / self.re)
        n = self.re * self.re + self.im * self.im
        return Scalar(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * Scalar.coerce(other).inverse()

    def __rtruediv__(self, other):
        return Scalar.coerce(other) * self.inverse()

    def conj(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if type(other) is not Scalar:
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"Scalar({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(x: Scalar) -> str:
    """Canonical text form: "a/b+c/d i", with zero parts dropped and "0" for zero."""
    if not x.im:
        return _frac(x.re)
    im = _frac(x.im) + " i"
    if not x.re:
        return im
    sign = "+" if x.im > 0 else ""
    return f"{_frac(x.re)}{sign}{im}"


def parse_scalar(text: str) -> Scalar:
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    try:
        if not s.endswith("i"):
            return Scalar(Fraction(s))
        body = s[:-1]
        cut = max(body.rfind("+"), body.rfind("-"))
        if cut > 0:
            re_txt, im_txt = body[:cut], body[cut:]
        else:
            re_txt, im_txt = "0", body
        if im_txt in ("", "+", "-"):
            im_txt += "1"
        return Scalar(Fraction(re_txt), Fraction(im_txt))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"malformed scalar {text!r}") from None
