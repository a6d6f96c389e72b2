"""Scalar arithmetic for the two computation modes.

Grids are either float mode (numpy complex128) or exact mode, where every
entry is a :class:`QC` -- a complex number with rational real and imaginary
parts backed by :class:`fractions.Fraction`.  Exact mode is what makes the
identity checks in this package *identities*: round trips, telescoping sums
and Abel rearrangements are asserted with zero error, not with a tolerance.

Ordering of complex values (needed for sup-style norms) is done on the
squared modulus, which is exact in both modes.  The modulus itself is exact
only when sqrt(re^2 + im^2) is rational; :func:`abs_value` returns a Fraction
in that case and a float otherwise.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

MODES = ("float", "exact")


class QC:
    """Complex number with exact rational components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, QC):
            return other
        if isinstance(other, (int, Fraction)):
            return QC(other)
        if isinstance(other, complex):
            # only exact-representable complexes may enter exact arithmetic
            return QC(Fraction(other.real), Fraction(other.imag))
        if isinstance(other, float):
            return QC(Fraction(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QC(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QC(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QC(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QC(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero in exact mode")
        return QC((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o.__truediv__(self)

    def __neg__(self):
        return QC(-self.re, -self.im)

    def __pos__(self):
        return self

    # -- comparison / conversion --------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QC({self.re}, {self.im})"

    def conjugate(self):
        return QC(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im


Scalar = Union[QC, complex, float, int, Fraction]


def coerce(value, mode: str):
    """Coerce a number into the scalar type of the given mode."""
    if mode == "exact":
        if isinstance(value, QC):
            return value
        if isinstance(value, complex):
            return QC(Fraction(value.real), Fraction(value.imag))
        return QC(value)
    if isinstance(value, QC):
        return complex(value)
    return complex(value)


def zero(mode: str):
    return QC() if mode == "exact" else 0j


def one(mode: str):
    return QC(1) if mode == "exact" else 1 + 0j


def abs2(value) -> Union[Fraction, float]:
    """Squared modulus; exact for QC."""
    if isinstance(value, QC):
        return value.abs2()
    v = complex(value)
    return v.real * v.real + v.imag * v.imag


def _rational_sqrt(q: Fraction):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def abs_value(value) -> Union[Fraction, float]:
    """Modulus of a scalar; a Fraction when exactly representable."""
    if isinstance(value, QC):
        if value.im == 0:
            return abs(value.re)
        if value.re == 0:
            return abs(value.im)
        r = _rational_sqrt(value.abs2())
        return r if r is not None else math.sqrt(float(value.abs2()))
    return abs(complex(value))


def to_float_scalar(value) -> complex:
    return complex(value) if isinstance(value, QC) else complex(value)


def parse_number(text: str, mode: str):
    """Parse a scalar literal: "3", "-1/2", "2.5", "1+2j", "3/4-1/2j"."""
    t = text.strip().replace(" ", "")
    if not t:
        raise ValueError("empty number literal")
    if t.endswith("j"):
        body = t[:-1]
        # split into real and imaginary parts at the last +/- that is not leading
        split = -1
        for i in range(len(body) - 1, 0, -1):
            if body[i] in "+-" and body[i - 1] not in "eE/":
                split = i
                break
        if split == -1:
            re_part, im_part = "0", body or "1"
        else:
            re_part, im_part = body[:split], body[split:]
            if im_part in ("+", "-"):
                im_part += "1"
        re_v = _parse_real(re_part)
        im_v = _parse_real(im_part)
        if mode == "exact":
            return QC(re_v, im_v)
        return complex(float(re_v), float(im_v))
    v = _parse_real(t)
    return QC(v) if mode == "exact" else complex(float(v))


def _parse_real(text: str) -> Fraction:
    t = text.strip()
    if not t or t in ("+", "-"):
        raise ValueError(f"bad real literal: {text!r}")
    if "/" in t:
        num, den = t.split("/")
        return Fraction(int(num), int(den))
    return Fraction(t)


def format_number(value) -> str:
    """Inverse of :func:`parse_number`, stable for CSV round trips."""
    if isinstance(value, QC):
        if value.im == 0:
            return str(value.re)
        sign = "+" if value.im >= 0 else "-"
        return f"{value.re}{sign}{abs(value.im)}j"
    v = complex(value)
    if v.imag == 0:
        return repr(v.real)
    sign = "+" if v.imag >= 0 else "-"
    return f"{v.real!r}{sign}{abs(v.imag)!r}j"
