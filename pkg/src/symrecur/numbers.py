"""Exact real numbers of the form a + b*sqrt(d) with rational a, b.

Alpha-beta endpoints are affine images of 0 and 1 under x -> beta*x + alpha - j,
so when alpha and beta live in one quadratic field every endpoint does too and
vertex identity in the Markov diagram can be decided exactly.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from typing import Union

from .errors import RecurError

Number = Union[int, Fraction, "Surd"]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        # decimal literal semantics: 0.1 means 1/10, not the nearest binary64
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


@total_ordering
class Surd:
    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = 0):
        a, b = _as_fraction(a), _as_fraction(b)
        if b == 0 or d == 0:
            d, b = 0, Fraction(0)
        elif d < 2 or math.isqrt(d) ** 2 == d:
            raise RecurError(f"radicand must be a non-square integer >= 2, got {d}")
        self.a, self.b, self.d = a, b, d

    @classmethod
    def coerce(cls, x) -> "Surd":
        return x if isinstance(x, Surd) else cls(_as_fraction(x))

    def _field(self, other: "Surd") -> int:
        if self.d and other.d and self.d != other.d:
            raise RecurError(f"mixing sqrt({self.d}) and sqrt({other.d})")
        return self.d or other.d

    def __add__(self, other):
        o = Surd.coerce(other)
        return Surd(self.a + o.a, self.b + o.b, self._field(o))

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-Surd.coerce(other))

    def __rsub__(self, other):
        return Surd.coerce(other) - self

    def __mul__(self, other):
        o = Surd.coerce(other)
        d = self._field(o)
        return Surd(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def inverse(self) -> "Surd":
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise ZeroDivisionError("division by zero surd")
        return Surd(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other):
        return self * Surd.coerce(other).inverse()

    def __rtruediv__(self, other):
        return Surd.coerce(other) * self.inverse()

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0 or sa == sb:
            return sa or sb
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with b^2 d
        diff = self.a * self.a - self.b * self.b * self.d
        return sa if diff > 0 else (-sa if diff < 0 else 0)

    def __eq__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        return (self - other).sign() == 0

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def floor(self) -> int:
        n = math.floor(float(self))
        while Surd(n) > self:
            n -= 1
        while Surd(n + 1) <= self:
            n += 1
        return n

    def key(self) -> tuple:
        """Hashable exact identity."""
        return (self.a, self.b, self.d)

    def __repr__(self):
        if self.d == 0:
            return f"{self.a}"
        return f"({self.a} + {self.b}*sqrt({self.d}))"


GOLDEN = Surd(Fraction(1, 2), Fraction(1, 2), 5)

_SURD_RE = re.compile(
    r"^\(?\s*(?P<a>[-+]?[\d./]+)?\s*(?:(?P<sign>[-+])\s*)?(?:(?P<b>[\d./]+)\s*\*?\s*)?sqrt\(?(?P<d>\d+)\)?\s*\)?"
    r"\s*(?:/\s*(?P<den>[\d.]+))?$"
)


def parse_number(text) -> Surd:
    """Parse ``"0.5"``, ``"5/2"``, ``"phi"`` or ``"(1+sqrt(5))/2"`` style input."""
    if isinstance(text, Surd):
        return text
    if isinstance(text, (int, float, Fraction)):
        return Surd(_as_fraction(text))
    s = str(text).strip().lower().replace(" ", "")
    if s in ("phi", "golden"):
        return GOLDEN
    if "sqrt" not in s:
        try:
            return Surd(Fraction(s))
        except ValueError as exc:
            raise RecurError(f"cannot parse number {text!r}") from exc
    m = _SURD_RE.match(s)
    if not m:
        raise RecurError(f"cannot parse number {text!r}")
    a = Fraction(m["a"]) if m["a"] else Fraction(0)
    b = Fraction(m["b"]) if m["b"] else Fraction(1)
    if m["sign"] == "-":
        b = -b
    den = Fraction(m["den"]) if m["den"] else Fraction(1)
    return Surd(a / den, b / den, int(m["d"]))
