"""Exact arithmetic in Q(sqrt5) over arbitrary-precision rationals."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Fraction
SQRT5_FLOAT = math.sqrt(5.0)

Scalar = Union[int, Fraction]


class NegativeRadicand(ValueError):
    pass


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    raise TypeError(f"cannot convert {type(v).__name__} to an exact rational")


@dataclass(frozen=True)
class AlgebraicNumber:
    """The number rat + irr*sqrt5; both parts are canonical Fractions."""

    rat: Fraction = Fraction(0)
    irr: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "rat", _as_fraction(self.rat))
        object.__setattr__(self, "irr", _as_fraction(self.irr))

    @classmethod
    def coerce(cls, v) -> "AlgebraicNumber":
        if isinstance(v, AlgebraicNumber):
            return v
        if isinstance(v, str):
            return parse(v)
        return cls(_as_fraction(v), Fraction(0))

    # arithmetic
    def __add__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return AlgebraicNumber(self.rat + other.rat, self.irr + other.irr)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicNumber(-self.rat, -self.irr)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return AlgebraicNumber(self.rat - other.rat, self.irr - other.irr)

    def __rsub__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        a, b, c, d = self.rat, self.irr, other.rat, other.irr
        return AlgebraicNumber(a * c + 5 * b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return other * self.inv()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inv() ** (-k)
        result = ONE
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "AlgebraicNumber":
        return AlgebraicNumber(self.rat, -self.irr)

    def norm(self) -> Fraction:
        return self.rat * self.rat - 5 * self.irr * self.irr

    def inv(self) -> "AlgebraicNumber":
        n = self.norm()
        if n == 0:
            # norm vanishes only at zero since sqrt5 is irrational
            raise ZeroDivisionError("inverse of zero in Q(sqrt5)")
        return AlgebraicNumber(self.rat / n, -self.irr / n)

    # ordering
    def sign(self) -> int:
        return sign(self)

    def __eq__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return self.rat == other.rat and self.irr == other.irr

    def __hash__(self):
        if self.irr == 0:
            return hash(self.rat)
        return hash((self.rat, self.irr))

    def __lt__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return sign(self - other) < 0

    def __le__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return sign(self - other) <= 0

    def __gt__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return sign(self - other) > 0

    def __ge__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return sign(self - other) >= 0

    def __abs__(self):
        return -self if sign(self) < 0 else self

    def __bool__(self):
        return self.rat != 0 or self.irr != 0

    def __float__(self):
        return to_float(self)

    def is_rational(self) -> bool:
        return self.irr == 0

    def __str__(self):
        return format_number(self)

    def __repr__(self):
        return f"AlgebraicNumber({format_number(self)!r})"


def _coerce_or_none(v):
    if isinstance(v, AlgebraicNumber):
        return v
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        return AlgebraicNumber(Fraction(v), Fraction(0))
    return None


ZERO = AlgebraicNumber(0, 0)
ONE = AlgebraicNumber(1, 0)
SQRT5 = AlgebraicNumber(0, 1)


def an(rat: Scalar = 0, irr: Scalar = 0) -> AlgebraicNumber:
    """Shorthand constructor: an(p, q) = p + q*sqrt5."""
    return AlgebraicNumber(Fraction(rat), Fraction(irr))


def add(x: AlgebraicNumber, y: AlgebraicNumber) -> AlgebraicNumber:
    return x + y


def mul(x: AlgebraicNumber, y: AlgebraicNumber) -> AlgebraicNumber:
    return x * y


def inv(x: AlgebraicNumber) -> AlgebraicNumber:
    return x.inv()


def sign(x: AlgebraicNumber) -> int:
    """Exact sign of rat + irr*sqrt5."""
    x = AlgebraicNumber.coerce(x)
    sa = (x.rat > 0) - (x.rat < 0)
    sb = (x.irr > 0) - (x.irr < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: whichever of rat^2 and 5*irr^2 is larger decides
    lhs = x.rat * x.rat
    rhs = 5 * x.irr * x.irr
    if lhs > rhs:
        return sa
    return sb


def to_float(x: AlgebraicNumber) -> float:
    x = AlgebraicNumber.coerce(x)
    if x.irr == 0:
        return float(x.rat)
    if x.rat == 0:
        return float(x.irr) * SQRT5_FLOAT
    if (x.rat > 0) == (x.irr > 0):
        return float(x.rat) + float(x.irr) * SQRT5_FLOAT
    # cancellation-free form via the conjugate
    denom = float(x.rat) - float(x.irr) * SQRT5_FLOAT
    return float(x.norm()) / denom


def sqrt_to_float(x: AlgebraicNumber) -> float:
    x = AlgebraicNumber.coerce(x)
    if sign(x) < 0:
        raise NegativeRadicand(f"square root of negative value {x}")
    return math.sqrt(to_float(x))


def _format_fraction(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_number(x: AlgebraicNumber) -> str:
    """Serialize as "p/q + r/s*sqrt5", omitting zero parts."""
    if x.irr == 0:
        return _format_fraction(x.rat)
    coeff = abs(x.irr)
    irr = "sqrt5" if coeff == 1 else _format_fraction(coeff) + "*sqrt5"
    if x.rat == 0:
        return irr if x.irr > 0 else "-" + irr
    op = "+" if x.irr > 0 else "-"
    return f"{_format_fraction(x.rat)} {op} {irr}"


_TERM_RE = re.compile(
    r"\s*([+-])?\s*(\d+(?:/\d+)?)?\s*(\*?\s*sqrt\(?5\)?)?\s*"
)


def parse(text: str) -> AlgebraicNumber:
    """Parse "p/q + r/s*sqrt5"; accepts integers, "sqrt5", "-3*sqrt5" etc."""
    s = text.strip().replace("√5", "sqrt5")
    if not s:
        raise ValueError("empty algebraic number")
    rat = Fraction(0)
    irr = Fraction(0)
    pos = 0
    seen = False
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse algebraic number {text!r}")
        sgn, num, root = m.groups()
        if num is None and root is None:
            if m.group(0).strip():
                raise ValueError(f"cannot parse algebraic number {text!r}")
            break
        if seen and sgn is None:
            raise ValueError(f"missing operator in {text!r}")
        value = Fraction(num) if num is not None else Fraction(1)
        if sgn == "-":
            value = -value
        if root is not None:
            irr += value
        else:
            rat += value
        seen = True
        pos = m.end()
    if not seen:
        raise ValueError(f"cannot parse algebraic number {text!r}")
    return AlgebraicNumber(rat, irr)
