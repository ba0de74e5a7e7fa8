import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dioph.algebraic import (
    ONE,
    ZERO,
    AlgebraicNumber,
    NegativeRadicand,
    add,
    an,
    format_number,
    inv,
    mul,
    parse,
    sign,
    sqrt_to_float,
    to_float,
)

fractions = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)
numbers = st.builds(AlgebraicNumber, fractions, fractions)
nonzero = numbers.filter(lambda x: x != ZERO)

T = an(-22, 10)


def test_add_examples():
    assert add(an(1), an(0, 1)) == an(1, 1)
    assert add(T, an(4)) == an(-18, 10)
    x = an(Fraction(3, 7), -2)
    assert add(x, -x) == ZERO


def test_mul_examples():
    assert mul(T, T) == an(984, -440)
    assert mul(ONE, T) == T
    assert mul(an(13, 5), an(-11, 5)) == 2 * an(-9, 5)
    assert mul(an(13, 5), an(-11, 5)) * Fraction(32, 27) == Fraction(64, 27) * an(-9, 5)


def test_inv_examples():
    assert inv(an(2)) == an(Fraction(1, 2))
    assert inv(an(6261, -2800)) == an(Fraction(6261, 121), Fraction(2800, 121))
    with pytest.raises(ZeroDivisionError):
        inv(ZERO)


def test_sign_examples():
    assert sign(an(103, -45)) == 1
    assert sign(an(1829, -855)) == -1
    assert sign(ZERO) == 0
    # near-cancellation that a float would misjudge
    assert sign(an(265571, -118767)) == -1
    assert sign(an(123, -55)) == 1


def test_to_float_examples():
    assert to_float(an(Fraction(9, 11), Fraction(5, 11))) == pytest.approx(1.83458, abs=1e-5)
    assert to_float(ZERO) == 0.0
    assert sqrt_to_float(an(Fraction(243, 88), Fraction(135, 88))) == pytest.approx(2.48831, abs=1e-5)
    assert sqrt_to_float(an(4)) == 2.0
    assert sqrt_to_float(an(45, -20)) == pytest.approx(5 - 2 * math.sqrt(5), rel=1e-14)
    with pytest.raises(NegativeRadicand):
        sqrt_to_float(an(-1))


def test_to_float_cancellation():
    # 123 - 55 sqrt5 is about 0.0081; the conjugate form keeps full precision
    exact = 4 / (123 + 55 * math.sqrt(5))
    assert to_float(an(123, -55)) == pytest.approx(exact, rel=1e-14)


def test_canonical_fractions():
    x = an(Fraction(2, 4), Fraction(-6, 8))
    assert x.rat == Fraction(1, 2) and x.irr == Fraction(-3, 4)
    assert x.rat.denominator > 0


@given(numbers, numbers, numbers)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x


@given(nonzero)
def test_inverse_involution(x):
    assert inv(inv(x)) == x
    assert x * inv(x) == ONE


@given(numbers)
def test_sign_matches_float(x):
    v = x.rat + x.irr * math.sqrt(5)
    if abs(v) > 1e-6:
        assert sign(x) == (1 if v > 0 else -1)


@given(numbers)
def test_to_float_close(x):
    v = float(x.rat) + float(x.irr) * math.sqrt(5)
    scale = abs(float(x.rat)) + abs(float(x.irr)) * 2.3 + 1
    assert abs(to_float(x) - v) <= 1e-12 * scale


@given(numbers)
def test_format_parse_roundtrip(x):
    assert parse(format_number(x)) == x


def test_parse_variants():
    assert parse("sqrt5") == an(0, 1)
    assert parse("-3*sqrt5") == an(0, -3)
    assert parse("64/27*sqrt5 - 1") == an(-1, Fraction(64, 27))
    assert parse("√5 + 2") == an(2, 1)
    with pytest.raises(ValueError):
        parse("")
    with pytest.raises(ValueError):
        parse("abc")
