"""Lower bounds C_n >= V / sqrt|Delta| from the volume estimates and the
table of minimal field discriminants."""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Optional

from dioph.algebraic import AlgebraicNumber, an
from dioph.theorems import (
    ClosedFormResult,
    Exact,
    SqrtOf,
    exact_float,
    exact_mul,
    exact_square,
    general_V_bound,
)

MIN_N, MAX_N = 3, 10


class MissingDiscriminant(KeyError):
    pass


@dataclass(frozen=True)
class DiscriminantRecord:
    field_degree: int
    delta: int
    factorization: str
    polynomial: str

    def __post_init__(self):
        if self.delta == 0:
            raise ValueError("discriminant must be nonzero")


@dataclass
class BoundRecord:
    n: int
    v_bound: Optional[ClosedFormResult]
    delta: Optional[DiscriminantRecord]
    c_lower_exact: str
    c_lower_float: float
    furtwangler: float = float("nan")
    historical: bool = False

    def row(self) -> dict:
        v = self.v_bound
        return {
            "n": self.n,
            "v_bound_exact": "" if v is None else str(v.exact_value),
            "v_bound_float": float("nan") if v is None else v.float_value,
            "delta": "" if self.delta is None else self.delta.delta,
            "c_exact": self.c_lower_exact,
            "c_float": self.c_lower_float,
            "furtwangler_baseline": self.furtwangler,
        }


@lru_cache(maxsize=1)
def discriminant_table() -> dict[int, DiscriminantRecord]:
    text = resources.files("dioph").joinpath("data/discriminants.json").read_text()
    recs = json.loads(text)["records"]
    return {r["field_degree"]: DiscriminantRecord(**r) for r in recs}


def discriminant(field_degree: int) -> DiscriminantRecord:
    try:
        return discriminant_table()[field_degree]
    except KeyError:
        raise MissingDiscriminant(f"no discriminant for degree {field_degree}") from None


# ---------------------------------------------------------------------------
# exact text


def square_split(k: int) -> tuple[int, int]:
    """k = s^2 * m with m squarefree (k > 0)."""
    if k <= 0:
        raise ValueError("need a positive integer")
    s, m, p = 1, 1, 2
    while p * p <= k:
        while k % (p * p) == 0:
            k //= p * p
            s *= p
        if k % p == 0:
            k //= p
            m *= p
        p += 1 if p == 2 else 2
    return s, m * k


def _primitive(x: AlgebraicNumber) -> tuple[Fraction, int, int]:
    """x = r * (a + b sqrt5) with integers a, b coprime (b = 0 gives a = 1)."""
    if x.irr == 0:
        return Fraction(x.rat), 1, 0
    lcm = math.lcm(x.rat.denominator, x.irr.denominator)
    a, b = int(x.rat * lcm), int(x.irr * lcm)
    g = math.gcd(a, b)
    return Fraction(g, lcm), a // g, b // g


def _surd(a: int, b: int) -> str:
    if b == 0:
        return str(a)
    bs = "sqrt5" if b == 1 else f"{b}*sqrt5"
    if a == 0:
        return f"-{bs[1:] if b == -1 else bs}" if b < 0 else bs
    return f"({a}+{bs})" if b > 0 else f"({a}-{bs.lstrip('-')})"


def _times(*factors: str) -> str:
    parts = [f for f in factors if f and f != "1"]
    return "*".join(parts) if parts else "1"


def c_exact_text(v: Exact, abs_delta: int) -> str:
    """Closed form of v / sqrt(abs_delta) with square factors pulled out."""
    k, m = square_split(abs_delta)
    if isinstance(v, SqrtOf):
        r, a, b = _primitive(v.square / abs_delta)
        s1, u = square_split(r.numerator)
        s2, w = square_split(r.denominator)
        coef = Fraction(s1, s2)
        inner = _times(str(u), _surd(a, b))
        radicand = inner if w == 1 else f"{inner}/{w}"
        head = "" if coef == 1 else (f"{coef.numerator}/{coef.denominator}*" if coef.denominator != 1 else f"{coef.numerator}*")
        return f"{head}sqrt({radicand})"
    r, a, b = _primitive(AlgebraicNumber.coerce(v))
    num = _times(str(r.numerator), _surd(a, b))
    den = [str(r.denominator * k)] if r.denominator * k != 1 else []
    if m != 1:
        den.append(f"sqrt({m})")
    if not den:
        return num
    return f"{num}/({'*'.join(den)})" if len(den) > 1 else f"{num}/{den[0]}"


def exact_from_text(text: str) -> Exact:
    """Evaluate a closed-form string built from integers, sqrt5, sqrt(...),
    + - * / and parentheses.  Values under sqrt must lie in Q(sqrt5)."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return an(node.value)
        if isinstance(node, ast.Name) and node.id == "sqrt5":
            return an(0, 1)
        if isinstance(node, ast.Call) and getattr(node.func, "id", None) == "sqrt" and len(node.args) == 1:
            inner = ev(node.args[0])
            if isinstance(inner, SqrtOf):
                raise ValueError("nested radicals are not supported")
            return SqrtOf(inner)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            inner = ev(node.operand)
            if isinstance(inner, SqrtOf):
                raise ValueError("negative radical")
            return -inner
        if isinstance(node, ast.BinOp):
            x, y = ev(node.left), ev(node.right)
            if isinstance(node.op, (ast.Add, ast.Sub)):
                if isinstance(x, SqrtOf) or isinstance(y, SqrtOf):
                    raise ValueError("sums of radicals are not supported")
                return x + y if isinstance(node.op, ast.Add) else x - y
            if isinstance(node.op, ast.Mult):
                return exact_mul(x, y)
            if isinstance(node.op, ast.Div):
                if isinstance(y, SqrtOf):
                    return exact_mul(x, SqrtOf(y.square.inv()))
                return exact_mul(x, y.inv())
        raise ValueError(f"unsupported expression: {ast.dump(node)}")

    return ev(ast.parse(text, mode="eval"))


# ---------------------------------------------------------------------------
# the table


def cassels_bound(n: int) -> BoundRecord:
    rec = discriminant(n + 1)
    v = general_V_bound(n)
    d = abs(rec.delta)
    c = v.float_value / math.sqrt(d)
    return BoundRecord(
        n=n,
        v_bound=v,
        delta=rec,
        c_lower_exact=c_exact_text(v.exact_value, d),
        c_lower_float=c,
        furtwangler=1 / math.sqrt(d),
    )


def historical_row() -> BoundRecord:
    """C_2 >= 2/7, quoted from the literature; not recomputed."""
    return BoundRecord(2, None, None, "2/7", 2 / 7, historical=True)


def bounds_table(min_n: int = MIN_N, max_n: int = MAX_N, include_historical: bool = False) -> list[BoundRecord]:
    if not MIN_N <= min_n <= max_n <= MAX_N:
        raise ValueError(f"need {MIN_N} <= min_n <= max_n <= {MAX_N}")
    rows = [historical_row()] if include_historical else []
    return rows + [cassels_bound(n) for n in range(min_n, max_n + 1)]


def row_is_consistent(rec: BoundRecord) -> bool:
    """(c_exact)^2 * |Delta| == (V bound)^2 exactly, and the float agrees."""
    if rec.historical:
        return True
    c = exact_from_text(rec.c_lower_exact)
    d = abs(rec.delta.delta)
    exact_ok = exact_square(c) * d == exact_square(rec.v_bound.exact_value)
    float_ok = math.isclose(exact_float(c), rec.c_lower_float, rel_tol=1e-12)
    return exact_ok and float_ok


def six_decimal_forms(x: float) -> tuple[str, str]:
    """(rounded, truncated) six-decimal renderings."""
    return f"{x:.6f}", f"{math.floor(x * 1e6) / 1e6:.6f}"


def matches_quoted(value: float, quoted: str, tol: float = 5e-7) -> bool:
    """A six-decimal quotation matches if it is within ``tol`` or equals the
    rounded or truncated rendering of ``value``."""
    return abs(value - float(quoted)) <= tol or quoted in six_decimal_forms(value)
