"""Polynomials over Q(sqrt5), the Newton-Sylvester root-count bound and a
bisection oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from dioph.algebraic import ONE, ZERO, AlgebraicNumber, parse, sign, to_float


class ZeroPolynomial(ValueError):
    pass


class NotSquareFree(ValueError):
    pass


class ZeroSignAtPoint(ValueError):
    """Some f_i or F_i vanishes at the query point; perturb the point."""


def _coerce(v) -> AlgebraicNumber:
    return AlgebraicNumber.coerce(v)


@dataclass(frozen=True)
class Polynomial:
    """Coefficients in ascending degree; trailing zeros stripped."""

    coeffs: tuple

    def __init__(self, coeffs: Iterable = ()):
        cs = [_coerce(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_descending(cls, coeffs: Iterable) -> "Polynomial":
        return cls(list(coeffs)[::-1])

    @classmethod
    def monomial(cls, k: int, c=1) -> "Polynomial":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> AlgebraicNumber:
        return self.coeffs[-1] if self.coeffs else ZERO

    def __call__(self, x):
        return eval_poly(self, x)

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (ZERO,) * (n - len(self.coeffs))
        b = other.coeffs + (ZERO,) * (n - len(other.coeffs))
        return Polynomial([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero() or other.is_zero():
            return Polynomial()
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = Polynomial([ONE])
        for _ in range(k):
            result = result * self
        return result

    def derivative(self) -> "Polynomial":
        return Polynomial([c * k for k, c in enumerate(self.coeffs)][1:])

    def scale(self, c) -> "Polynomial":
        c = _coerce(c)
        return Polynomial([a * c for a in self.coeffs])

    def compose(self, other: "Polynomial") -> "Polynomial":
        result = Polynomial()
        for c in reversed(self.coeffs):
            result = result * other + Polynomial([c])
        return result

    def float_coeffs(self) -> list[float]:
        return [to_float(c) for c in self.coeffs]

    def __str__(self):
        if self.is_zero():
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                terms.append(f"({c})*x^{k}" if k else f"({c})")
        return " + ".join(terms)


def _as_poly(v) -> Polynomial:
    if isinstance(v, Polynomial):
        return v
    return Polynomial([v])


X = Polynomial([0, 1])


def eval_poly(p: Polynomial, x) -> AlgebraicNumber:
    """Exact Horner evaluation."""
    x = _coerce(x)
    acc = ZERO
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


def poly_divmod(p: Polynomial, q: Polynomial) -> tuple[Polynomial, Polynomial]:
    if q.is_zero():
        raise ZeroPolynomial("division by the zero polynomial")
    rem = list(p.coeffs)
    dq = q.degree
    lead_inv = q.leading().inv()
    quot = [ZERO] * max(len(rem) - dq, 0)
    for k in range(len(rem) - 1, dq - 1, -1):
        c = rem[k]
        if not c:
            continue
        factor = c * lead_inv
        quot[k - dq] = factor
        for j, b in enumerate(q.coeffs):
            rem[k - dq + j] = rem[k - dq + j] - factor * b
    return Polynomial(quot), Polynomial(rem[:dq] if dq > 0 else [])


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    """Monic gcd by the Euclidean remainder sequence."""
    a, b = p, q
    while not b.is_zero():
        _, r = poly_divmod(a, b)
        a, b = b, r
    if a.is_zero():
        return a
    return a.scale(a.leading().inv())


def is_square_free(p: Polynomial) -> bool:
    if p.is_zero():
        raise ZeroPolynomial("square-freeness of the zero polynomial")
    if p.degree <= 1:
        return True
    return poly_gcd(p, p.derivative()).degree == 0


def factor_check_divides(p: Polynomial, q: Polynomial) -> bool:
    """True iff q divides p exactly."""
    if q.is_zero():
        return p.is_zero()
    _, r = poly_divmod(p, q)
    return r.is_zero()


def scaled_derivatives(p: Polynomial) -> list[Polynomial]:
    """[f_0..f_n] with f_i = (n-i)!/n! * p^(i)."""
    if p.is_zero():
        raise ZeroPolynomial("scaled derivatives of the zero polynomial")
    n = p.degree
    out = []
    d = p
    for i in range(n + 1):
        factor = Fraction(math.factorial(n - i), math.factorial(n))
        out.append(d.scale(AlgebraicNumber(factor)))
        d = d.derivative()
    return out


@dataclass(frozen=True)
class SignTable:
    point: AlgebraicNumber
    f_signs: tuple
    F_signs: tuple
    n_plus: int
    n_minus: int
    f_values: tuple = ()
    F_values: tuple = ()


def newton_sylvester_table(
    p: Polynomial, x, check_square_free: bool = True
) -> SignTable:
    """Signs of f_i(x) and F_i(x) = f_i^2 - f_{i-1} f_{i+1} (F_0 = f_0^2,
    F_n = f_n^2) and the permanence/variation counts over pairs with equal
    F-signs."""
    x = _coerce(x)
    if p.is_zero():
        raise ZeroPolynomial("sign table of the zero polynomial")
    if check_square_free and not is_square_free(p):
        raise NotSquareFree("polynomial has a repeated factor")
    fs = [eval_poly(f, x) for f in scaled_derivatives(p)]
    n = len(fs) - 1
    Fs = []
    for i in range(n + 1):
        if i == 0 or i == n:
            Fs.append(fs[i] * fs[i])
        else:
            Fs.append(fs[i] * fs[i] - fs[i - 1] * fs[i + 1])
    f_signs = tuple(sign(v) for v in fs)
    F_signs = tuple(sign(v) for v in Fs)
    for i, (a, b) in enumerate(zip(f_signs, F_signs)):
        if a == 0 or b == 0:
            raise ZeroSignAtPoint(f"f_{i} or F_{i} vanishes at x = {x}")
    n_plus = n_minus = 0
    for i in range(n):
        if F_signs[i] != F_signs[i + 1]:
            continue
        if f_signs[i] == f_signs[i + 1]:
            n_plus += 1
        else:
            n_minus += 1
    return SignTable(x, f_signs, F_signs, n_plus, n_minus, tuple(fs), tuple(Fs))


def max_roots_in_interval(p: Polynomial, a, b) -> int:
    """Upper bound on the number of real roots in (a, b)."""
    a, b = _coerce(a), _coerce(b)
    if not a < b:
        raise ValueError("need a < b")
    if not is_square_free(p):
        raise NotSquareFree("polynomial has a repeated factor")
    if not eval_poly(p, a) or not eval_poly(p, b):
        raise ZeroSignAtPoint("polynomial vanishes at an endpoint")
    try:
        ta = _table_near(p, a, b)
        tb = _table_near(p, b, a)
    except ZeroSignAtPoint:
        # some F_i vanishes identically near the endpoint; fall back to
        # the trivial bound
        return p.degree
    return max(0, min(tb.n_plus - ta.n_plus, ta.n_minus - tb.n_minus))


def _root_free_radius(p: Polynomial, x: AlgebraicNumber, eps: AlgebraicNumber) -> bool:
    """Exact check that p has no root within distance eps of x, via
    |p(x)| > eps * max|p'| on the disc of radius eps."""
    reach = abs(x) + eps
    bound = ZERO
    for k, c in enumerate(p.coeffs[1:], start=1):
        bound = bound + abs(c) * k * reach ** (k - 1)
    return abs(eval_poly(p, x)) > bound * eps


def _table_near(p: Polynomial, x: AlgebraicNumber, toward: AlgebraicNumber) -> SignTable:
    """Sign table at x; when some f_i or F_i vanishes there, at a point
    moved toward the other endpoint by a certified root-free step."""
    try:
        return newton_sylvester_table(p, x, check_square_free=False)
    except ZeroSignAtPoint:
        pass
    step = (toward - x) / 4
    for _ in range(60):
        if _root_free_radius(p, x, abs(step)):
            try:
                return newton_sylvester_table(p, x + step, check_square_free=False)
            except ZeroSignAtPoint:
                pass
        step = step / 3
    raise ZeroSignAtPoint(f"no usable perturbation of x = {x}")


def _float_eval(cs: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in reversed(cs):
        acc = acc * x + c
    return acc


def count_roots_bisection(p: Polynomial, a: float, b: float, tol: float = 1e-10) -> int:
    """Count distinct roots of p on (a, b) by recursive bisection.

    Works on the square-free part p / gcd(p, p'), so every root is a sign
    change.  Subintervals are discarded when a Lipschitz bound rules out a
    root; the rest are split down to width tol.  Float signs with
    magnitude below 1e-9 are re-decided exactly.
    """
    if not a < b:
        raise ValueError("need a < b")
    if p.is_zero():
        raise ZeroPolynomial("root count of the zero polynomial")
    if p.degree > 0:
        g = poly_gcd(p, p.derivative())
        if g.degree > 0:
            p, _ = poly_divmod(p, g)
    cs = p.float_coeffs()
    dcs = [k * c for k, c in enumerate(cs)][1:]
    abs_dcs = [abs(c) for c in dcs]

    def sgn(x: float) -> int:
        v = _float_eval(cs, x)
        if abs(v) >= 1e-9:
            return 1 if v > 0 else -1
        return sign(eval_poly(p, Fraction(x)))

    def deriv_bound(lo: float, hi: float) -> float:
        m = max(abs(lo), abs(hi))
        return _float_eval(abs_dcs, m) if abs_dcs else 0.0

    count = 0
    sa, sb = sgn(a), sgn(b)
    if sa == 0 or sb == 0:
        raise ZeroSignAtPoint("polynomial vanishes at an endpoint")
    stack = [(a, b, sa, sb)]
    while stack:
        lo, hi, slo, shi = stack.pop()
        mid = 0.5 * (lo + hi)
        vmid = _float_eval(cs, mid)
        half = 0.5 * (hi - lo)
        slack = 1e-12 * (1.0 + sum(abs(c) for c in cs) * max(1.0, abs(mid)) ** max(p.degree, 0))
        if abs(vmid) > deriv_bound(lo, hi) * half * (1 + 1e-9) + slack:
            continue
        if hi - lo <= tol:
            if slo != shi:
                count += 1
            continue
        smid = sgn(mid)
        if smid == 0:
            # exact root at the split point: count it and step around it
            count += 1
            eps = min(tol, half) * 1e-3
            sl, sr = sgn(mid - eps), sgn(mid + eps)
            stack.append((lo, mid - eps, slo, sl))
            stack.append((mid + eps, hi, sr, shi))
            continue
        stack.append((lo, mid, slo, smid))
        stack.append((mid, hi, smid, shi))
    return count


def load_polynomial(path: str | Path) -> Polynomial:
    """One coefficient per line, ascending degree; '#' starts a comment."""
    coeffs = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            coeffs.append(parse(line))
    return Polynomial(coeffs)


def dump_polynomial(p: Polynomial) -> str:
    lines = ["# coefficients, ascending degree"]
    lines += [str(c) for c in p.coeffs]
    return "\n".join(lines) + "\n"
