import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dioph.starbody import (
    PAIRING_PRESETS,
    DimensionMismatch,
    StarBody,
    body_with_preset,
    compose,
    embed,
    evaluate,
    gradient,
)

SHAPES = [(1, 0), (2, 1), (3, 1), (4, 2), (5, 2), (6, 3), (7, 3), (4, 0)]


def test_evaluate_examples():
    b = StarBody(3, 1)
    assert evaluate(b, [1, 1, 0]) == 0
    assert evaluate(b, [1, 1, 1]) == 1
    for n, s in SHAPES:
        assert evaluate(StarBody(n, s), np.zeros(n)) == 0
    alpha = math.sqrt(2 / 3)
    r = math.sqrt(2) * alpha
    assert evaluate(StarBody(4, 2), [alpha, alpha, r, r]) == pytest.approx(1.0, rel=1e-14)


def test_layout():
    b = StarBody(5, 2)
    assert b.pairs == ((0, 2), (1, 3)) and b.reals == (4,)
    with pytest.raises(ValueError):
        StarBody(3, 2)
    with pytest.raises(ValueError):
        StarBody(4, 2, pairs=((0, 1), (1, 2)))
    with pytest.raises(DimensionMismatch):
        evaluate(b, np.zeros(4))
    assert PAIRING_PRESETS
    assert body_with_preset(5, 2) == b


def test_vectorized_matches_pointwise():
    rng = np.random.default_rng(0)
    b = StarBody(6, 3)
    x = rng.normal(size=(50, 6))
    v = evaluate(b, x)
    assert v.shape == (50,)
    assert all(v[i] == evaluate(b, x[i]) for i in range(50))


def _rot(x, i, j, theta):
    y = x.copy()
    c, s = math.cos(theta), math.sin(theta)
    y[..., i], y[..., j] = c * x[..., i] - s * x[..., j], s * x[..., i] + c * x[..., j]
    return y


@pytest.mark.parametrize("n,s", SHAPES)
def test_invariances(n, s):
    rng = np.random.default_rng(n * 10 + s)
    b = StarBody(n, s)
    x = rng.uniform(-2, 2, size=(1000, n))
    f = evaluate(b, x)
    lam = rng.uniform(-3, 3, size=(1000, 1))
    assert np.allclose(evaluate(b, lam * x), np.abs(lam[:, 0]) ** n * f, rtol=1e-12, atol=0)
    for i, j in b.pairs:
        y = _rot(x, i, j, rng.uniform(0, 2 * math.pi))
        assert np.allclose(evaluate(b, y), f, rtol=1e-12, atol=1e-300)
    signs = rng.choice([-1.0, 1.0], size=(1000, n))
    assert np.allclose(evaluate(b, signs * x), f, rtol=1e-12, atol=0)


def test_gradient_examples():
    assert np.allclose(gradient(StarBody(3, 1), [1.0, 1.0, 1.0]), [1, 1, 1])
    assert np.allclose(gradient(StarBody(4, 2), [1.0, 1.0, 1.0, 1.0]), [1, 1, 1, 1])
    # interior of the hyperplane through a linear factor
    g = gradient(StarBody(3, 1), [0.3, 0.7, 0.0])
    assert g[0] == 0 and g[1] == 0


@pytest.mark.parametrize("n,s", SHAPES)
def test_gradient_finite_differences(n, s):
    rng = np.random.default_rng(100 + n)
    b = StarBody(n, s)
    h = 1e-6
    for _ in range(50):
        x = rng.uniform(-2, 2, size=n)
        x[np.abs(x) < 0.05] = 0.5  # stay off the kinks of |x_k|
        fd = np.array([(evaluate(b, x + h * e) - evaluate(b, x - h * e)) / (2 * h) for e in np.eye(n)])
        assert np.allclose(gradient(b, x), fd, rtol=1e-5, atol=1e-5)


@pytest.mark.parametrize("s1,s2", [((3, 1), (4, 2)), ((2, 0), (3, 0)), ((4, 2), (4, 2)), ((5, 2), (1, 0))])
def test_composition(s1, s2):
    b1, b2 = StarBody(*s1), StarBody(*s2)
    body, perm = compose(b1, b2)
    assert (body.n, body.s) == (b1.n + b2.n, b1.s + b2.s)
    rng = np.random.default_rng(7)
    x1 = rng.uniform(-2, 2, size=(1000, b1.n))
    x2 = rng.uniform(-2, 2, size=(1000, b2.n))
    lhs = evaluate(body, embed(perm, np.concatenate([x1, x2], axis=1)))
    rhs = evaluate(b1, x1) * evaluate(b2, x2)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=5, max_size=5), st.floats(0.01, 10))
def test_homogeneity_property(xs, lam):
    b = StarBody(5, 2)
    x = np.array(xs)
    assert math.isclose(evaluate(b, lam * x), lam**5 * evaluate(b, x), rel_tol=1e-12, abs_tol=1e-300)
