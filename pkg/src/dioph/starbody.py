"""The star-body functions f_{n,s}: evaluation, gradient and composition."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class DimensionMismatch(ValueError):
    pass


def default_pairing(n: int, s: int) -> tuple:
    """Coordinate i pairs with s+i (0-based); real coordinates come last."""
    return tuple((i, s + i) for i in range(s))


@dataclass(frozen=True)
class StarBody:
    """f(x) = 2^-s * prod (x_i^2 + x_j^2 over pairs) * prod |x_k| over the rest."""

    n: int
    s: int
    pairs: Optional[tuple] = None
    reals: tuple = field(init=False, default=())

    def __post_init__(self):
        if self.n < 1 or self.s < 0 or 2 * self.s > self.n:
            raise ValueError(f"need n >= 1 and 0 <= 2s <= n, got ({self.n}, {self.s})")
        pairs = self.pairs if self.pairs is not None else default_pairing(self.n, self.s)
        pairs = tuple((int(i), int(j)) for i, j in pairs)
        if len(pairs) != self.s:
            raise ValueError("pairing must list exactly s pairs")
        used = [k for pr in pairs for k in pr]
        if len(set(used)) != len(used) or any(k < 0 or k >= self.n for k in used):
            raise ValueError(f"invalid pairing {pairs} for n = {self.n}")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "reals", tuple(k for k in range(self.n) if k not in used))

    def __call__(self, x):
        return evaluate(self, x)


# Named layouts.  The proofs of the four volume theorems happen to use the
# same pairing as the defining formula, so every preset is the default one.
PAIRING_PRESETS = {
    "default": default_pairing,
    "v3": default_pairing,
    "v4": default_pairing,
    "v5": default_pairing,
    "v6": default_pairing,
}


def body_with_preset(n: int, s: int, preset: str = "default") -> StarBody:
    try:
        layout = PAIRING_PRESETS[preset]
    except KeyError:
        raise ValueError(f"unknown pairing preset {preset!r}") from None
    return StarBody(n, s, layout(n, s))


def _check(body: StarBody, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (body.n,):
        raise DimensionMismatch(f"expected last axis {body.n}, got shape {x.shape}")
    return x


def evaluate(body: StarBody, x):
    """f_{n,s} at a point or along the last axis of an array of points."""
    x = _check(body, x)
    out = np.full(x.shape[:-1], 0.5**body.s)
    for i, j in body.pairs:
        out = out * (x[..., i] ** 2 + x[..., j] ** 2)
    for k in body.reals:
        out = out * np.abs(x[..., k])
    return float(out) if out.ndim == 0 else out


def gradient(body: StarBody, x):
    """Product-rule gradient; partials through |x_k| use sign(x_k) (0 at 0)."""
    x = _check(body, x)
    factors = []
    derivs = []
    for i, j in body.pairs:
        factors.append(x[..., i] ** 2 + x[..., j] ** 2)
        derivs.append({i: 2 * x[..., i], j: 2 * x[..., j]})
    for k in body.reals:
        factors.append(np.abs(x[..., k]))
        derivs.append({k: np.sign(x[..., k])})
    scale = 0.5**body.s
    g = np.zeros_like(x)
    for a, d in enumerate(derivs):
        rest = np.full(x.shape[:-1], scale)
        for b, fb in enumerate(factors):
            if b != a:
                rest = rest * fb
        for k, dk in d.items():
            g[..., k] = rest * dk
    return g


def compose(b1: StarBody, b2: StarBody) -> tuple[StarBody, tuple]:
    """Return the (n1+n2, s1+s2) body in default layout and the embedding.

    ``perm[k]`` is the composed coordinate receiving coordinate k of the
    concatenation x ++ x', so that f(embed(x ++ x')) = f1(x) * f2(x').
    """
    n, s = b1.n + b2.n, b1.s + b2.s
    body = StarBody(n, s)
    perm = [0] * n
    for idx, (i, j) in enumerate(b1.pairs):
        perm[i] = idx
        perm[j] = s + idx
    for idx, (i, j) in enumerate(b2.pairs):
        perm[b1.n + i] = b1.s + idx
        perm[b1.n + j] = s + b1.s + idx
    real_slot = 2 * s
    for k in b1.reals:
        perm[k] = real_slot
        real_slot += 1
    for k in b2.reals:
        perm[b1.n + k] = real_slot
        real_slot += 1
    return body, tuple(perm)


def embed(perm: Sequence[int], xcat):
    """Place the concatenated coordinates into the composed layout."""
    xcat = np.asarray(xcat, dtype=float)
    out = np.empty_like(xcat)
    out[..., list(perm)] = xcat
    return out
