"""Block-structured candidate matrices, their inverses and vertices."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

MAX_VERTEX_DIM = 16


class DimensionTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class BlockMatrix:
    """n - 2k diagonal entries ``diag`` followed by k blocks [[a, a], [-a, a]]."""

    n: int
    diag: Optional[float]
    blocks: tuple = ()

    def __post_init__(self):
        blocks = tuple(float(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if self.n - 2 * len(blocks) < 0:
            raise ValueError("too many blocks for the dimension")
        if self.n_diag > 0:
            if self.diag is None:
                raise ValueError("diagonal entry required when n > 2k")
            object.__setattr__(self, "diag", float(self.diag))
        if any(v <= 0 for v in self.entries()):
            raise ValueError("all entries must be positive")

    @property
    def n_diag(self) -> int:
        return self.n - 2 * len(self.blocks)

    def entries(self) -> list[float]:
        head = [self.diag] if self.n_diag > 0 else []
        return head + list(self.blocks)

    def scaled(self, t: float) -> "BlockMatrix":
        d = None if self.diag is None else self.diag * t
        return BlockMatrix(self.n, d, tuple(b * t for b in self.blocks))

    @property
    def det(self) -> float:
        d = self.diag ** self.n_diag if self.n_diag else 1.0
        for a in self.blocks:
            d *= 2.0 * a * a
        return d

    def to_dense(self) -> np.ndarray:
        return to_dense(self)

    def to_json(self, s: int) -> dict:
        return {"n": self.n, "s": s, "diag": self.diag, "blocks": list(self.blocks)}


@dataclass(frozen=True)
class DenseMatrix:
    entries: np.ndarray = field(compare=False)

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("dense matrix must be square")
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.entries))

    def to_dense(self) -> np.ndarray:
        return self.entries.copy()

    def scaled(self, t: float) -> "DenseMatrix":
        return DenseMatrix(self.entries * t)


def to_dense(m: BlockMatrix) -> np.ndarray:
    a = np.zeros((m.n, m.n))
    k = m.n_diag
    for i in range(k):
        a[i, i] = m.diag
    for b in m.blocks:
        a[k, k] = a[k, k + 1] = b
        a[k + 1, k] = -b
        a[k + 1, k + 1] = b
        k += 2
    return a


def inverse(m: BlockMatrix) -> np.ndarray:
    """Closed form: each block inverts to [[1, -1], [1, 1]] / (2a)."""
    a = np.zeros((m.n, m.n))
    k = m.n_diag
    for i in range(k):
        a[i, i] = 1.0 / m.diag
    for b in m.blocks:
        h = 0.5 / b
        a[k, k] = h
        a[k, k + 1] = -h
        a[k + 1, k] = h
        a[k + 1, k + 1] = h
        k += 2
    return a


def sign_vectors(n: int) -> np.ndarray:
    if n > MAX_VERTEX_DIM:
        raise DimensionTooLarge(f"2^{n} vertices exceed the enumeration guard")
    return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))


def vertices(m) -> np.ndarray:
    """All images A.e for e in {-1, 1}^n, one per row."""
    a = m.to_dense() if hasattr(m, "to_dense") else np.asarray(m, dtype=float)
    return sign_vectors(a.shape[0]) @ a.T


@dataclass(frozen=True)
class ReducedConstraints:
    """The y-box: |y_i| <= 1 on ``singles``, |y_j +- y_j'| <= 2 on ``pairs``,
    with x = scale * y (elementwise)."""

    n: int
    singles: tuple
    pairs: tuple
    scale: tuple

    def contains(self, y, tol: float = 1e-12) -> bool:
        y = np.asarray(y, dtype=float)
        ok = all(abs(y[i]) <= 1 + tol for i in self.singles)
        for j, k in self.pairs:
            ok = ok and abs(y[j] + y[k]) <= 2 + tol and abs(y[j] - y[k]) <= 2 + tol
        return bool(ok)

    def to_x(self, y):
        return np.asarray(y, dtype=float) * np.asarray(self.scale)

    def to_y(self, x):
        return np.asarray(x, dtype=float) / np.asarray(self.scale)


def reduced_constraints(m: BlockMatrix) -> ReducedConstraints:
    k = m.n_diag
    singles = tuple(range(k))
    pairs = tuple((k + 2 * i, k + 2 * i + 1) for i in range(len(m.blocks)))
    scale = [m.diag] * k
    for b in m.blocks:
        scale += [b, b]
    return ReducedConstraints(m.n, singles, pairs, tuple(scale))


def direct_sum(*ms) -> np.ndarray:
    """Block-diagonal concatenation of dense forms."""
    parts = [m.to_dense() if hasattr(m, "to_dense") else np.asarray(m, float) for m in ms]
    n = sum(p.shape[0] for p in parts)
    out = np.zeros((n, n))
    k = 0
    for p in parts:
        d = p.shape[0]
        out[k : k + d, k : k + d] = p
        k += d
    return out


def permute(a: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Rows moved so that row k lands at perm[k] (x' = P x)."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    out[list(perm), :] = a
    return out


def load_matrix(path: str | Path):
    """Read {"n", "s", "diag", "blocks"} or {"dense": [[...]]}."""
    data = json.loads(Path(path).read_text())
    return matrix_from_json(data)


def matrix_from_json(data: dict):
    if "dense" in data:
        return DenseMatrix(np.array(data["dense"], dtype=float))
    return BlockMatrix(int(data["n"]), data.get("diag"), tuple(data.get("blocks", ())))
