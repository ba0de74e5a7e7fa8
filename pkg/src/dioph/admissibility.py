"""Is the parallelepiped A.[-1, 1]^n inside the star body f <= 1?

Three stages, as in the original experiment: vertices, samples along the
segments joining vertices, then a numeric global maximization of f over
the parallelepiped.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from dioph.parallelepiped import sign_vectors
from dioph.starbody import DimensionMismatch, StarBody, evaluate, gradient


@dataclass(frozen=True)
class OptimizerConfig:
    tol: float = 1e-9
    diagonal_step: float = 0.3
    lattice_points: int = 5
    random_starts: int = 64
    top_k: int = 24
    max_steps: int = 400
    seed: int = 0
    max_lattice: int = 200_000
    edge_samples: int = 33


@dataclass
class AdmissibilityReport:
    vertices_ok: bool
    diagonals_ok: bool
    max_f: float
    argmax: list = field(default_factory=list)
    admissible: bool = False
    tolerance: float = 1e-9

    def to_json(self) -> dict:
        return {
            "vertices_ok": self.vertices_ok,
            "diagonals_ok": self.diagonals_ok,
            "max_f": self.max_f,
            "argmax": [float(v) for v in self.argmax],
            "admissible": self.admissible,
            "tolerance": self.tolerance,
        }


def _dense(m) -> np.ndarray:
    return m.to_dense() if hasattr(m, "to_dense") else np.asarray(m, dtype=float)


def _same_dim(a: np.ndarray, body: StarBody):
    if a.shape[0] != body.n:
        raise DimensionMismatch(f"matrix is {a.shape[0]}-dimensional, body has n = {body.n}")


def _f_abs(body: StarBody, x: np.ndarray) -> np.ndarray:
    # f is nonnegative already; abs kept for parity with max(max, -min)
    return np.abs(evaluate(body, x))


def _best(values: np.ndarray, points: np.ndarray) -> tuple[float, np.ndarray]:
    k = int(np.argmax(values))
    return float(values[k]), points[k]


def vertex_values(m, body: StarBody) -> tuple[np.ndarray, np.ndarray]:
    a = _dense(m)
    _same_dim(a, body)
    pts = sign_vectors(a.shape[0]) @ a.T
    return _f_abs(body, pts), pts


def check_vertices(m, body: StarBody, tol: float = 1e-9) -> bool:
    vals, _ = vertex_values(m, body)
    return bool(np.all(vals <= 1 + tol))


def diagonal_values(m, body: StarBody, step: float = 0.3) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < step <= 1:
        raise ValueError("step must lie in (0, 1]")
    a = _dense(m)
    _same_dim(a, body)
    verts = sign_vectors(a.shape[0]) @ a.T
    i, j = np.triu_indices(len(verts), k=1)
    ts = np.arange(0.0, 1.0 + 1e-12, step)
    best_v = -np.inf
    best_p = verts[0]
    for t in ts:
        pts = (1 - t) * verts[i] + t * verts[j]
        vals = _f_abs(body, pts)
        k = int(np.argmax(vals))
        if vals[k] > best_v:
            best_v, best_p = float(vals[k]), pts[k]
    return np.array([best_v]), best_p[None, :]


def check_diagonals(m, body: StarBody, step: float = 0.3, tol: float = 1e-9) -> bool:
    vals, _ = diagonal_values(m, body, step)
    return bool(np.all(vals <= 1 + tol))


def _lattice(n: int, points: int, cap: int) -> np.ndarray:
    while points > 2 and points**n > cap:
        points -= 1
    axis = np.linspace(-1.0, 1.0, points)
    return np.array(list(itertools.product(axis, repeat=n)))


def _edge_points(n: int, samples: int) -> np.ndarray:
    """Points on every edge of the cube: one coordinate swept, rest at +-1."""
    if samples < 1:
        return np.empty((0, n))
    ts = np.linspace(-1.0, 1.0, samples + 2)[1:-1]
    base = sign_vectors(n - 1)
    out = []
    for k in range(n):
        for t in ts:
            out.append(np.insert(base, k, t, axis=1))
    return np.vstack(out)


def _distinct_top(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k best seeds with pairwise different values.

    Symmetric copies of one local maximum share its value; without this
    they can fill the whole start list and hide a better basin.
    """
    order = np.lexsort((np.arange(len(values)), -values))
    keep, seen = [], set()
    for i in order:
        key = float(f"{values[i]:.12g}")
        if key in seen:
            continue
        seen.add(key)
        keep.append(i)
        if len(keep) == k:
            break
    return np.array(keep, dtype=int)


def _ascend(a: np.ndarray, body: StarBody, u: np.ndarray, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Projected gradient ascent on g(u) = f(A u) over the cube, one step
    size per start, doubled on success and halved on failure."""
    x = u @ a.T
    val = _f_abs(body, x)
    eta = np.full(len(u), 0.1)
    for _ in range(steps):
        g = gradient(body, x) @ a
        norm = np.linalg.norm(g, axis=1)
        live = (norm > 0) & (eta > 1e-14)
        if not live.any():
            break
        d = np.zeros_like(g)
        d[live] = g[live] / norm[live, None]
        cand = np.clip(u + eta[:, None] * d, -1.0, 1.0)
        cx = cand @ a.T
        cval = _f_abs(body, cx)
        better = cval > val
        u = np.where(better[:, None], cand, u)
        x = np.where(better[:, None], cx, x)
        val = np.where(better, cval, val)
        eta = np.where(better, np.minimum(eta * 2.0, 4.0), eta * 0.5)
    return val, u


def max_over_cube(m, body: StarBody, cfg: OptimizerConfig = OptimizerConfig()) -> tuple[float, np.ndarray]:
    """Best found max of f over {A u : |u|_inf <= 1}; returns (value, x)."""
    a = _dense(m)
    _same_dim(a, body)
    n = a.shape[0]
    rng = np.random.default_rng(cfg.seed)
    seeds = [sign_vectors(n), _lattice(n, cfg.lattice_points, cfg.max_lattice)]
    if cfg.random_starts:
        seeds.append(rng.uniform(-1.0, 1.0, size=(cfg.random_starts, n)))
    seeds.append(_edge_points(n, cfg.edge_samples))
    u0 = np.vstack(seeds[1:])
    v0 = _f_abs(body, u0 @ a.T)
    # every vertex starts an ascent (maxima often sit on low-dimensional
    # faces); the best other seeds fill up the rest, ties by seed index
    order = _distinct_top(v0, cfg.top_k)
    starts = np.vstack([seeds[0], u0[order]])
    vals, us = _ascend(a, body, starts, cfg.max_steps)
    best_val, best_u = _best(vals, us)
    return best_val, best_u @ a.T


def is_admissible(m, body: StarBody, cfg: OptimizerConfig = OptimizerConfig()) -> AdmissibilityReport:
    tol = cfg.tol
    vvals, vpts = vertex_values(m, body)
    vbest, vx = _best(vvals, vpts)
    if vbest > 1 + tol:
        return AdmissibilityReport(False, False, vbest, list(vx), False, tol)
    dvals, dpts = diagonal_values(m, body, cfg.diagonal_step)
    dbest, dx = _best(dvals, dpts)
    if dbest > vbest:
        vbest, vx = dbest, dx
    if dbest > 1 + tol:
        return AdmissibilityReport(True, False, vbest, list(vx), False, tol)
    gbest, gx = max_over_cube(m, body, cfg)
    if gbest < vbest:
        gbest, gx = vbest, vx
    return AdmissibilityReport(True, True, gbest, list(gx), gbest <= 1 + tol, tol)


def global_max(m, body: StarBody, cfg: OptimizerConfig = OptimizerConfig()) -> float:
    """Largest f seen by all three stages, without early exit."""
    vvals, _ = vertex_values(m, body)
    dvals, _ = diagonal_values(m, body, cfg.diagonal_step)
    gbest, _ = max_over_cube(m, body, cfg)
    return float(max(vvals.max(), dvals.max(), gbest))
