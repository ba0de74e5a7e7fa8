"""Iterative grid refinement over BlockMatrix parameters.

Two strategies share the same grid/window loop:

``radial`` (default)
    every grid point is pushed along its ray to the boundary of the
    admissible set (f is homogeneous of degree n, so scaling the matrix by
    max_f^(-1/n) makes it touch f = 1) and the pass winner is the scaled
    point of largest volume.
``paper``
    the literal rule: keep the admissible grid point of largest det.
"""

from __future__ import annotations

import itertools
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from dioph.admissibility import OptimizerConfig, global_max, is_admissible
from dioph.parallelepiped import BlockMatrix
from dioph.starbody import StarBody

log = logging.getLogger("dioph.search")


class NoAdmissibleCandidate(RuntimeError):
    pass


# Built-in symmetric families: params -> BlockMatrix
def _fam31(p):
    a, b = p
    return BlockMatrix(3, a, (b,))


def _fam42(p):
    a, b = p
    return BlockMatrix(4, a, (b,))


def _fam52(p):
    a, b, c = p
    return BlockMatrix(5, a, (b, c))


def _fam63(p):
    a, b = p
    return BlockMatrix(6, a, (b, b))


SYM_FAMILIES = {(3, 1): _fam31, (4, 2): _fam42, (5, 2): _fam52, (6, 3): _fam63}
SYM_VARS = {(3, 1): 2, (4, 2): 2, (5, 2): 3, (6, 3): 2}
STRATEGIES = ("radial", "paper")


@dataclass(frozen=True)
class Parameterization:
    """Picklable description of params -> BlockMatrix.

    ``sym``: the built-in family for (n, s).  ``custom``: the first parameter
    is the diagonal entry, the remaining ones are block entries.
    """

    n: int
    s: int
    family: str = "sym"
    var_count: Optional[int] = None

    def __post_init__(self):
        if self.family == "sym":
            if (self.n, self.s) not in SYM_FAMILIES:
                raise ValueError(f"no built-in family for (n, s) = ({self.n}, {self.s})")
            k = SYM_VARS[(self.n, self.s)]
            if self.var_count not in (None, k):
                raise ValueError(f"family for ({self.n}, {self.s}) has {k} parameters")
            object.__setattr__(self, "var_count", k)
        elif self.family == "custom":
            k = self.var_count
            if k is None or k < 1:
                raise ValueError("custom family needs var_count >= 1")
            blocks = k - 1
            if 2 * blocks > self.n or (2 * blocks == self.n and k > blocks):
                raise ValueError(f"{k} parameters do not fit n = {self.n}")
        else:
            raise ValueError(f"unknown family {self.family!r}")

    def __call__(self, params: Sequence[float]) -> BlockMatrix:
        params = tuple(float(p) for p in params)
        if self.family == "sym":
            return SYM_FAMILIES[(self.n, self.s)](params)
        return BlockMatrix(self.n, params[0], params[1:])


@dataclass(frozen=True)
class SearchConfig:
    var_count: int
    lo: tuple = ()
    hi: tuple = ()
    intervals: int = 10
    refine_intervals: int = 4
    iterations: int = 20
    slack: float = 0.1
    seed: int = 0
    workers: int = 1
    strategy: str = "radial"
    admissibility: OptimizerConfig = OptimizerConfig()

    def __post_init__(self):
        lo = tuple(self.lo) or (0.0,) * self.var_count
        hi = tuple(self.hi) or (2.0,) * self.var_count
        if len(lo) == 1:
            lo = lo * self.var_count
        if len(hi) == 1:
            hi = hi * self.var_count
        object.__setattr__(self, "lo", tuple(float(v) for v in lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in hi))
        if len(self.lo) != self.var_count or len(self.hi) != self.var_count:
            raise ValueError("window length must match var_count")
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ValueError("need lo < hi for every parameter")
        if self.intervals < 2 or self.refine_intervals < 2 or self.iterations < 1:
            raise ValueError("need intervals >= 2 and iterations >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; pick one of {STRATEGIES}")


@dataclass
class PassRecord:
    iteration: int
    volume: Optional[float]
    params: Optional[list]
    elapsed: float
    checked: int


@dataclass
class SearchResult:
    best_params: list
    best_volume: float
    window_lo: list
    window_hi: list
    history: list = field(default_factory=list)
    confirmed: bool = False
    confirm_max_f: float = float("nan")

    def to_json(self) -> dict:
        d = asdict(self)
        d["history"] = [asdict(h) if not isinstance(h, dict) else h for h in self.history]
        return d


def resolve_workers(requested: Optional[int] = None) -> int:
    env = os.environ.get("DIOPH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, requested or 1)


def _check(args):
    param, params, body, cfg = args
    rep = is_admissible(param(params), body, cfg)
    return rep.admissible


def _radial(args):
    param, params, body, cfg = args
    m = param(params)
    top = global_max(m, body, cfg)
    if not np.isfinite(top) or top <= 0:
        return None
    t = top ** (-1.0 / body.n)
    scaled = tuple(float(p * t) for p in params)
    return param(scaled).det, scaled


def _grid(lo: Sequence[float], hi: Sequence[float], points: int) -> list[np.ndarray]:
    return [np.linspace(a, b, points) for a, b in zip(lo, hi)]


def _candidates(window, param, points):
    lo, hi = window
    for combo in itertools.product(*_grid(lo, hi, points)):
        if min(combo) <= 0:
            continue
        try:
            m = param(combo)
        except ValueError:
            continue
        yield tuple(float(c) for c in combo), m


def grid_iteration(
    cfg: SearchConfig,
    window: tuple,
    param: Parameterization,
    body: StarBody,
    min_volume: float,
    points: int,
    pool: Optional[ProcessPoolExecutor] = None,
    workers: int = 1,
) -> tuple[list, float, float, int]:
    """One sweep of the grid; returns (params, volume, spacing, checked).

    The result never depends on the worker count: candidates are ranked by
    (-volume, params) and the first one in that order wins.
    """
    lo, hi = window
    spacing = float(max((b - a) / (points - 1) for a, b in zip(lo, hi)))
    if cfg.strategy == "radial":
        combos = [c for c, _ in _candidates(window, param, points)]
        jobs = [(param, c, body, cfg.admissibility) for c in combos]
        if pool is not None and len(jobs) > 1:
            chunk = max(1, len(jobs) // (4 * workers))
            outs = list(pool.map(_radial, jobs, chunksize=chunk))
        else:
            outs = [_radial(j) for j in jobs]
        ranked = sorted((-v, p) for v, p in (o for o in outs if o is not None) if v > min_volume)
        if not ranked:
            raise NoAdmissibleCandidate(f"nothing admissible above volume {min_volume}")
        return list(ranked[0][1]), -ranked[0][0], spacing, len(jobs)

    cands = sorted((-m.det, c) for c, m in _candidates(window, param, points) if m.det > min_volume)
    checked = 0
    batch = max(1, workers) * 2
    for start in range(0, len(cands), batch):
        chunk = cands[start : start + batch]
        jobs = [(param, c[1], body, cfg.admissibility) for c in chunk]
        if pool is not None and len(jobs) > 1:
            oks = list(pool.map(_check, jobs))
        else:
            oks = []
            for job in jobs:
                oks.append(_check(job))
                if oks[-1]:
                    break
        for (negdet, combo), ok in zip(chunk, oks):
            checked += 1
            if ok:
                return list(combo), -negdet, spacing, checked
    raise NoAdmissibleCandidate(f"nothing admissible above volume {min_volume}")


def refine_search(
    cfg: SearchConfig,
    param: Parameterization,
    body: StarBody,
    deterministic: bool = False,
) -> SearchResult:
    workers = resolve_workers(cfg.workers)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        return _refine(cfg, param, body, pool, workers, deterministic)
    finally:
        if pool is not None:
            pool.shutdown()


def _refine(cfg, param, body, pool, workers, deterministic) -> SearchResult:
    lo, hi = list(cfg.lo), list(cfg.hi)
    prev_volume = cur_volume = 1.0
    best_params = None
    best_volume = -np.inf
    center = None
    history = []
    for it in range(cfg.iterations):
        points = (cfg.intervals if it == 0 else cfg.refine_intervals) + 1
        threshold = min(prev_volume, cur_volume) - cfg.slack
        t0 = time.perf_counter()
        try:
            params, volume, h, checked = grid_iteration(
                cfg, (lo, hi), param, body, threshold, points, pool, workers
            )
        except NoAdmissibleCandidate:
            if it == 0:
                raise
            params, volume, checked = None, None, 0
            h = max((b - a) / (points - 1) for a, b in zip(lo, hi))
        elapsed = 0.0 if deterministic else time.perf_counter() - t0
        history.append(PassRecord(it, volume, params, elapsed, checked))
        if volume is not None:
            center = params
            if volume > best_volume:
                best_params, best_volume = params, volume
        log.info(
            "iteration %d: volume %s params %s window %s",
            it,
            "none" if volume is None else f"{volume:.9f}",
            params,
            [f"[{a:.6f}, {b:.6f}]" for a, b in zip(lo, hi)],
        )
        prev_volume, cur_volume = cur_volume, (volume if volume is not None else cur_volume)
        lo = [c - h for c in center]
        hi = [c + h for c in center]
    final_cfg = replace(cfg.admissibility, tol=cfg.admissibility.tol / 10)
    rep = is_admissible(param(best_params), body, final_cfg)
    log.info("final: volume %.9f params %s confirmed %s", best_volume, best_params, rep.admissible)
    return SearchResult(
        best_params=[float(p) for p in best_params],
        best_volume=float(best_volume),
        window_lo=[float(v) for v in lo],
        window_hi=[float(v) for v in hi],
        history=history,
        confirmed=rep.admissible,
        confirm_max_f=rep.max_f,
    )


class IsoFormatter(logging.Formatter):
    """'YYYY-MM-DDTHH:MM:SSZ - message'; zeroed clock when deterministic."""

    def __init__(self, deterministic: bool = False):
        super().__init__()
        self.deterministic = deterministic

    def format(self, record):
        if self.deterministic:
            stamp = "1970-01-01T00:00:00Z"
        else:
            stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(record.created))
        return f"{stamp} - {record.getMessage()}"


def configure_logging(path: Optional[str] = None, echo: bool = False, deterministic: bool = False):
    logger = logging.getLogger("dioph")
    logger.setLevel(logging.INFO)
    for h in list(logger.handlers):
        logger.removeHandler(h)
        h.close()
    fmt = IsoFormatter(deterministic)
    if path:
        fh = logging.FileHandler(path, mode="w")
        fh.setFormatter(fmt)
        logger.addHandler(fh)
    if echo:
        sh = logging.StreamHandler()
        sh.setFormatter(fmt)
        logger.addHandler(sh)
    return logger
