import pytest

from dioph.search import (
    IsoFormatter,
    NoAdmissibleCandidate,
    Parameterization,
    SearchConfig,
    configure_logging,
    grid_iteration,
    refine_search,
    resolve_workers,
)
from dioph.starbody import StarBody


def _cfg(param, **kw):
    return SearchConfig(param.var_count, **kw)


def test_grid_iteration_31():
    p = Parameterization(3, 1)
    cfg = _cfg(p)
    params, volume, h, checked = grid_iteration(cfg, (cfg.lo, cfg.hi), p, StarBody(3, 1), 0.0, 11)
    assert params == pytest.approx([1.0, 1.0], abs=1e-9)
    assert volume == pytest.approx(2.0, abs=1e-9)
    assert h == pytest.approx(0.2)
    assert checked > 0


def test_grid_iteration_rejects_high_threshold():
    p = Parameterization(3, 1)
    cfg = _cfg(p)
    with pytest.raises(NoAdmissibleCandidate):
        grid_iteration(cfg, (cfg.lo, cfg.hi), p, StarBody(3, 1), 2.5, 11)


def test_paper_strategy_is_admissible():
    p = Parameterization(3, 1)
    cfg = _cfg(p, strategy="paper", iterations=3)
    res = refine_search(cfg, p, StarBody(3, 1))
    assert res.confirmed
    assert res.best_volume == pytest.approx(p(res.best_params).det)
    assert res.best_volume <= 2.0 + 1e-9


def test_fixed_point_window():
    p = Parameterization(4, 2)
    centre = (0.816496580927726, 1.1547005383792515)
    cfg = _cfg(p, lo=tuple(c - 1e-7 for c in centre), hi=tuple(c + 1e-7 for c in centre), iterations=2)
    res = refine_search(cfg, p, StarBody(4, 2))
    assert res.best_volume == pytest.approx(16 / 9, abs=1e-6)


def test_history_and_monotone_best():
    p = Parameterization(3, 1)
    res = refine_search(_cfg(p, iterations=4), p, StarBody(3, 1), deterministic=True)
    assert len(res.history) == 4
    assert all(h.elapsed == 0.0 for h in res.history)
    vols = [h.volume for h in res.history if h.volume is not None]
    assert res.best_volume == max(vols)
    assert res.best_volume == pytest.approx(p(res.best_params).det)


def test_deterministic_across_workers():
    p = Parameterization(3, 1)
    body = StarBody(3, 1)
    r1 = refine_search(_cfg(p, iterations=3, workers=1), p, body, deterministic=True)
    r2 = refine_search(_cfg(p, iterations=3, workers=2), p, body, deterministic=True)
    assert r1.to_json() == r2.to_json()


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(2, lo=(1.0,), hi=(0.5,))
    with pytest.raises(ValueError):
        SearchConfig(2, intervals=1)
    with pytest.raises(ValueError):
        SearchConfig(2, strategy="nope")
    with pytest.raises(ValueError):
        Parameterization(7, 3)
    with pytest.raises(ValueError):
        Parameterization(4, 2, var_count=3)
    assert SearchConfig(3).lo == (0.0, 0.0, 0.0)


def test_custom_family():
    p = Parameterization(5, 2, family="custom", var_count=3)
    m = p((0.5, 1.0, 2.0))
    assert m.diag == 0.5 and m.blocks == (1.0, 2.0)
    with pytest.raises(ValueError):
        Parameterization(4, 2, family="custom", var_count=4)


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv("DIOPH_THREADS", raising=False)
    assert resolve_workers(None) == 1
    assert resolve_workers(3) == 3
    monkeypatch.setenv("DIOPH_THREADS", "5")
    assert resolve_workers(2) == 5


def test_log_format(tmp_path):
    path = tmp_path / "run.log"
    p = Parameterization(3, 1)
    configure_logging(str(path), deterministic=True)
    refine_search(_cfg(p, iterations=2), p, StarBody(3, 1))
    configure_logging(None)
    lines = path.read_text().splitlines()
    assert lines and all(line.startswith("1970-01-01T00:00:00Z - ") for line in lines)
    assert IsoFormatter(False).format(__import__("logging").makeLogRecord({"msg": "x", "created": 0})) == "1970-01-01T00:00:00Z - x"
