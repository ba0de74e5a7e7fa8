import json

import pytest

from dioph.cli import dumps17, main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_f3(capsys):
    code, out, _ = _run(capsys, "verify", "--theorem", "f3", "--deterministic")
    assert code == 0
    data = json.loads(out)
    assert data["ok"]
    assert data["results"][0]["exact_value"] == "3584 - 1600*sqrt5"
    assert all(v == "pass" for v in data["steps"].values())
    assert data["manifest"]["start"] == "1970-01-01T00:00:00Z"


def test_verify_v5(capsys):
    code, out, _ = _run(capsys, "verify", "--theorem", "v5")
    assert code == 0
    res = json.loads(out)["results"][0]
    assert res["verified"] and res["certificates"]["det_exact"]


def test_verify_general(capsys):
    code, out, _ = _run(capsys, "verify", "--theorem", "general")
    assert code == 0
    names = [r["name"] for r in json.loads(out)["results"]]
    assert names[0] == "general.V3" and len(names) == 10


def test_bounds_csv(capsys):
    code, out, _ = _run(capsys, "bounds", "--min-n", "3", "--max-n", "10", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,v_bound_exact,v_bound_float,delta,c_exact,c_float,furtwangler_baseline"
    assert len(lines) == 9
    assert lines[1].split(",")[5] == "0.120605"


def test_bounds_markdown_and_json(capsys, tmp_path):
    code, out, _ = _run(capsys, "bounds", "--min-n", "4", "--max-n", "4", "--format", "markdown")
    assert code == 0 and "16/(9*sqrt(1609))" in out
    path = tmp_path / "b.json"
    assert main(["bounds", "--format", "json", "--out", str(path), "--deterministic"]) == 0
    data = json.loads(path.read_text())
    assert len(data["rows"]) == 8 and "manifest" in data
    csv_path = tmp_path / "b.csv"
    assert main(["bounds", "--format", "csv", "--out", str(csv_path)]) == 0
    assert (tmp_path / "b.csv.manifest.json").exists()


def test_usage_errors(capsys):
    assert _run(capsys, "roots", "--poly", "missing.txt", "--interval", "0:1")[0] == 2
    assert _run(capsys, "bounds", "--min-n", "2")[0] == 2
    assert _run(capsys, "nonsense")[0] == 2
    assert _run(capsys, "verify", "--theorem", "f9")[0] == 2
    code, _, err = _run(capsys, "check", "--matrix", "nope.json", "--n", "3", "--s", "1")
    assert code == 2 and "not found" in err


def test_roots(capsys, tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("# x^2 - 2\n-2\n0\n1\n")
    code, out, _ = _run(capsys, "roots", "--poly", str(path), "--interval", "1:2")
    data = json.loads(out)
    assert code == 0 and data["bisection_count"] == 1 and data["newton_sylvester_bound"] >= 1
    path.write_text("1\n-2\n1\n")
    code, out, _ = _run(capsys, "roots", "--poly", str(path), "--interval", "0:2")
    assert code == 1 and "NotSquareFree" in json.loads(out)["error"]


def test_check(capsys, tmp_path):
    good = tmp_path / "a3.json"
    good.write_text('{"n": 3, "s": 1, "diag": 1.0, "blocks": [1.0]}')
    code, out, _ = _run(capsys, "check", "--matrix", str(good), "--n", "3", "--s", "1")
    assert code == 0 and json.loads(out)["report"]["admissible"]
    bad = tmp_path / "big.json"
    bad.write_text('{"n": 3, "s": 1, "diag": 1.1, "blocks": [1.0]}')
    assert _run(capsys, "check", "--matrix", str(bad), "--n", "3", "--s", "1")[0] == 1
    assert _run(capsys, "check", "--matrix", str(good), "--n", "4", "--s", "2")[0] == 2


def test_search_deterministic_bytes(tmp_path, monkeypatch):
    monkeypatch.delenv("DIOPH_THREADS", raising=False)
    outs = []
    for workers in ("1", "2"):
        path = tmp_path / f"s{workers}.json"
        args = ["search", "--n", "3", "--s", "1", "--iterations", "3", "--deterministic", "--workers", workers]
        assert main(args + ["--out", str(path)]) == 0
        data = json.loads(path.read_text())
        outs.append(json.dumps({k: v for k, v in data.items() if k != "manifest"}))
    assert outs[0] == outs[1]
    data = json.loads(outs[0])
    assert data["result"]["best_volume"] == pytest.approx(2.0)


def test_same_flags_same_bytes(tmp_path):
    texts = []
    for i in range(2):
        path = tmp_path / f"v{i}.json"
        assert main(["verify", "--theorem", "v3", "--deterministic", "--out", str(path)]) == 0
        texts.append(path.read_text().replace(str(path), "OUT"))
    assert texts[0] == texts[1]


def test_config_file(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text('{"iterations": 2, "n": 4, "s": 2}')
    code, out, _ = _run(capsys, "search", "--config", str(conf), "--n", "3", "--s", "1", "--deterministic")
    data = json.loads(out)
    assert code == 0
    assert data["manifest"]["config"]["n"] == 3
    assert len(data["result"]["history"]) == 2
    conf.write_text('{"bogus": 1}')
    assert _run(capsys, "bounds", "--config", str(conf))[0] == 2


def test_dumps17():
    text = dumps17({"a": 0.1, "b": [1.0 / 3], "c": float("nan"), "d": 2})
    assert '"a": 0.10000000000000001' in text
    assert "0.33333333333333331" in text
    assert "NaN" in text
