import csv
import filecmp
import json
import os

import numpy as np
import pytest

from mrfpareto import analysis, cli
from mrfpareto.analysis import default_queries, evaluate
from mrfpareto.errors import NoConvergence
from mrfpareto.model import MrfPortfolio
from mrfpareto.scenarios import random_portfolio

from conftest import three_component


def write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def scenario(p, **extra):
    return {"portfolio": p.to_dict(), **extra}


def test_missing_sigma_names_path(tmp_path, capsys):
    data = three_component().to_dict()
    del data["sigma"]
    code = cli.main(["eval", "--config", write(tmp_path / "bad.json", {"portfolio": data})])
    assert code == cli.EXIT_INVALID
    err = capsys.readouterr().err
    assert "$.portfolio" in err and "sigma" in err


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d["sigma"].__setitem__(0, -1.0), "sigma"),
    (lambda d: d["conditional_factors"][0].__setitem__("components", [9]), "components"),
])
def test_invalid_portfolios(tmp_path, capsys, mutate, fragment):
    data = three_component().to_dict()
    mutate(data)
    assert cli.main(["eval", "--config", write(tmp_path / "bad.json", data)]) == cli.EXIT_INVALID
    assert fragment in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    (tmp_path / "broken.json").write_text("{not json")
    assert cli.main(["eval", "--config", str(tmp_path / "broken.json")]) == cli.EXIT_INVALID
    assert cli.main(["eval", "--config", str(tmp_path / "absent.json")]) == cli.EXIT_INVALID
    assert cli.main(["eval"]) == cli.EXIT_INVALID


def test_level_out_of_range(tmp_path):
    cfg = write(tmp_path / "s.json", scenario(three_component(), queries={"levels": [1.0]}))
    assert cli.main(["eval", "--config", cfg]) == cli.EXIT_INVALID


def test_eval_report(tmp_path):
    p = three_component()
    cfg = write(tmp_path / "s.json", scenario(p, queries={"pairs": [[1, 2]], "levels": [0.9]}))
    assert cli.main(["eval", "--config", cfg, "--out", str(tmp_path / "out")]) == cli.EXIT_OK
    rep = json.loads((tmp_path / "out" / "eval.json").read_text())
    assert rep["command"] == "eval" and len(rep["config_hash"]) == 64
    assert "correlation[1,2]" in rep["results"] and "cte_maxima@q=0.9" in rep["results"]


def test_verify_random_three_component(tmp_path, capsys):
    p = random_portfolio(np.random.default_rng(4), n=3)
    cfg = write(tmp_path / "s.json", scenario(p))
    code = cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "v")])
    rep = json.loads((tmp_path / "v" / "verify.json").read_text())
    assert code == cli.EXIT_OK, capsys.readouterr().err
    assert rep["passed"] and rep["samples"] == 1_000_000 and len(rep["checks"]) >= 10


def test_verify_failure_exit_code(tmp_path, monkeypatch):
    real = analysis.joint_ddf
    monkeypatch.setattr(analysis, "joint_ddf", lambda p, x: real(p, x) + 0.05)
    cfg = write(tmp_path / "s.json", scenario(three_component()))
    assert cli.main(["verify", "--config", cfg, "--samples", "20000", "--out", str(tmp_path)]) \
        == cli.EXIT_VERIFY_FAILED


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise NoConvergence("series did not converge")
    monkeypatch.setattr(cli, "evaluate", boom)
    cfg = write(tmp_path / "s.json", scenario(three_component()))
    assert cli.main(["eval", "--config", cfg]) == cli.EXIT_NUMERICAL


def test_sample_round_trip(tmp_path):
    p = random_portfolio(np.random.default_rng(8), n=4)
    cfg = write(tmp_path / "s.json", scenario(p, mc={"seed": 5, "samples": 10_000}))
    assert cli.main(["sample", "--config", cfg, "--out", str(tmp_path), "--samples", "50"]) == 0
    back = MrfPortfolio.from_dict(json.loads((tmp_path / "portfolio.json").read_text()))
    assert back == p
    q = default_queries(p)
    assert evaluate(back, q) == evaluate(p, q)
    with open(tmp_path / "samples.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["rep", "x1", "x2", "x3", "x4"] and len(rows) == 51


def test_reproduce_section6_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["reproduce-section6", "--out", str(out), "--samples", "20000"]) == 0
    names = sorted(f for f in os.listdir(a) if f.endswith((".csv", ".json")))
    assert "correlations.csv" in names and "solvency_bonus_mu_sweep.csv" in names
    names += [f"portfolios/{f}" for f in sorted(os.listdir(a / "portfolios"))]
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert not mismatch and not errors
    with open(a / "correlations.csv") as fh:
        rows = {r["portfolio"]: r for r in csv.DictReader(fh)}
    assert abs(float(rows["case1"]["correlation"]) - 0.36) <= 0.005
    with open(a / "cte_minima.csv") as fh:
        assert sum(1 for _ in fh) == 1 + 4 * 99


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
