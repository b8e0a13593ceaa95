import csv
import json

import pytest

from levysym.cli import main
from levysym.experiments import ConfigError, parse_config, run_experiment

ISO = {"dim": 1, "drift": [0.0], "covariance": [[1.0]], "jump": None}


def thm11(seed=7, paths=5000):
    return {"experiment": "thm11", "seed": seed, "triple": ISO,
            "params": {"times": [0.5, 1.0], "start": [0.0],
                       "functions": [{"type": "indicator",
                                      "domain": {"type": "box", "lower": [-1.0], "upper": [1.0]}},
                                     {"type": "radial", "center": [0.0], "width": 0.5}]},
            "sampler": {"num_paths": paths, "steps": 10}}


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_isotropic_thm11_holds(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", write(tmp_path, "c.json", thm11()), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["verdict"] == "holds"
    assert set(summary) >= {"experiment", "verdict", "lhs", "rhs", "fingerprint"}
    rows = list(csv.DictReader((out / "results.csv").open()))
    assert [r["side"] for r in rows] == ["lhs", "rhs"]
    assert rows[0]["seed"] == "7"


def test_missing_seed(tmp_path, capsys):
    cfg = thm11()
    del cfg["seed"]
    assert main(["run", write(tmp_path, "c.json", cfg)]) == 1
    assert "seed" in capsys.readouterr().err


def test_seed_flag_overrides(tmp_path, capsys):
    cfg = thm11()
    del cfg["seed"]
    assert main(["run", write(tmp_path, "c.json", cfg), "--seed", "3", "--paths", "500"]) == 0
    s = json.loads(capsys.readouterr().out)
    assert s["fingerprint"]["seed"] == 3 and s["lhs"]["num_paths"] == 500


@pytest.mark.parametrize("cfg,field", [
    ({"seed": 1}, "experiment"),
    ({"experiment": "thm11", "seed": 1, "triple": ISO, "params": {"times": [1.0]}}, "functions"),
    ({"experiment": "survival", "seed": 1, "params": {"domain": {}, "start": [0], "T": 1}},
     "triple"),
    ({"experiment": "validate", "seed": 1, "triple": {"drift": [0.0], "covariance": [[1.0]]}},
     "dim"),
    ({"experiment": "validate", "seed": 1, "triple": ISO, "sampler": {"paths": 3}}, "paths"),
])
def test_malformed_configs_name_the_field(cfg, field):
    with pytest.raises(ConfigError, match=field):
        parse_config(cfg)


def test_validate_exit_codes(tmp_path, capsys):
    assert main(["validate", write(tmp_path, "t.json", ISO)]) == 0
    bad = dict(ISO, covariance=[[-1.0]])
    assert main(["validate", write(tmp_path, "b.json", bad)]) == 2
    assert "covariance-psd" in capsys.readouterr().out


def test_unreadable_config(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    (tmp_path / "x.json").write_text("{not json")
    assert main(["run", str(tmp_path / "x.json")]) == 1


def test_symmetrize_experiment():
    cfg = {"experiment": "symmetrize", "seed": 0,
           "triple": {"dim": 2, "drift": [3.0, -1.0], "covariance": [[1.0, 0.0], [0.0, 4.0]],
                      "jump": None}}
    s = run_experiment(cfg)
    assert s["status"] == 0 and s["triple"]["covariance"] == [[2.0, 0.0], [0.0, 2.0]]


def test_rerun_is_bit_exact():
    a = run_experiment(thm11(paths=3000))
    b = run_experiment(dict(thm11(paths=3000),
                            sampler={"num_paths": 3000, "steps": 10, "chunk_size": 97,
                                     "n_jobs": 3}))
    assert a["lhs"]["mean"] == b["lhs"]["mean"] and a["rhs"]["mean"] == b["rhs"]["mean"]


def test_oracle_kinds():
    for kind, params in [("oracle-bll", {"instances": 3}), ("oracle-rw", {"instances": 3}),
                         ("oracle-gauss", {"A": [[1.0, 0.0], [0.0, 4.0]], "b": [2.0, 0.0],
                                           "t": 1.0})]:
        s = run_experiment({"experiment": kind, "seed": 5, "params": params})
        assert s["status"] == 0, s
    s = run_experiment({"experiment": "oracle-psi", "seed": 5, "scenario": "cauchy-truncated-1d",
                        "params": {"n_list": [4, 16, 64]}})
    assert s["status"] == 0, s


def test_suite_filter(tmp_path, capsys):
    out = tmp_path / "suite"
    code = main(["suite", "--filter", "oracle-gauss", "--out", str(out)])
    assert code == 0
    assert json.loads((out / "suite.json").read_text())[0]["verdict"] == "holds"
