import json

import pytest

from etaforge.cli import ExperimentConfig, Report, main, run, suite
from etaforge.errors import ConfigError
from etaforge.experiments import EXPERIMENTS


def test_registry_size_and_tags():
    all_ids = [k for k, v in EXPERIMENTS.items() if "all" in v.tags]
    assert len(all_ids) == 16
    props = [k for k, v in EXPERIMENTS.items() if "properties" in v.tags]
    assert len(props) == 6
    assert not set(props) & set(all_ids)


def test_suite_filters():
    reports = suite("clifford", budget="quick")
    assert len(reports) == 1 and reports[0].experiment == "clifford-check"
    assert reports[0].passed
    assert suite("nonexistent-tag") == []


def test_unknown_experiment_rejected():
    with pytest.raises(ConfigError):
        run(ExperimentConfig("no-such-thing"))


def test_unknown_config_keys_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "clifford-check", "bogus": 1})
    with pytest.raises(ConfigError):
        run(ExperimentConfig("clifford-check", params={"bogus": 1}, budget="quick"))


def test_budget_validation():
    with pytest.raises(ConfigError):
        run(ExperimentConfig("clifford-check", budget="turbo"))
    with pytest.raises(ConfigError):
        run(ExperimentConfig("clifford-check", budget={"radii": 10_000}))
    r = run(ExperimentConfig("clifford-check", budget={"preset": "quick", "radii": 12}))
    assert r.passed


def test_report_determinism():
    cfg = ExperimentConfig("trace-tanh", budget="quick", seed=3)
    r1, r2 = run(cfg), run(cfg)
    assert r1.to_json(include_timing=False) == r2.to_json(include_timing=False)
    assert r1.config_hash == r2.config_hash


def test_config_hash_tracks_canonical_config():
    a = ExperimentConfig("trace-tanh", budget="quick", seed=3)
    b = ExperimentConfig("trace-tanh", budget="quick", seed=4)
    c = ExperimentConfig("trace-tanh", params={"mus": (1.0,)}, budget="quick", seed=3)
    assert a.config_hash() != b.config_hash()
    assert a.config_hash() != c.config_hash()
    assert a.config_hash() == ExperimentConfig("trace-tanh", budget="quick", seed=3).config_hash()


def test_report_schema():
    r = run(ExperimentConfig("clifford-check", params={"k": 2}, budget="quick"))
    data = json.loads(r.to_json())
    assert data["experiment"] == "clifford-check"
    assert data["pass"] is True
    assert data["config_hash"] == r.config_hash
    for row in data["checks"]:
        dev = row["abs_deviation"] if row["kind"] == "abs" else row["rel_deviation"]
        assert row["pass"] == (dev <= row["tolerance"])


def test_main_config_file(tmp_path, capsys):
    cfg = {"experiment": "clifford-check", "params": {"k": 3}, "budget": "quick"}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code = main(["--config", str(path), "--out", str(tmp_path / "reports")])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "clifford-check" in out
    written = json.loads((tmp_path / "reports" / "clifford-check.json").read_text())
    assert written["pass"] is True


def test_main_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": "clifford-check", "what": 1}))
    assert main(["--config", str(bad)]) == 2
    missing = tmp_path / "numeric.json"
    # an undersized ladder cannot carry the declared model: numeric failure
    missing.write_text(
        json.dumps({"experiment": "regint-demo", "budget": {"preset": "quick", "radii": 4}})
    )
    assert main(["--config", str(missing)]) == 3


def test_main_suite_and_csv(tmp_path, capsys):
    code = main(["--suite", "clifford", "--budget", "quick", "--out", str(tmp_path), "--emit-csv"])
    assert code == 0
    assert (tmp_path / "clifford-check.json").exists()
    csv_text = (tmp_path / "clifford-check.csv").read_text()
    assert csv_text.splitlines()[0].startswith("label,")


def test_main_list(capsys):
    assert main(["--list"]) == 0
    out = capsys.readouterr().out
    assert "divisor-flow" in out and "properties" in out


def test_divisor_flow_path_parameter():
    r = run(ExperimentConfig("divisor-flow", params={"path": "paper-f"}, budget="quick"))
    assert r.passed and len(r.rows) == 1
    r2 = run(ExperimentConfig("divisor-flow", params={"path": "linear"}, budget="quick"))
    assert r2.passed
