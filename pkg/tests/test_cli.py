import json

import pytest

from miplace.cli import main

SMALL = {
    "synthetic_m": 60,
    "objective": "schur_mi",
    "optimizer": "lazy",
    "s_values": [2, 4],
    "n_train": 20,
    "n_candidates": 25,
    "n_test": 15,
    "seed": 7,
    "hyperparams": {
        "signal_variance": 1.0,
        "length_scale": 0.25,
        "noise_variance": 0.1,
    },
    "repeats": 1,
}


def _config_file(tmp_path, **over):
    doc = dict(SMALL)
    doc.update(over)
    p = tmp_path / "config.json"
    p.write_text(json.dumps(doc))
    return str(p)


def test_run_prints_json_report(tmp_path, capsys):
    rc = main(["--config", _config_file(tmp_path)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["records"]) == 2
    assert doc["config"]["optimizer"] == "lazy"


def test_out_writes_json_and_csv(tmp_path, capsys):
    stem = tmp_path / "report"
    rc = main(["--config", _config_file(tmp_path), "--out", str(stem)])
    assert rc == 0
    js = json.loads((tmp_path / "report.json").read_text())
    csv_text = (tmp_path / "report.csv").read_text()
    assert len(js["records"]) == 2
    header = csv_text.splitlines()[0]
    assert header == "s,repeat,objective,mi_standard,smse,rmse,evals,cache_s,select_s"
    assert len(csv_text.strip().splitlines()) == 3


def test_out_suffix_is_normalized(tmp_path):
    rc = main(["--config", _config_file(tmp_path), "--out", str(tmp_path / "r.csv")])
    assert rc == 0
    assert (tmp_path / "r.json").exists()
    assert (tmp_path / "r.csv").exists()


def test_flags_override_config(tmp_path, capsys):
    rc = main([
        "--config", _config_file(tmp_path),
        "--objective", "a_opt",
        "--optimizer", "greedy",
        "--s", "3",
        "--seed", "99",
    ])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["objective"] == "a_opt"
    assert doc["config"]["optimizer"] == "greedy"
    assert doc["config"]["s_values"] == [3]
    assert doc["config"]["seed"] == 99


def test_synthetic_flag_replaces_dataset(tmp_path, capsys):
    rc = main([
        "--config", _config_file(tmp_path, dataset="ghost.csv", synthetic_m=None),
        "--synthetic", "60",
    ])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["dataset"] == "synthetic-7-60"


def test_verify_exits_zero_and_reports(capsys):
    rc = main(["--verify", "20", "--seed", "3"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True
    assert doc["trials"] == 20
    assert len(doc["checks"]) == 5


def test_missing_dataset_is_usage_error(tmp_path, capsys):
    rc = main(["--dataset", str(tmp_path / "nope.csv"), "--s", "2"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_bad_config_json_is_usage_error(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    rc = main(["--config", str(p)])
    assert rc == 2
    assert "JSON" in capsys.readouterr().err


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    rc = main(["--config", _config_file(tmp_path, budget=5)])
    assert rc == 2
    assert "unknown config" in capsys.readouterr().err


def test_bad_s_list_is_usage_error(tmp_path, capsys):
    rc = main(["--config", _config_file(tmp_path), "--s", "5,x"])
    assert rc == 2
    assert "--s" in capsys.readouterr().err


def test_bad_objective_choice_is_argparse_error(capsys):
    with pytest.raises(SystemExit) as exc_info:
        main(["--objective", "entropy"])
    assert exc_info.value.code == 2


def test_verify_zero_trials_is_usage_error(capsys):
    rc = main(["--verify", "0"])
    assert rc == 2
