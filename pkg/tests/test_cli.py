import json

import pytest

from shufflecut.cli import (
    EXIT_CAP, EXIT_OK, EXIT_USAGE, EXIT_VERDICT, FORCE_FAIL_ENV, main,
)
from shufflecut.statespace import STATE_CAP_ENV


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == EXIT_OK
    out = capsys.readouterr().out.split()
    assert "separation-profile" in out and "cutoff-profile" in out


def test_run_writes_outputs(tmp_path, capsys):
    csv_path = tmp_path / "sep.csv"
    json_path = tmp_path / "sep.json"
    code = main(["separation-profile", "--n", "4", "--k", "2",
                 "--out", str(csv_path), "--json", str(json_path)])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip().endswith("result: PASS")
    assert csv_path.read_text().startswith("# experiment: separation-profile")
    payload = json.loads(json_path.read_text())
    assert payload["passed"] is True and payload["params"]["n"] == 4


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 4, "k": 2}))
    assert main(["separation-profile", "--config", str(cfg)]) == EXIT_OK
    assert main(["separation-profile", "--config", str(cfg), "--n", "5"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "n = 5" in out  # the flag wins over the file


def test_unknown_config_key_is_a_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 4, "k": 2, "bogus": 1}))
    assert main(["separation-profile", "--config", str(cfg)]) == EXIT_USAGE
    assert "bogus" in capsys.readouterr().err


def test_non_object_config_is_a_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]")
    assert main(["separation-profile", "--config", str(cfg)]) == EXIT_USAGE


def test_forced_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setenv(FORCE_FAIL_ENV, "1")
    assert main(["separation-profile", "--n", "4", "--k", "2"]) == EXIT_VERDICT
    assert "forced-failure" in capsys.readouterr().out


def test_state_cap_exit_code(monkeypatch, capsys):
    monkeypatch.setenv(STATE_CAP_ENV, "20")
    assert main(["separation-profile", "--n", "7", "--k", "3"]) == EXIT_CAP
    assert "refused" in capsys.readouterr().err


def test_unknown_experiment_is_rejected_by_argparse():
    with pytest.raises(SystemExit):
        main(["not-an-experiment"])


def test_half_filling_shorthand(capsys):
    assert main(["wilson-sandwich", "--n", "6", "--k", "half",
                 "--points", "5"]) == EXIT_OK
    assert "k = 3" in capsys.readouterr().out


def test_threads_flag(capsys):
    assert main(["separation-profile", "--n", "4", "--k", "2",
                 "--threads", "1"]) == EXIT_OK
