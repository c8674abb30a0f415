"""Integration tests for the ``cellfree`` command line."""

import json
import logging

import pandas as pd
import pytest

from cellfree_core.harness.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from tests.conftest import SMALL_SCENARIO


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ("CELLFREE_CONFIG", "CELLFREE_WORKERS", "CELLFREE_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_cellfree", False):
            root.removeHandler(handler)


def test_run_writes_csv(config_file, tmp_path):
    out = tmp_path / "run.csv"

    code = main(["run", "--config", config_file(SMALL_SCENARIO), "--out", str(out)])

    assert code == EXIT_OK
    frame = pd.read_csv(out)
    assert frame["row_type"].tolist() == ["raw", "raw", "aggregate"]
    assert set(frame["strategy"]) == {"sc"}
    echo = json.loads(frame["config"][0])
    assert echo["num_aps"] == SMALL_SCENARIO["num_aps"]
    assert "workers" not in echo
    assert frame["config"].nunique() == 1


def test_run_writes_json(config_file, tmp_path):
    out = tmp_path / "run.json"
    args = ["run", "--config", config_file(SMALL_SCENARIO), "--seed", "9"]

    code = main(args + ["--format", "json", "--out", str(out)])

    assert code == EXIT_OK
    with open(out, encoding="utf-8") as f:
        payload = json.load(f)
    assert payload["config"]["master_seed"] == 9
    assert "workers" not in payload["config"]
    assert {row["seed"] for row in payload["rows"]} == {9}


def test_strategies_flag(config_file, tmp_path):
    out = tmp_path / "run.csv"
    args = ["run", "--config", config_file(SMALL_SCENARIO), "--out", str(out)]

    assert main(args + ["--strategies", "wc,sc"]) == EXIT_OK

    raw = pd.read_csv(out).query("row_type == 'raw'")
    assert raw["strategy"].tolist() == ["sc", "wc", "sc", "wc"]


def test_sweep_over_users(config_file, tmp_path):
    out = tmp_path / "sweep.csv"
    args = ["sweep", "--config", config_file(SMALL_SCENARIO), "--out", str(out)]

    assert main(args + ["--users", "3,4"]) == EXIT_OK

    aggregates = pd.read_csv(out).query("row_type == 'aggregate'")
    assert aggregates["K"].tolist() == [3, 4]


def test_same_seed_same_bytes(config_file, tmp_path):
    path = config_file(SMALL_SCENARIO)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"

    assert main(["run", "--config", path, "--out", str(first)]) == EXIT_OK
    assert main(["run", "--config", path, "--out", str(second)]) == EXIT_OK

    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize(
    "values",
    [
        dict(SMALL_SCENARIO, num_aps=-1),
        dict(SMALL_SCENARIO, tau_p=150),
        dict(SMALL_SCENARIO, antennas=4),
    ],
)
def test_invalid_config_exits_with_one(values, config_file, tmp_path, capsys):
    code = main(["run", "--config", config_file(values), "--out", str(tmp_path / "x")])

    assert code == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args",
    [
        [],
        ["simulate"],
        ["run", "--strategies", "xc"],
        ["run", "--config", "does-not-exist.yaml"],
        ["--log-level", "LOUD", "run"],
        ["sweep", "--users", "3,x"],
    ],
)
def test_usage_errors_exit_with_one(args):
    assert main(args) == EXIT_CONFIG


def test_unwritable_output_exits_with_two(config_file, tmp_path, capsys):
    out = tmp_path / "missing" / "run.csv"

    code = main(["run", "--config", config_file(SMALL_SCENARIO), "--out", str(out)])

    assert code == EXIT_RUNTIME
    assert "run failed" in capsys.readouterr().err


def test_config_path_from_environment(config_file, tmp_path, monkeypatch):
    monkeypatch.setenv("CELLFREE_CONFIG", config_file(SMALL_SCENARIO))
    out = tmp_path / "run.csv"

    assert main(["run", "--out", str(out)]) == EXIT_OK
    assert len(pd.read_csv(out)) == 3


@pytest.mark.slow
def test_oracle_command(capsys):
    assert main(["oracle"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4
    assert all(" ok " in line for line in lines)
