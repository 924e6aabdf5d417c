import json

import pytest
from click.testing import CliRunner

from seglab.cli import main

from conftest import T1_CSV

BUILD_CONFIG = {
    "dataset_id": "ds1",
    "filter": {"date_start": "2024-01-01", "date_end": "2024-03-10"},
    "features": ["profit", "volume_tons", "frequency"],
    "algorithm": "kmeans",
    "params": {"k": 2, "seed": 7},
    "label_specs": [
        {"label_name": "Strategic", "levels": {"profit": "very_high"}},
        {"label_name": "Developing", "levels": {"profit": "moderate"}},
    ],
}


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def env(tmp_path):
    csv_path = tmp_path / "t1.csv"
    csv_path.write_text(T1_CSV)
    return {"workspace": str(tmp_path / "ws"), "csv": str(csv_path), "tmp": tmp_path}


def test_ingest_reports_summary(runner, env):
    result = runner.invoke(main, ["ingest", env["csv"], "--workspace", env["workspace"]])
    assert result.exit_code == 0, result.output
    summary = json.loads(result.output)
    assert summary["customers"] == 3
    assert summary["transactions"] == 6
    assert summary["dataset_id"] == "ds1"


def test_build_and_compare(runner, env):
    assert runner.invoke(main, ["ingest", env["csv"], "--workspace", env["workspace"]]).exit_code == 0
    config_path = env["tmp"] / "config.json"
    config_path.write_text(json.dumps(BUILD_CONFIG))
    first = runner.invoke(main, ["build", "--config", str(config_path), "--workspace", env["workspace"]])
    assert first.exit_code == 0, first.output
    second = runner.invoke(main, ["build", "--config", str(config_path), "--workspace", env["workspace"]])
    assert second.exit_code == 0
    compared = runner.invoke(main, ["compare", "1", "2", "--workspace", env["workspace"]])
    assert compared.exit_code == 0, compared.output
    report = json.loads(compared.output)
    assert report["ari"] == 1.0
    assert report["shared_customers"] == 3


def test_build_with_dataset_path_autoregisters(runner, env):
    config = {k: v for k, v in BUILD_CONFIG.items() if k != "dataset_id"}
    config["dataset_path"] = env["csv"]
    config_path = env["tmp"] / "config.json"
    config_path.write_text(json.dumps(config))
    result = runner.invoke(main, ["build", "--config", str(config_path), "--workspace", env["workspace"]])
    assert result.exit_code == 0, result.output


def test_build_validation_failure_lists_fields(runner, env):
    runner.invoke(main, ["ingest", env["csv"], "--workspace", env["workspace"]])
    config = dict(BUILD_CONFIG, label_specs=BUILD_CONFIG["label_specs"][:1])
    config_path = env["tmp"] / "config.json"
    config_path.write_text(json.dumps(config))
    result = runner.invoke(main, ["build", "--config", str(config_path), "--workspace", env["workspace"]])
    assert result.exit_code != 0
    assert "label_specs" in result.output


def test_workspace_env_var(runner, env, monkeypatch):
    monkeypatch.setenv("SEGLAB_WORKSPACE", env["workspace"])
    result = runner.invoke(main, ["ingest", env["csv"]])
    assert result.exit_code == 0
    assert (env["tmp"] / "ws" / "datasets" / "ds1.csv").exists()


def test_compare_missing_version_fails_cleanly(runner, env):
    result = runner.invoke(main, ["compare", "1", "2", "--workspace", env["workspace"]])
    assert result.exit_code != 0
