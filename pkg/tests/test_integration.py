import csv
import json
import os
import shutil
import tempfile

import pytest
import yaml

from sleepcomb.cli import run_cli
from sleepcomb.config import DEFAULT_CONFIG_FILE, ENUM_CAP_ENV
from sleepcomb.disjunctions import iid_realizable, parse_disjunction, save_stream
from sleepcomb.graphs import save_graph
from sleepcomb.hard_instances import build_hard
from sleepcomb.logging import _cleanup_handlers
from sleepcomb.problems import Family
from sleepcomb.report import CSV_COLUMNS, SUMMARY_SCHEMA

pytestmark = pytest.mark.integration


@pytest.fixture
def integration_workspace(monkeypatch):
    """Create a temporary working directory for CLI runs."""
    temp_dir = tempfile.mkdtemp()
    monkeypatch.chdir(temp_dir)
    yield temp_dir
    _cleanup_handlers()
    shutil.rmtree(temp_dir)


def _summary_fields(line):
    return dict(item.split("=", 1) for item in line.split())


def _read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def test_verify_hard_passes(integration_workspace, capsys):
    exit_code = run_cli(["verify-hard", "--family", "shortest-path", "--n", "2"])
    assert exit_code == 0

    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("heaviness: PASS (exhaustive")
    assert lines[1].startswith("richness: PASS")


def test_literal_heaviness_fails_on_truncated_perm(integration_workspace, capsys):
    exit_code = run_cli(
        ["verify-hard", "--family", "truncated-perm", "--n", "1", "--literal-heaviness"]
    )
    assert exit_code == 1
    assert "heaviness: FAIL" in capsys.readouterr().out


def test_parallel_mincut_gadget_fails(integration_workspace, capsys):
    exit_code = run_cli(
        ["verify-extensible", "--family", "min-cut", "--paper-mincut-gadget"]
    )
    assert exit_code == 1

    out = capsys.readouterr().out
    assert "property2: FAIL" in out
    assert "counterexample=" in out


def test_verify_extensible_passes(integration_workspace, capsys):
    exit_code = run_cli(
        ["verify-extensible", "--family", "k-subsets", "--n", "2", "--p", "2"]
    )
    assert exit_code == 0

    out = capsys.readouterr().out
    assert "property1: PASS" in out
    assert "property2: PASS" in out


def test_oracle_random_instances(integration_workspace, capsys):
    exit_code = run_cli(["oracle", "--family", "min-cut", "--T", "50", "--seed", "3"])
    assert exit_code == 0
    assert capsys.readouterr().out.strip() == "oracle: PASS (50 checked)"


def test_reduce_disjunction_writes_outputs(integration_workspace, capsys):
    out_path = os.path.join(integration_workspace, "runs", "disj.csv")
    exit_code = run_cli(
        [
            "reduce-disjunction",
            "--n",
            "3",
            "--T",
            "300",
            "--seed",
            "5",
            "--target",
            "x1|~x3",
            "--out",
            out_path,
        ]
    )
    assert exit_code == 0

    summary = _summary_fields(capsys.readouterr().out.strip())
    assert summary["best_errors"] == "0"
    assert summary["T"] == "300"

    with open(out_path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 301

    with open(os.path.join(integration_workspace, "runs", "disj.summary.json")) as f:
        document = json.load(f)
    assert document["schema"] == SUMMARY_SCHEMA
    assert document["mistakes"] == int(summary["mistakes"])
    assert document["regret_best"] <= document["sanity_bound"]


def test_reduce_disjunction_from_file(integration_workspace, capsys):
    stream = iid_realizable(parse_disjunction("~x2", 2), 40, seed=9)
    path = os.path.join(integration_workspace, "stream.txt")
    save_stream(stream, path)

    exit_code = run_cli(["reduce-disjunction", "--n", "2", "--adversary", f"file:{path}"])
    assert exit_code == 0

    summary = _summary_fields(capsys.readouterr().out.strip())
    assert summary["T"] == "40"
    assert summary["best_errors"] == "0"
    assert summary["source"].startswith("file:")


def test_reduce_disjunction_stream_width_mismatch(integration_workspace):
    stream = iid_realizable(parse_disjunction("x1", 2), 10, seed=0)
    save_stream(stream, "stream.txt")
    exit_code = run_cli(["reduce-disjunction", "--n", "3", "--adversary", "file:stream.txt"])
    assert exit_code == 2


def test_reduce_per_action_chain(integration_workspace, capsys):
    exit_code = run_cli(
        ["reduce-per-action", "--family", "k-subsets", "--n", "1", "--T", "16", "--seed", "2"]
    )
    assert exit_code == 0

    summary = _summary_fields(capsys.readouterr().out.strip())
    assert summary["chain_holds"] == "1"
    assert summary["T"] == "16"
    assert summary["inner"] == "ftl"


def test_run_game_on_graph_file(integration_workspace, capsys):
    graph = build_hard(Family.MIN_CUT, 1).instance.graph
    save_graph(graph, "cut.txt")

    exit_code = run_cli(
        ["run-game", "--family", "min-cut", "--graph", "cut.txt", "--T", "30", "--seed", "4"]
    )
    assert exit_code == 0

    summary = _summary_fields(capsys.readouterr().out.strip())
    assert summary["T"] == "30"
    assert int(summary["actions"]) > 0


def test_run_game_is_deterministic(integration_workspace):
    for name in ("a.csv", "b.csv"):
        args = ["run-game", "--family", "shortest-path", "--n", "2", "--T", "60"]
        assert run_cli(args + ["--seed", "11", "--out", name]) == 0
    assert _read_bytes("a.csv") == _read_bytes("b.csv")


def test_noisy_disjunction_is_deterministic(integration_workspace):
    for name in ("a.csv", "b.csv"):
        args = ["reduce-disjunction", "--n", "3", "--T", "200", "--seed", "8"]
        args += ["--adversary", "iid-noisy:0.1", "--out", name]
        assert run_cli(args) == 0
    assert _read_bytes("a.csv") == _read_bytes("b.csv")
    assert _read_bytes("a.summary.json") == _read_bytes("b.summary.json")


def test_trials_write_per_seed_files(integration_workspace, capsys):
    exit_code = run_cli(
        [
            "run-game",
            "--family",
            "k-subsets",
            "--n",
            "1",
            "--T",
            "20",
            "--seed",
            "3",
            "--trials",
            "2",
            "--out",
            "out.csv",
        ]
    )
    assert exit_code == 0

    lines = capsys.readouterr().out.splitlines()
    assert [_summary_fields(line)["seed"] for line in lines] == ["3", "4"]
    for seed in (3, 4):
        assert os.path.exists(f"out.seed{seed}.csv")
        assert os.path.exists(f"out.seed{seed}.summary.json")


def test_config_file_caps_enumeration(integration_workspace):
    with open(DEFAULT_CONFIG_FILE, "w", encoding="utf-8") as f:
        yaml.dump({"enum_cap": 3}, f)

    args = ["run-game", "--family", "k-subsets", "--n", "1", "--T", "5", "--seed", "0"]
    assert run_cli(args) == 1


def test_env_caps_enumeration(integration_workspace, monkeypatch):
    monkeypatch.setenv(ENUM_CAP_ENV, "3")
    args = ["run-game", "--family", "k-subsets", "--n", "1", "--T", "5", "--seed", "0"]
    assert run_cli(args) == 1


def test_explicit_config_path(integration_workspace):
    path = os.path.join(integration_workspace, "conf", "small.yaml")
    os.makedirs(os.path.dirname(path))
    with open(path, "w", encoding="utf-8") as f:
        yaml.dump({"enum_cap": 3}, f)

    args = ["run-game", "--family", "k-subsets", "--n", "1", "--T", "5", "--seed", "0"]
    assert run_cli(["--config", path] + args) == 1
    assert run_cli(args) == 0


def test_log_file(integration_workspace):
    log_path = os.path.join(integration_workspace, "logs", "run.log")
    exit_code = run_cli(
        ["--log-file", log_path, "verify-hard", "--family", "k-subsets", "--n", "1"]
    )
    assert exit_code == 0

    _cleanup_handlers()
    with open(log_path, "r", encoding="utf-8") as f:
        assert "Starting verify-hard" in f.read()
