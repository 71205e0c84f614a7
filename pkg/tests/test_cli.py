"""End-to-end CLI runs through ``main`` with exit codes and artifacts."""

from __future__ import annotations

import dataclasses
import io
import json

import pandas as pd
import pytest

from jumpcodes import __version__, cli
from jumpcodes.config import settings

from tests.conftest import SEED


@pytest.fixture(autouse=True)
def no_registry(monkeypatch):
    monkeypatch.setattr(cli, "settings", dataclasses.replace(settings, database_url=None, threads=1))


def run_main(*argv: str) -> int:
    with pytest.raises(SystemExit) as exc:
        cli.main(list(argv))
    return exc.value.code


# ---- construct / verify / bounds ----

def test_verify_833(capsys):
    assert run_main("verify", "--code", "builtin-833", "--d", "3", "--seed", "11") == cli.EXIT_OK
    report = json.loads(capsys.readouterr().out)
    expected_hash = cli.RunConfig(command="verify", code="builtin-833", d=3, seed=11).resolved().hash()
    assert report["provenance"]["seed"] == 11
    assert report["provenance"]["config_hash"] == expected_hash
    assert report["provenance"]["version"] == __version__
    assert report["passed"] is True
    assert report["K"] == 3
    assert len(report["lambda_table"]) == 93


def test_verify_failure_exits_2(capsys):
    assert run_main("verify", "--code", "pairing(4)", "--d", "2") == cli.EXIT_FAILED
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is False
    assert report["violations"]


def test_verify_defaults_to_code_order(capsys):
    assert run_main("verify", "--code", "pairing(6)") == cli.EXIT_OK
    assert json.loads(capsys.readouterr().out)["d"] == 1


def test_bounds(capsys):
    assert run_main("bounds", "--N", "6", "--d", "1", "--seed", "5") == cli.EXIT_OK
    text = capsys.readouterr().out
    header = [line for line in text.splitlines() if line.startswith("#")]
    assert "# seed=5" in header
    assert any(line.startswith("# config_hash=") for line in header)
    df = pd.read_csv(io.StringIO(text), comment="#")
    r = df[(df.N == 6) & (df.d == 1) & (df.w == 3)].iloc[0]
    assert r.upper_bound == 10
    assert r.achieved == 10
    assert df.N.max() == 6


def test_construct_writes_file(tmp_path):
    out = tmp_path / "code.json"
    assert run_main("construct", "--code", "pairing(4)", "--out", str(out)) == cli.EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["K"] == 3
    assert payload["N"] == 4
    assert payload["provenance"]["command"] == "construct"
    assert payload["provenance"]["seed"] == settings.default_seed
    assert len(payload["provenance"]["config_hash"]) == 64


def test_constructed_file_loads_back(tmp_path, capsys):
    out = tmp_path / "code.json"
    assert run_main("construct", "--code", "pairing(6)", "--out", str(out)) == cli.EXIT_OK
    assert run_main("verify", "--code", str(out), "--d", "1") == cli.EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["K"] == 10
    assert report["passed"] is True


# ---- invalid input ----

@pytest.mark.parametrize("argv", [
    ("verify", "--code", "hamming(7)"),
    ("memory", "--q", "1.5", "--n-traj", "10"),
    ("memory", "--n-traj", "0"),
    ("memory", "--q", "0.1", "--delay", "0.1,0.2", "--n-traj", "10"),
    ("bounds", "--N", "30"),
    ("bounds", "--format", "xml"),
    ("verify", "--no-such-flag"),
    ("grover-rates", "--code", "pairing(2)", "--n-traj", "1"),
    ("memory", "--q", "0.1", "--kappa", "0", "--n-traj", "5"),
    ("trajectory-check", "--kappa", "0", "--n-traj", "5"),
])
def test_invalid_input_exits_1(argv):
    assert run_main(*argv) == cli.EXIT_INVALID


def test_missing_config_file_exits_1(tmp_path):
    assert run_main("memory", "--config", str(tmp_path / "absent.toml")) == cli.EXIT_INVALID


# ---- sweeps ----

def test_memory_sweep_is_reproducible_across_threads(tmp_path):
    a, b = tmp_path / "a" / "memory.csv", tmp_path / "b" / "memory.csv"
    common = ("memory", "--q", "0,0.3", "--n-traj", "60", "--seed", str(SEED))
    assert run_main(*common, "--threads", "1", "--out", str(a)) == cli.EXIT_OK
    assert run_main(*common, "--threads", "2", "--out", str(b)) == cli.EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert a.with_suffix(".json").exists()

    df = pd.read_csv(a, comment="#")
    assert df.parameter.tolist() == [0.0, 0.3]
    assert df.mean_fidelity.iloc[0] == pytest.approx(1.0, abs=1e-9)
    assert f"# seed={SEED}" in a.read_text().splitlines()


def test_config_file_values_and_flag_override(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text('code = "pairing(4)"\nq = [0.0, 0.2]\nn_traj = 30\nseed = 1\n')
    out = tmp_path / "memory.csv"
    assert run_main("memory", "--config", str(config), "--seed", "7", "--out", str(out)) == cli.EXIT_OK
    lines = out.read_text().splitlines()
    assert "# seed=7" in lines
    assert "# code=pairing(4)" in lines
    assert len(pd.read_csv(out, comment="#")) == 2


def test_unknown_config_key_exits_1(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text("colour = 3\n")
    assert run_main("memory", "--config", str(config)) == cli.EXIT_INVALID


def test_json_output_and_timing(tmp_path):
    out = tmp_path / "delay.json"
    argv = ("grover-delay", "--delay", "0", "--n-traj", "20", "--seed", str(SEED), "--timing", "--format", "json")
    assert run_main(*argv, "--out", str(out)) == cli.EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["provenance"]["parameter"] == "delay"
    assert payload["grid"] == [0.0]
    assert "wall_time" in payload["rows"][0]


def test_config_hash_ignores_output_and_threads():
    base = cli.RunConfig(command="memory", q=[0.1], seed=3, threads=1).resolved()
    other = cli.RunConfig(command="memory", q="0.1", seed=3, threads=4, out="x.csv").resolved()
    assert base.hash() == other.hash()
    assert base.hash() != cli.RunConfig(command="memory", q=[0.2], seed=3).resolved().hash()


def test_defaults_are_resolved():
    config = cli.RunConfig(command="grover-delay").resolved()
    assert config.code == "pairing(6)"
    assert config.kappa == 0.5
    assert config.seed == settings.default_seed
    assert config.n_traj == 2000


def test_grover_rates_defaults_to_fifty_samples():
    assert cli.RunConfig(command="grover-rates").resolved().n_traj == 50
    assert cli.RunConfig(command="grover-rates", n_traj=7).resolved().n_traj == 7


def test_n_traj_help_names_both_defaults(capsys):
    assert run_main("grover-rates", "--help") == 0
    help_text = " ".join(capsys.readouterr().out.split())
    assert "(default 2000)" in help_text
    assert "(default 50)" in help_text


# ---- trajectory-check ----

def test_trajectory_check(capsys):
    assert run_main("trajectory-check", "--n-traj", "100", "--seed", str(SEED)) == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["passed"] is True
    assert payload["code"] == "pairing(4)"
    assert payload["provenance"]["seed"] == SEED
    assert payload["provenance"]["command"] == "trajectory-check"
