import os

import pandas as pd
import pytest

from cli.pbbo_cli import EXIT_CONFIG_FAILURE, EXIT_OK, EXIT_RUN_FAILURE, PbboCli, parse_kappas

SMOKE = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config", "smoke.yaml")


def test_validate_exit_codes(capsys):
    assert PbboCli().run(["validate", "--config", SMOKE]) == EXIT_OK
    assert "configuration is valid" in capsys.readouterr().out
    assert PbboCli().run(["validate", "--config", SMOKE, "--set", "kappa=[0]"]) == EXIT_CONFIG_FAILURE
    assert "kappa[0]" in capsys.readouterr().out


def test_validate_without_a_file():
    assert PbboCli().run(["validate"]) == EXIT_OK


def test_sweep_kappa_on_a_single_point(tmp_path, capsys):
    frontier = tmp_path / "frontier.csv"
    frontier.write_text("gamma,a1,b1,log_D,N\n10,5,5,-4.5,0.3\n")
    assert PbboCli().run(["sweep-kappa", str(frontier), "--kappa", "0.1,1,10"]) == EXIT_OK
    sweep = pd.read_csv(tmp_path / "sweep.csv")
    assert sweep["selected"].tolist() == [1, 1, 1]
    assert capsys.readouterr().out.count("point 0") == 3


def test_sweep_kappa_writes_where_asked(tmp_path):
    frontier = tmp_path / "frontier.csv"
    frontier.write_text("x,log_D,N\n0.1,-3,2\n0.2,-1,0\n")
    out = tmp_path / "custom.csv"
    assert PbboCli().run(["sweep-kappa", str(frontier), "--kappa", "0.5,3", "--out", str(out)]) == EXIT_OK
    sweep = pd.read_csv(out)
    chosen = sweep[sweep["selected"] == 1]
    assert chosen["point"].tolist() == [0, 1]


def test_sweep_kappa_rejects_malformed_frontier(tmp_path):
    frontier = tmp_path / "frontier.csv"
    frontier.write_text("x,y\n1,2\n")
    assert PbboCli().run(["sweep-kappa", str(frontier)]) == EXIT_RUN_FAILURE
    assert PbboCli().run(["sweep-kappa", str(tmp_path / "absent.csv")]) == EXIT_RUN_FAILURE


def test_kappa_grid_parsing():
    assert parse_kappas("0.1, 1") == [0.1, 1.0]
    with pytest.raises(SystemExit):
        PbboCli().run(["sweep-kappa", "frontier.csv", "--kappa", "0,1"])


def test_run_with_overrides(tmp_path):
    code = PbboCli().run([
        "run", "--config", SMOKE, "--out", str(tmp_path), "--replicates", "1", "--seed", "11",
        "--set", "optimizer.n_batch=1",
    ])
    assert code == EXIT_OK
    out_dir = tmp_path / "replicate_000"
    assert (out_dir / "frontier.csv").exists()
    assert (out_dir / "run.json").read_text().count('"seed": 11') == 2
    assert (tmp_path / "pbbo.log").exists()


def test_run_with_invalid_config(tmp_path):
    code = PbboCli().run(["run", "--config", SMOKE, "--out", str(tmp_path), "--set", "optimizer.n_design=1"])
    assert code == EXIT_CONFIG_FAILURE


def test_off_support_target_fails_validation_and_run(tmp_path, capsys):
    signed = "problem.target={support: {kind: positive_half_line}, components: [{family: normal, params: [0, 1]}]}"
    assert PbboCli().run(["validate", "--config", SMOKE, "--set", signed]) == EXIT_CONFIG_FAILURE
    assert "problem.target" in capsys.readouterr().out
    assert PbboCli().run(["run", "--config", SMOKE, "--out", str(tmp_path), "--set", signed]) == EXIT_CONFIG_FAILURE
    assert not (tmp_path / "replicate_000").exists()
