import json
import os

import numpy as np
import pandas as pd
import pytest

from models.problem import Problem, build_problem
from services.config_manager import ConfigManager
from services.run_service import config_echo, replicate_dir, run_replicates

SMOKE = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config", "smoke.yaml")
ARTIFACTS = ("frontier.csv", "sweep.csv", "run.json", "optimum_prior_samples.csv", "timings.json")


def smoke_config(out, **values):
    manager = ConfigManager(SMOKE)
    manager.set_value("run.out", str(out))
    manager.set_value("run.replicates", 1)
    for key, value in values.items():
        manager.set_value(key, value)
    return manager.run_config()


def _read(path):
    with open(path, "rb") as f:
        return f.read()


def test_smoke_run_writes_every_artifact(tmp_path):
    run_cfg = smoke_config(tmp_path, **{"run.n_reevaluations": 2})
    outcomes = run_replicates(run_cfg)
    assert [o.ok for o in outcomes] == [True]
    out_dir = replicate_dir(str(tmp_path), 0)
    for name in ARTIFACTS:
        assert os.path.exists(os.path.join(out_dir, name)), name

    with open(os.path.join(out_dir, "run.json")) as f:
        record = json.load(f)
    assert record["seed"] == 7
    assert set(record["lambda_star"]) == {"0.5", "1"}
    assert "out" not in record["config"]["run"]
    assert record["problem"]["hyperparameters"] == ["gamma", "a1", "b1"]
    for entry in record["reevaluations"].values():
        assert len(entry["values"]) == 2

    frontier = pd.read_csv(os.path.join(out_dir, "frontier.csv"))
    assert list(frontier.columns) == ["gamma", "a1", "b1", "log_D", "N"]
    sweep = pd.read_csv(os.path.join(out_dir, "sweep.csv"))
    assert len(sweep) == 2 * len(frontier)
    samples = pd.read_csv(os.path.join(out_dir, "optimum_prior_samples.csv"))
    assert list(samples.columns) == ["point"] + [f"beta[{k}]" for k in range(1, 11)] + ["sigma2"]
    assert len(samples) == 100 * len(record["reevaluations"])


def test_same_seed_gives_identical_artifacts(tmp_path):
    run_replicates(smoke_config(tmp_path / "a"))
    run_replicates(smoke_config(tmp_path / "b"))
    for name in ("frontier.csv", "sweep.csv", "run.json", "optimum_prior_samples.csv"):
        assert _read(os.path.join(replicate_dir(str(tmp_path / "a"), 0), name)) == \
            _read(os.path.join(replicate_dir(str(tmp_path / "b"), 0), name)), name


def test_failed_replicate_is_reported(tmp_path):
    run_cfg = smoke_config(tmp_path)
    problem = build_problem(run_cfg.raw)

    def broken(lam, row, n, gen):
        return np.full(n, np.nan)

    broken_problem = Problem(problem.name, problem.targets, broken, problem.prior, problem.bounds, problem.secondary)
    outcomes = run_replicates(run_cfg, broken_problem)
    assert not outcomes[0].ok
    assert "crs2" in outcomes[0].error


def test_config_echo_drops_execution_keys():
    echo = config_echo({"run": {"seed": 1, "out": "x", "jobs": 4, "r_jobs": 2}, "kappa": [1.0]})
    assert echo == {"run": {"seed": 1}, "kappa": [1.0]}


@pytest.mark.slow
def test_parallel_replicates_match_sequential(tmp_path):
    sequential = smoke_config(tmp_path / "seq", **{"run.replicates": 2})
    parallel = smoke_config(tmp_path / "par", **{"run.replicates": 2, "run.jobs": 2})
    run_replicates(sequential)
    run_replicates(parallel)
    for k in range(2):
        assert _read(os.path.join(replicate_dir(str(tmp_path / "seq"), k), "frontier.csv")) == \
            _read(os.path.join(replicate_dir(str(tmp_path / "par"), k), "frontier.csv"))
