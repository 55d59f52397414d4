import pytest
import yaml

from services.config_manager import (
    DEFAULT_CONFIG,
    OUTPUT_DIR_ENV,
    ConfigError,
    ConfigManager,
    RunConfig,
    deep_merge,
    parse_override,
    validate_config,
)
from services.discrepancy import DiscrepancyKind


def test_defaults_are_valid():
    assert validate_config(DEFAULT_CONFIG) == []


def test_nonpositive_kappa_is_named():
    violations = validate_config(deep_merge(DEFAULT_CONFIG, {"kappa": [0.5, 0]}))
    assert len(violations) == 1
    assert violations[0].startswith("kappa[1]")


def test_unknown_problem_lists_the_choices():
    violations = validate_config(deep_merge(DEFAULT_CONFIG, {"problem": {"name": "poisson"}}))
    assert len(violations) == 1
    assert "problem.name" in violations[0]
    for name in ("survival", "r2", "preece_baines"):
        assert name in violations[0]


def test_every_violation_is_reported():
    config = deep_merge(DEFAULT_CONFIG, {
        "discrepancy": {"n_predictive": 0},
        "optimizer": {"n_eval": 5, "n_new": 2},
        "run": {"seed": -1},
        "extras": {},
    })
    violations = validate_config(config)
    keys = {v.split(":")[0] for v in violations}
    assert {"discrepancy.n_predictive", "optimizer.n_eval", "run.seed", "extras"} <= keys


def test_design_must_support_surrogates():
    config = deep_merge(DEFAULT_CONFIG, {"problem": {"name": "survival"}, "optimizer": {"n_design": 20, "n_pad": 0}})
    violations = validate_config(config)
    assert any(v.startswith("optimizer.n_design") and ">= 35" in v for v in violations)


def test_parse_override():
    assert parse_override("optimizer.n_bo=50") == (["optimizer", "n_bo"], 50)
    assert parse_override("kappa=[0.1, 1]") == (["kappa"], [0.1, 1])
    assert parse_override("run.out=") == (["run", "out"], None)
    with pytest.raises(ConfigError):
        parse_override("optimizer.n_bo")


def test_file_and_overrides(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({"problem": {"name": "preece_baines"}, "optimizer": {"n_bo": 20}}))
    manager = ConfigManager(str(path))
    manager.apply_overrides(["optimizer.n_bo=30", "discrepancy.kind=ad"])
    manager.set_value("run.out", "results/pb")
    config = manager.read_config()
    assert config["problem"]["name"] == "preece_baines"
    assert config["problem"]["r2"]["p"] == 80
    assert config["optimizer"]["n_bo"] == 30
    run_cfg = manager.run_config()
    assert run_cfg.discrepancy.kind is DiscrepancyKind.AD
    assert run_cfg.optimizer.mspot.n_bo == 30
    assert run_cfg.out == "results/pb"


def test_output_dir_from_environment(monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, "/tmp/pbbo_env_out")
    assert RunConfig.from_mapping(DEFAULT_CONFIG).out == "/tmp/pbbo_env_out"
    explicit = deep_merge(DEFAULT_CONFIG, {"run": {"out": "mine"}})
    assert RunConfig.from_mapping(explicit).out == "mine"


def test_invalid_config_raises_with_violations():
    with pytest.raises(ConfigError) as info:
        RunConfig.from_mapping(deep_merge(DEFAULT_CONFIG, {"kappa": []}))
    assert info.value.violations[0].startswith("kappa")


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        ConfigManager(str(tmp_path / "absent.yaml")).read_config()
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        ConfigManager(str(listing)).read_config()
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    assert ConfigManager(str(empty)).validate() == []


def test_declared_target_is_checked_against_its_support():
    signed = {"support": {"kind": "positive_half_line"}, "components": [{"family": "normal", "params": [0.0, 1.0]}]}
    violations = validate_config(deep_merge(DEFAULT_CONFIG, {"problem": {"target": signed}}))
    assert len(violations) == 1
    assert violations[0].startswith("problem.target")
    assert "outside" in violations[0]

    inside = {"support": {"kind": "bounded_interval", "upper": 1.0}, "components": [{"family": "beta", "params": [2, 2]}]}
    assert validate_config(deep_merge(DEFAULT_CONFIG, {"problem": {"target": inside}})) == []

    broken = {"components": [{"params": [0.0, 1.0]}]}
    assert validate_config(deep_merge(DEFAULT_CONFIG, {"problem": {"target": broken}}))[0].startswith("problem.target")
