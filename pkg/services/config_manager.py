"""
Run Configuration Management

This module loads run settings from a YAML file, merges them over built-in
defaults, applies command-line overrides and validates the result.

Key features:
- Defaults for every section (problem, discrepancy, importance, secondary, optimizer, kappa, run)
- YAML loading with PyYAML safe_load and a recursive merge over the defaults
- Dotted-path overrides ("optimizer.n_bo=50") whose values follow YAML scalar rules
- Validation that reports every violation at once instead of stopping at the first

The module includes:
- A ConfigManager class for reading, overriding and validating configuration
- validate_config, returning the list of violations for a merged mapping
- RunConfig, the typed view handed to the run service
- ConfigError, carrying the violation list

Environment:
    PBBO_OUTPUT_DIR supplies the output directory when neither the file nor
    --out sets run.out.
"""

from copy import deepcopy
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple
import logging
import os

import yaml

from constants.pbbo_constants import DEFAULT_KAPPA_GRID, IMPORTANCE_WIDENING, QN_PAIRS, SUPPORT_CHECK_DRAWS
from distributions.rng import RngState
from models.problem import PROBLEM_NAMES, problem_dimension
from models.r2 import R2PriorKind
from optimizer.design import WEIGHT_SCALES
from optimizer.mspot import MspotConfig, SearchMode
from optimizer.pbbo import OptimizerConfig
from services.discrepancy import DiscrepancyConfig, DiscrepancyKind
from services.importance import PROPOSAL_KINDS
from services.objectives import SdSource
from targets.target import TargetSet, TargetSupportError, require_supported, target_from_config

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "PBBO_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "pbbo_output"
MAX_SEED = 2**64

DEFAULT_CONFIG: Dict[str, Any] = {
    "problem": {
        "name": "r2",
        "data_seed": 0,
        "target": None,
        "survival": {"n_individuals": 50, "n_covariates": 4},
        "r2": {"prior": "gaussian", "n": 50, "p": 80, "target": {"s1": 3.0, "s2": 3.0}, "roundtrip": None},
        "preece_baines": {"target": "covariate_specific", "ages": None},
    },
    "discrepancy": {
        "kind": "cvm",
        "n_predictive": 10_000,
        "n_importance": 5_000,
        "cache_target_samples": False,
    },
    "importance": {"kind": "auto", "widening": IMPORTANCE_WIDENING},
    "secondary": {"n_draws": 10_000, "n_pairs": QN_PAIRS, "sources": {}},
    "optimizer": {
        "mode": "multi_objective",
        "n_crs2": 1000,
        "n_batch": 1,
        "n_bo": 150,
        "n_design": 50,
        "n_pad": 10,
        "n_new": 1000,
        "n_eval": 1,
        "weight_scale": "neg_D",
    },
    "kappa": list(DEFAULT_KAPPA_GRID),
    "run": {
        "seed": 1,
        "replicates": 1,
        "out": None,
        "jobs": 1,
        "r_jobs": 1,
        "n_optimum_draws": 10_000,
        "n_reevaluations": 0,
    },
}


class ConfigError(ValueError):
    """Invalid configuration; violations lists every problem found."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    """Recursively merge override into a copy of base; non-mapping values replace."""
    merged = deepcopy(dict(base))
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = deepcopy(value)
    return merged


def parse_override(text: str) -> Tuple[List[str], Any]:
    """Split 'a.b.c=value' into (['a', 'b', 'c'], YAML-parsed value)."""
    if "=" not in text:
        raise ConfigError([f"override '{text}' must look like dotted.key=value"])
    key, raw = text.split("=", 1)
    path = [part for part in key.strip().split(".") if part]
    if not path:
        raise ConfigError([f"override '{text}' has an empty key"])
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigError([f"override '{text}': value is not valid YAML ({e})"]) from e
    return path, value


def set_dotted(config: Dict[str, Any], path: Sequence[str], value: Any) -> None:
    node = config
    for part in path[:-1]:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[path[-1]] = value


def _get(config: Mapping[str, Any], dotted: str) -> Any:
    node: Any = config
    for part in dotted.split("."):
        if not isinstance(node, Mapping) or part not in node:
            return None
        node = node[part]
    return node


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _declared_target_violations(declared: Any, data_seed: Any) -> List[str]:
    if not isinstance(declared, Mapping):
        return [f"problem.target: must be a mapping, got {declared!r}"]
    try:
        target = target_from_config(declared)
    except (KeyError, TypeError, ValueError) as e:
        return [f"problem.target: invalid target declaration ({e})"]
    seed = data_seed if _is_int(data_seed) and 0 <= data_seed < MAX_SEED else 0
    try:
        require_supported(TargetSet.single(target), SUPPORT_CHECK_DRAWS, RngState(seed))
    except TargetSupportError as e:
        return [f"problem.target: {e}"]
    return []


def validate_config(config: Mapping[str, Any]) -> List[str]:
    """
    Check a merged configuration.

    Returns:
        List[str]: One message per violation, each naming its dotted key; empty when valid.
    """
    violations: List[str] = []

    def count(key: str, minimum: int = 1):
        value = _get(config, key)
        if not _is_int(value) or value < minimum:
            violations.append(f"{key}: must be an integer >= {minimum}, got {value!r}")

    def choice(key: str, allowed: Sequence[str]):
        value = _get(config, key)
        if value not in allowed:
            violations.append(f"{key}: must be one of {list(allowed)}, got {value!r}")

    unknown = set(config) - set(DEFAULT_CONFIG)
    for key in sorted(unknown):
        violations.append(f"{key}: unknown section, expected one of {sorted(DEFAULT_CONFIG)}")

    choice("problem.name", PROBLEM_NAMES)
    name = _get(config, "problem.name")
    if not _is_int(_get(config, "problem.data_seed")) or not 0 <= _get(config, "problem.data_seed") < MAX_SEED:
        violations.append(f"problem.data_seed: must be an integer in [0, 2^64), got {_get(config, 'problem.data_seed')!r}")
    if name == "survival":
        count("problem.survival.n_individuals")
        count("problem.survival.n_covariates")
    elif name == "r2":
        choice("problem.r2.prior", [k.value for k in R2PriorKind])
        count("problem.r2.n")
        count("problem.r2.p", 2)
    elif name == "preece_baines":
        choice("problem.preece_baines.target", ["covariate_specific", "covariate_independent"])

    declared = _get(config, "problem.target")
    if declared:
        violations.extend(_declared_target_violations(declared, _get(config, "problem.data_seed")))

    choice("discrepancy.kind", [k.value for k in DiscrepancyKind])
    count("discrepancy.n_predictive")
    count("discrepancy.n_importance")
    if not isinstance(_get(config, "discrepancy.cache_target_samples"), bool):
        violations.append("discrepancy.cache_target_samples: must be true or false")

    choice("importance.kind", PROPOSAL_KINDS)
    widening = _get(config, "importance.widening")
    if not _is_number(widening) or widening < 1:
        violations.append(f"importance.widening: must be a number >= 1, got {widening!r}")

    count("secondary.n_draws", 100)
    count("secondary.n_pairs")
    sources = _get(config, "secondary.sources") or {}
    if not isinstance(sources, Mapping):
        violations.append("secondary.sources: must map parameter blocks to SD sources")
    else:
        for block, source in sources.items():
            if source not in [s.value for s in SdSource]:
                violations.append(f"secondary.sources.{block}: must be one of {[s.value for s in SdSource]}, got {source!r}")

    choice("optimizer.mode", [m.value for m in SearchMode])
    for key in ("n_crs2", "n_batch", "n_bo", "n_design", "n_new", "n_eval"):
        count(f"optimizer.{key}")
    count("optimizer.n_pad", 0)
    choice("optimizer.weight_scale", WEIGHT_SCALES)
    n_eval, n_new = _get(config, "optimizer.n_eval"), _get(config, "optimizer.n_new")
    if _is_int(n_eval) and _is_int(n_new) and n_eval > n_new:
        violations.append(f"optimizer.n_eval: must not exceed optimizer.n_new ({n_new}), got {n_eval}")
    n_design, n_pad = _get(config, "optimizer.n_design"), _get(config, "optimizer.n_pad")
    if name in PROBLEM_NAMES and _is_int(n_design) and _is_int(n_pad):
        try:
            dim = problem_dimension(config["problem"])
        except ValueError:
            dim = None
        if dim is not None and n_design + n_pad < 2 * dim + 1:
            violations.append(
                f"optimizer.n_design: n_design + n_pad must be >= {2 * dim + 1} for {dim} hyperparameters, "
                f"got {n_design + n_pad}"
            )

    kappas = config.get("kappa")
    if not isinstance(kappas, list) or not kappas:
        violations.append(f"kappa: must be a nonempty list of positive numbers, got {kappas!r}")
    else:
        for i, kappa in enumerate(kappas):
            if not _is_number(kappa) or not kappa > 0:
                violations.append(f"kappa[{i}]: must be > 0, got {kappa!r}")

    seed = _get(config, "run.seed")
    if not _is_int(seed) or not 0 <= seed < MAX_SEED:
        violations.append(f"run.seed: must be an integer in [0, 2^64), got {seed!r}")
    count("run.replicates")
    for key in ("run.jobs", "run.r_jobs"):
        value = _get(config, key)
        if not _is_int(value) or value == 0 or value < -1:
            violations.append(f"{key}: must be a positive integer or -1 (all cores), got {value!r}")
    count("run.n_optimum_draws")
    count("run.n_reevaluations", 0)
    out = _get(config, "run.out")
    if out is not None and not isinstance(out, str):
        violations.append(f"run.out: must be a path, got {out!r}")
    return violations


@dataclass(frozen=True)
class RunConfig:
    """
    Typed view of a validated configuration.

    Attributes:
        raw (dict): The merged mapping, echoed into run.json.
        discrepancy (DiscrepancyConfig): log D estimator settings.
        optimizer (OptimizerConfig): Stage budgets and search mode.
        kappas (tuple[float, ...]): kappa grid.
        seed (int): Root seed; replicate k uses the stream keyed k.
        replicates (int): Number of independent runs.
        out (str): Output directory.
        jobs (int): joblib workers across replicates.
        n_optimum_draws (int): Prior draws written at each lambda*.
        n_reevaluations (int): Fresh log D estimates at each lambda*.
    """

    raw: Dict[str, Any]
    discrepancy: DiscrepancyConfig
    optimizer: OptimizerConfig
    kappas: Tuple[float, ...]
    seed: int
    replicates: int
    out: str
    jobs: int
    n_optimum_draws: int
    n_reevaluations: int

    @classmethod
    def from_mapping(cls, config: Mapping[str, Any]) -> "RunConfig":
        violations = validate_config(config)
        if violations:
            raise ConfigError(violations)
        disc, imp, opt, run = config["discrepancy"], config["importance"], config["optimizer"], config["run"]
        discrepancy = DiscrepancyConfig(
            kind=disc["kind"],
            n_predictive=disc["n_predictive"],
            n_importance=disc["n_importance"],
            widening=float(imp["widening"]),
            importance_kind=imp["kind"],
            cache_target_samples=disc["cache_target_samples"],
            r_jobs=run["r_jobs"],
        )
        optimizer = OptimizerConfig(
            n_crs2=opt["n_crs2"],
            n_batch=opt["n_batch"],
            n_design=opt["n_design"],
            n_pad=opt["n_pad"],
            mspot=MspotConfig(n_bo=opt["n_bo"], n_new=opt["n_new"], n_eval=opt["n_eval"], mode=opt["mode"]),
            weight_scale=opt["weight_scale"],
        )
        out = run["out"] or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR
        return cls(
            raw=deepcopy(dict(config)),
            discrepancy=discrepancy,
            optimizer=optimizer,
            kappas=tuple(float(k) for k in config["kappa"]),
            seed=run["seed"],
            replicates=run["replicates"],
            out=out,
            jobs=run["jobs"],
            n_optimum_draws=run["n_optimum_draws"],
            n_reevaluations=run["n_reevaluations"],
        )


class ConfigManager:
    """
    Loads, overrides and validates run configuration.

    Attributes:
        config_path (Optional[str]): YAML file merged over the defaults, if any.
        default_config (Dict[str, Any]): Built-in defaults.

    Methods:
        read_config() -> Dict[str, Any]:
            Defaults merged with the file and every override applied so far.
        apply_overrides(overrides) -> None:
            Record dotted.key=value overrides.
        validate() -> List[str]:
            Every violation in the merged configuration.
        run_config() -> RunConfig:
            The typed view; raises ConfigError when invalid.
    """

    def __init__(self, config_path: Optional[str] = None):
        """
        Args:
            config_path (Optional[str]): Path to a YAML run configuration.
        """
        self.config_path = config_path
        self.default_config = deepcopy(DEFAULT_CONFIG)
        self._overrides: List[Tuple[List[str], Any]] = []

    def load_file(self) -> Dict[str, Any]:
        if self.config_path is None:
            return {}
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f)
        except FileNotFoundError as e:
            raise ConfigError([f"config file not found: {self.config_path}"]) from e
        except yaml.YAMLError as e:
            raise ConfigError([f"{self.config_path}: not valid YAML ({e})"]) from e
        if loaded is None:
            return {}
        if not isinstance(loaded, dict):
            raise ConfigError([f"{self.config_path}: top level must be a mapping"])
        return loaded

    def apply_overrides(self, overrides: Sequence[str]) -> None:
        for text in overrides:
            self._overrides.append(parse_override(text))

    def set_value(self, dotted: str, value: Any) -> None:
        """Override one key with an already-typed value."""
        self._overrides.append((dotted.split("."), value))

    def read_config(self) -> Dict[str, Any]:
        config = deep_merge(self.default_config, self.load_file())
        for path, value in self._overrides:
            set_dotted(config, path, value)
        return config

    def validate(self) -> List[str]:
        return validate_config(self.read_config())

    def run_config(self) -> RunConfig:
        config = self.read_config()
        try:
            return RunConfig.from_mapping(config)
        except ConfigError as e:
            logger.error("configuration has %d violation(s)", len(e.violations))
            raise
