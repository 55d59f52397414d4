"""
Problem Registry

A Problem bundles everything pbbo_run needs for one translation task: the
targets with their covariate rows, the prior predictive sampler, the prior as
seen by the secondary objective, the box Lambda and the secondary objective's
SD sources. build_problem assembles one from the merged run configuration.

Data that the targets depend on (survival censoring times and covariates, the
R^2 design matrix, the roundtrip target) is drawn from problem.data_seed, so
targets stay fixed across replicates while optimizer seeds vary.
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping
import logging

import numpy as np

from distributions.rng import RngState
from models import preece_baines, r2, survival
from optimizer.bounds import Bounds
from services.discrepancy import PredictiveSampler
from services.objectives import PriorModel, SecondaryConfig
from constants.pbbo_constants import SUPPORT_CHECK_DRAWS
from targets.target import TargetSet, require_supported, target_from_config

logger = logging.getLogger(__name__)

PROBLEM_NAMES = ("survival", "r2", "preece_baines")

# data streams under the data seed
SURVIVAL_DATA_STREAM, DESIGN_MATRIX_STREAM, ROUNDTRIP_STREAM, SUPPORT_CHECK_STREAM = 0, 1, 2, 3


@dataclass(frozen=True)
class Problem:
    """
    Attributes:
        name (str): Registry name.
        targets (TargetSet): One target per covariate row.
        predictive_sampler (PredictiveSampler): (lambda, row, n, generator) -> draws.
        prior (PriorModel): Prior over theta for the secondary objective.
        bounds (Bounds): Lambda.
        secondary (SecondaryConfig): SD source per parameter block.
        metadata (dict): Problem details recorded in run.json.
    """

    name: str
    targets: TargetSet
    predictive_sampler: PredictiveSampler
    prior: PriorModel
    bounds: Bounds
    secondary: SecondaryConfig
    metadata: Dict[str, Any] = field(default_factory=dict)


def _secondary(defaults: Mapping[str, str], section: Mapping[str, Any]) -> SecondaryConfig:
    sources = dict(defaults)
    sources.update(section.get("sources") or {})
    unknown = set(sources) - set(defaults)
    if unknown:
        raise ValueError(f"secondary.sources names unknown parameter blocks {sorted(unknown)}; known: {sorted(defaults)}")
    return SecondaryConfig.from_sources(sources, int(section.get("n_draws", 10_000)), int(section.get("n_pairs", 10**6)))


def _survival(options: Mapping[str, Any], secondary: Mapping[str, Any], data_rng: RngState) -> Problem:
    n_individuals = int(options.get("n_individuals", 50))
    n_covariates = int(options.get("n_covariates", 4))
    data = survival.generate_survival_data(n_individuals, n_covariates, data_rng.spawn(SURVIVAL_DATA_STREAM))
    prior = survival.SurvivalPrior(n_covariates)
    sources = {"pi": "analytic", "gamma": "analytic", "beta0": "analytic", "beta": "analytic"}
    return Problem(
        name="survival",
        targets=survival.survival_targets(data),
        predictive_sampler=survival.SurvivalPredictiveSampler(prior),
        prior=prior,
        bounds=survival.survival_bounds(n_covariates),
        secondary=_secondary(sources, secondary),
        metadata={
            "n_individuals": n_individuals,
            "n_covariates": n_covariates,
            "censoring_times": data.censoring_times.tolist(),
        },
    )


def _r2(options: Mapping[str, Any], secondary: Mapping[str, Any], data_rng: RngState) -> Problem:
    kind = r2.R2PriorKind(options.get("prior", "gaussian"))
    n, p = int(options.get("n", 50)), int(options.get("p", 80))
    prior = r2.R2Prior(kind, r2.generate_design_matrix(n, p, data_rng.spawn(DESIGN_MATRIX_STREAM)))
    roundtrip = options.get("roundtrip")
    if roundtrip:
        target = r2.r2_roundtrip_target(
            prior, roundtrip["lambda0"], int(roundtrip.get("n_draws", 100_000)), data_rng.spawn(ROUNDTRIP_STREAM)
        )
    else:
        target = r2.r2_beta_target(*r2.r2_target_from_options(options.get("target") or {}))
    return Problem(
        name="r2",
        targets=TargetSet.single(target),
        predictive_sampler=r2.R2PredictiveSampler(prior),
        prior=prior,
        bounds=r2.r2_bounds(kind, n, p),
        secondary=_secondary(r2.SD_SOURCES[kind], secondary),
        metadata={"prior": kind.value, "n": n, "p": p, "target": target.label},
    )


def _preece_baines(options: Mapping[str, Any], secondary: Mapping[str, Any], data_rng: RngState) -> Problem:
    mode = options.get("target", "covariate_specific")
    if mode == "covariate_specific":
        targets = preece_baines.covariate_specific_targets(options.get("ages"))
    elif mode == "covariate_independent":
        targets = preece_baines.covariate_independent_target()
    else:
        raise ValueError(f"preece_baines.target must be covariate_specific or covariate_independent, got '{mode}'")
    prior = preece_baines.PreeceBainesPrior()
    return Problem(
        name="preece_baines",
        targets=targets,
        predictive_sampler=preece_baines.PreeceBainesPredictiveSampler(prior),
        prior=prior,
        bounds=preece_baines.pb_bounds(),
        secondary=_secondary(preece_baines.pb_secondary_sources(), secondary),
        metadata={"target": mode, "ages": [row["age"] for row, _ in targets.pairs if "age" in row.conditioning]},
    )


_BUILDERS: Dict[str, Callable[..., Problem]] = {
    "survival": _survival,
    "r2": _r2,
    "preece_baines": _preece_baines,
}


def build_problem(config: Mapping[str, Any]) -> Problem:
    """
    Build the configured problem.

    Args:
        config: The merged run configuration; reads the problem and secondary sections.

    Raises:
        ValueError: On an unknown problem name or invalid problem options.
        TargetSupportError: When a target puts mass outside its declared support.
    """
    section = config.get("problem", {})
    name = section.get("name")
    if name not in _BUILDERS:
        raise ValueError(f"unknown problem '{name}', expected one of {list(PROBLEM_NAMES)}")
    data_rng = RngState(int(section.get("data_seed", 0)))
    problem = _BUILDERS[name](section.get(name) or {}, config.get("secondary") or {}, data_rng)
    if section.get("target"):
        if problem.targets.R != 1:
            raise ValueError(f"a configured target replaces a single covariate-independent target; {name} has R={problem.targets.R}")
        override = target_from_config(section["target"])
        problem = Problem(problem.name, TargetSet.single(override), problem.predictive_sampler, problem.prior,
                          problem.bounds, problem.secondary, {**problem.metadata, "target": override.label})
    require_supported(problem.targets, SUPPORT_CHECK_DRAWS, data_rng.spawn(SUPPORT_CHECK_STREAM))
    logger.info("problem '%s': %d covariate rows, %d hyperparameters", name, problem.targets.R, problem.bounds.dim)
    return problem


def optimum_prior_draws(problem: Problem, lam, n: int, rng: RngState) -> Dict[str, np.ndarray]:
    """n prior draws at lam, flattened to one column per scalar parameter."""
    draws = problem.prior.draw(np.asarray(lam, dtype=float), n, rng.generator)
    columns: Dict[str, np.ndarray] = {}
    for name, values in draws.items():
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            columns[name] = values
        else:
            for k in range(values.shape[1]):
                columns[f"{name}[{k + 1}]"] = values[:, k]
    return columns


def problem_dimension(section: Mapping[str, Any]) -> int:
    """Dimension of Lambda for a problem section, without building the problem."""
    name = section.get("name")
    options = section.get(name) or {}
    if name == "survival":
        return len(survival.hyperparameter_names(int(options.get("n_covariates", 4))))
    if name == "r2":
        return len(r2.HYPERPARAMETER_NAMES[r2.R2PriorKind(options.get("prior", "gaussian"))])
    if name == "preece_baines":
        return len(preece_baines.hyperparameter_names())
    raise ValueError(f"unknown problem '{name}', expected one of {list(PROBLEM_NAMES)}")
