"""
Replicated Runs and Artifacts

This module runs pbbo_run once per replicate and writes each replicate's
artifacts under <out>/replicate_<k>/:

    frontier.csv               hyperparameters, log_D and N of every frontier point
    sweep.csv                  the loss of every frontier point for every kappa, selected flagged
    run.json                   seed, config echo, problem metadata, lambda* per kappa,
                               diagnostics and re-evaluations at lambda*
    optimum_prior_samples.csv  prior draws of theta at each selected lambda*
    timings.json               wall-clock seconds per stage

Replicate k draws from the root stream spawned with key k, so its artifacts
are the same whether replicates run one after another or in a joblib pool.
Wall-clock timings live in their own file so the other artifacts of two runs
with the same seed are byte-identical.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional
import logging
import os

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from distributions.rng import RngState
from models.problem import Problem, build_problem, optimum_prior_draws
from optimizer.pbbo import PbboRunError, RunResult, pbbo_run
from services.config_manager import RunConfig
from services.discrepancy import DiscrepancyEvaluator, SamplerError
from utils.artifact_utils import frontier_frame, write_csv, write_json

logger = logging.getLogger(__name__)

RUN_STREAM, DRAWS_STREAM, REEVALUATION_STREAM = 0, 1, 2

# execution settings left out of the run.json config echo; they do not change results
EXECUTION_KEYS = ("out", "jobs", "r_jobs")


@dataclass
class ReplicateOutcome:
    """
    Attributes:
        index (int): Replicate number.
        out_dir (str): Where its artifacts were written.
        result (Optional[RunResult]): None when the replicate failed.
        error (Optional[str]): The failure message.
    """

    index: int
    out_dir: str
    result: Optional[RunResult] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def replicate_dir(out: str, index: int) -> str:
    return os.path.join(out, f"replicate_{index:03d}")


def config_echo(raw: Dict[str, Any]) -> Dict[str, Any]:
    run = {k: v for k, v in raw.get("run", {}).items() if k not in EXECUTION_KEYS}
    return {**raw, "run": run}


def selected_points(result: RunResult) -> Dict[int, List[float]]:
    """Frontier index -> kappas selecting it, in frontier order."""
    points: Dict[int, List[float]] = {}
    for kappa, idx in zip(result.sweep.kappas, result.sweep.selected):
        points.setdefault(int(idx), []).append(float(kappa))
    return dict(sorted(points.items()))


def reevaluate(problem: Problem, run_cfg: RunConfig, lam: np.ndarray, n_times: int, rng: RngState) -> Dict[str, Any]:
    """Mean and SD of n_times fresh log D estimates at lam."""
    evaluator = DiscrepancyEvaluator(problem.targets, problem.predictive_sampler, run_cfg.discrepancy, rng.spawn(0))
    values = np.array([evaluator(lam, rng.spawn(1, j)).log_D for j in range(n_times)])
    return {
        "values": values,
        "mean": float(values.mean()),
        "sd": float(values.std(ddof=1)) if n_times > 1 else 0.0,
    }


def write_artifacts(problem: Problem, run_cfg: RunConfig, result: RunResult, index: int, out_dir: str,
                    rng: RngState) -> None:
    names = problem.bounds.names
    write_csv(frontier_frame(result.front), os.path.join(out_dir, "frontier.csv"))
    write_csv(result.sweep.to_frame(), os.path.join(out_dir, "sweep.csv"))

    lambda_star = {}
    reevaluations = {}
    draw_frames = []
    for point, kappas in selected_points(result).items():
        lam = result.front.lam[point]
        for kappa in kappas:
            lambda_star[f"{kappa:g}"] = {
                "point": point,
                "lambda": dict(zip(names, lam)),
                "log_D": result.front.log_d[point],
                "N": result.front.n_value[point],
            }
        draws = optimum_prior_draws(problem, lam, run_cfg.n_optimum_draws, rng.spawn(DRAWS_STREAM, point))
        frame = pd.DataFrame(draws)
        frame.insert(0, "point", point)
        draw_frames.append(frame)
        if run_cfg.n_reevaluations:
            stats = reevaluate(problem, run_cfg, lam, run_cfg.n_reevaluations, rng.spawn(REEVALUATION_STREAM, point))
            reevaluations[str(point)] = {"kappas": kappas, **stats}
            logger.info("replicate %d point %d: log_D re-evaluated %.4f +/- %.4f", index, point, stats["mean"], stats["sd"])
    write_csv(pd.concat(draw_frames, ignore_index=True), os.path.join(out_dir, "optimum_prior_samples.csv"))

    write_json(
        {
            "replicate": index,
            "seed": result.seed,
            "stream_key": list(result.key),
            "problem": {"name": problem.name, "hyperparameters": list(names), **problem.metadata},
            "config": config_echo(run_cfg.raw),
            "lambda_star": lambda_star,
            "reevaluations": reevaluations,
            "diagnostics": result.diagnostics,
            "n_evaluated": len(result.evaluated),
        },
        os.path.join(out_dir, "run.json"),
    )
    write_json(result.timings, os.path.join(out_dir, "timings.json"))


def run_replicate(problem: Problem, run_cfg: RunConfig, index: int) -> ReplicateOutcome:
    out_dir = replicate_dir(run_cfg.out, index)
    rng = RngState(run_cfg.seed).spawn(index)
    logger.info("replicate %d: seed %d, output %s", index, run_cfg.seed, out_dir)
    try:
        result = pbbo_run(problem, run_cfg.discrepancy, run_cfg.optimizer, run_cfg.kappas, rng.spawn(RUN_STREAM))
        write_artifacts(problem, run_cfg, result, index, out_dir, rng)
    except (PbboRunError, SamplerError, ValueError, OSError) as e:
        logger.error("replicate %d failed: %s", index, e)
        return ReplicateOutcome(index, out_dir, error=str(e))
    return ReplicateOutcome(index, out_dir, result)


def run_replicates(run_cfg: RunConfig, problem: Optional[Problem] = None) -> List[ReplicateOutcome]:
    """
    Run every replicate, in a joblib pool when run_cfg.jobs != 1.

    Args:
        run_cfg (RunConfig): Validated configuration.
        problem (Optional[Problem]): Prebuilt problem; built from the config when omitted.

    Returns:
        List[ReplicateOutcome]: One per replicate, in replicate order.
    """
    problem = problem or build_problem(run_cfg.raw)
    os.makedirs(run_cfg.out, exist_ok=True)
    if run_cfg.jobs == 1 or run_cfg.replicates == 1:
        outcomes = [run_replicate(problem, run_cfg, k) for k in range(run_cfg.replicates)]
    else:
        outcomes = Parallel(n_jobs=run_cfg.jobs)(delayed(run_replicate)(problem, run_cfg, k) for k in range(run_cfg.replicates))
    failed = [o.index for o in outcomes if not o.ok]
    if failed:
        logger.error("%d of %d replicates failed: %s", len(failed), len(outcomes), failed)
    else:
        logger.info("all %d replicates finished; artifacts in %s", len(outcomes), run_cfg.out)
    return outcomes
