"""
Two-stage prior translation run.

Stage 1 runs CRS2 on log D and turns its trace into an initial design by
softmax-weighted subsampling plus Latin hypercube padding. Stage 2 runs
N_batch MSPOT batches, resampling the design between batches, and the final
frontier is scalarized for every kappa in the grid.

Random streams (children of the run stream):
    0  cached target samples
    1  CRS2
    2  initial design
    3  MSPOT batches, keyed by batch
    4  resampling, keyed by batch
    7  log D evaluations, keyed by evaluation count
    8  N evaluations, keyed by evaluation count
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence
import logging
import time

import numpy as np

from distributions.rng import RngState
from optimizer.bounds import Bounds
from optimizer.crs2 import Crs2Trace, crs2_minimize
from optimizer.design import Design, design_log_weights, pad_design, weighted_subsample, WEIGHT_SCALES
from optimizer.mspot import MspotConfig, MspotStats, SearchMode, mspot_batch, resample_batch
from optimizer.pareto import ParetoFront, pareto_front
from services.discrepancy import DiscrepancyConfig, DiscrepancyEstimate, DiscrepancyEvaluator
from services.objectives import KappaSweep, kappa_sweep, secondary_objective

logger = logging.getLogger(__name__)

TARGET_CACHE_STREAM, CRS2_STREAM, DESIGN_STREAM, BATCH_STREAM, RESAMPLE_STREAM = 0, 1, 2, 3, 4
LOG_D_STREAM, N_STREAM = 7, 8


class PbboRunError(RuntimeError):
    """A component failed; the message carries the stage and batch."""


@dataclass(frozen=True)
class OptimizerConfig:
    """
    Attributes:
        n_crs2 (int): CRS2 evaluations.
        n_batch (int): MSPOT batches.
        n_design (int): Rows carried into each batch.
        n_pad (int): Latin hypercube rows added to each batch's design.
        mspot (MspotConfig): Per-batch settings, including the search mode.
        weight_scale (str): 'neg_D' or 'neg_log_D' for the subsampling weights.
    """

    n_crs2: int = 1000
    n_batch: int = 1
    n_design: int = 50
    n_pad: int = 10
    mspot: MspotConfig = field(default_factory=MspotConfig)
    weight_scale: str = "neg_D"

    def __post_init__(self):
        if self.n_crs2 < 1 or self.n_batch < 1 or self.n_design < 1 or self.n_pad < 0:
            raise ValueError("n_crs2, n_batch and n_design must be >= 1 and n_pad >= 0")
        if self.weight_scale not in WEIGHT_SCALES:
            raise ValueError(f"weight_scale must be one of {WEIGHT_SCALES}, got '{self.weight_scale}'")


class CountingObjective:
    """
    Wraps an objective so every call checks Lambda and draws from its own stream
    rng.spawn(call_index).
    """

    def __init__(self, fn: Callable[[np.ndarray, RngState], float], bounds: Bounds, rng: RngState, label: str):
        self.fn = fn
        self.bounds = bounds
        self.rng = rng
        self.label = label
        self.calls = 0

    def __call__(self, lam) -> float:
        lam = self.bounds.check(np.asarray(lam, dtype=float))
        stream = self.rng.spawn(self.calls)
        self.calls += 1
        value = float(self.fn(lam, stream))
        if np.isnan(value):
            raise PbboRunError(f"{self.label} returned nan at lambda={lam}")
        return value


@dataclass
class RunResult:
    """
    Attributes:
        front (ParetoFront): Final frontier (one point in single-objective mode).
        evaluated (Design): Every evaluated row across batches.
        sweep (KappaSweep): Minimum-loss selections per kappa.
        trace (Crs2Trace): Stage-1 trace.
        seed (int): Run seed; key (tuple): the run's stream key.
        diagnostics (dict): Evaluation counts, fallbacks, surrogate retries.
        timings (dict): Wall-clock seconds per stage.
    """

    front: ParetoFront
    evaluated: Design
    sweep: KappaSweep
    trace: Crs2Trace
    seed: int
    key: tuple
    diagnostics: Dict[str, object] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    def lambda_star(self, kappa: float) -> np.ndarray:
        return self.sweep.lambda_star(kappa)


def build_initial_design(trace: Crs2Trace, n_design: int, n_pad: int, bounds: Bounds, f_d, rng: RngState,
                         weight_scale: str = "neg_D") -> Design:
    """n_design trace rows drawn by softmax weights without replacement, plus n_pad evaluated LHS rows."""
    if len(trace) < n_design:
        raise ValueError(f"CRS2 trace has {len(trace)} rows, fewer than n_design={n_design}")
    idx = weighted_subsample(design_log_weights(trace.values, weight_scale), n_design, rng.spawn(0))
    design = Design.build(trace.lam[idx], trace.values[idx])
    return design.append(pad_design(n_pad, bounds, f_d, None, rng.spawn(1)))


def _best_row(design: Design) -> Design:
    return design.subset([int(np.argmin(design.log_d))])


def pbbo_run(problem, disc_cfg: DiscrepancyConfig, opt_cfg: OptimizerConfig, kappas: Sequence[float],
             rng: RngState) -> RunResult:
    """
    Translate the problem's targets into hyperparameters.

    Args:
        problem: models.problem.Problem bundle (targets, samplers, prior, bounds, secondary config).
        disc_cfg (DiscrepancyConfig): log D estimator settings.
        opt_cfg (OptimizerConfig): Stage budgets.
        kappas: kappa grid.
        rng (RngState): Run stream.

    Raises:
        PbboRunError: Wrapping any component failure with its stage and batch.
    """
    bounds = problem.bounds
    if opt_cfg.n_design + opt_cfg.n_pad < 2 * bounds.dim + 1:
        raise PbboRunError(f"n_design + n_pad must be >= {2 * bounds.dim + 1} to fit surrogates in {bounds.dim} dimensions")
    multi = opt_cfg.mspot.mode is SearchMode.MULTI_OBJECTIVE
    timings: Dict[str, float] = {}
    started = time.perf_counter()
    stage = "setup"
    estimates: List[DiscrepancyEstimate] = []

    try:
        evaluator = DiscrepancyEvaluator(problem.targets, problem.predictive_sampler, disc_cfg, rng.spawn(TARGET_CACHE_STREAM))

        def log_d(lam, stream):
            estimate = evaluator(lam, stream)
            estimates.append(estimate)
            return estimate.log_D

        def n_value(lam, stream):
            return secondary_objective(lam, problem.prior, problem.secondary, stream)

        f_d = CountingObjective(log_d, bounds, rng.spawn(LOG_D_STREAM), "log D")
        f_n = CountingObjective(n_value, bounds, rng.spawn(N_STREAM), "N")

        stage = "crs2"
        tic = time.perf_counter()
        trace = crs2_minimize(f_d, bounds, opt_cfg.n_crs2, rng.spawn(CRS2_STREAM))
        design = build_initial_design(trace, opt_cfg.n_design, opt_cfg.n_pad, bounds, f_d,
                                      rng.spawn(DESIGN_STREAM), opt_cfg.weight_scale)
        timings["crs2"] = time.perf_counter() - tic
        logger.info("stage 1 done: best log_D %.4f, design of %d rows", trace.best[1], len(design))

        stats = MspotStats()
        evaluated = Design.empty(bounds.dim)
        front: Optional[ParetoFront] = None
        for b in range(opt_cfg.n_batch):
            stage = f"batch {b + 1}/{opt_cfg.n_batch}"
            tic = time.perf_counter()
            if multi:
                design = design.with_secondary(f_n)
            front, batch_design = mspot_batch(f_d, f_n, design, opt_cfg.mspot, bounds, rng.spawn(BATCH_STREAM, b), stats)
            evaluated = evaluated.append(batch_design)
            if b + 1 < opt_cfg.n_batch:
                keep = front if multi else _best_row(batch_design)
                design = resample_batch(keep, batch_design, opt_cfg.n_design, opt_cfg.n_pad, bounds, f_d,
                                        f_n if multi else None, rng.spawn(RESAMPLE_STREAM, b), opt_cfg.weight_scale)
            timings[f"batch_{b + 1}"] = time.perf_counter() - tic
            logger.info("%s done: %d evaluated rows", stage, len(evaluated))

        stage = "selection"
        if multi:
            front = pareto_front(evaluated, bounds.names)
        else:
            best = _best_row(evaluated).with_secondary(f_n)
            front = pareto_front(best, bounds.names)
        sweep = kappa_sweep(front, kappas)
    except PbboRunError:
        raise
    except Exception as exc:
        logger.error("prior translation failed during %s: %s", stage, exc)
        raise PbboRunError(f"{stage}: {type(exc).__name__}: {exc}") from exc

    timings["total"] = time.perf_counter() - started
    diagnostics = {
        "crs2_population": trace.population_size,
        "n_log_d_evaluations": f_d.calls,
        "n_secondary_evaluations": f_n.calls,
        "n_ad_fallbacks": int(sum(e.n_fallbacks for e in estimates)),
        "n_degenerate_proposals": int(sum(e.n_degenerate for e in estimates)),
        "min_importance_ess": float(min(float(np.min(e.ess)) for e in estimates)) if estimates else float("nan"),
        "gp_retries": stats.gp_retries,
        "gp_fallbacks": stats.gp_fallbacks,
        "frontier_size": len(front),
    }
    return RunResult(front, evaluated, sweep, trace, rng.seed, rng.key, diagnostics, timings)
