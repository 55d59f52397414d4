"""
Secondary objective, combined loss and kappa sweep.

N(lambda) is the negated mean log marginal standard deviation of the model
parameters under the prior. Each parameter block picks where its standard
deviation comes from: a closed form supplied by the prior model, the sample SD
of Monte Carlo draws, or a robust pairwise-difference scale for heavy-tailed
marginals whose SD may not exist.

The loss L = log D + kappa * N scalarizes the frontier after optimization; the
sweep recomputes the minimum-loss point for every kappa in a grid.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Mapping, Protocol, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

from constants.pbbo_constants import QN_CONSTANT, QN_PAIRS
from distributions.rng import RngLike, as_generator

logger = logging.getLogger(__name__)


class SecondaryObjectiveError(ValueError):
    """A marginal standard deviation was non-positive or not finite."""


class SdSource(str, Enum):
    ANALYTIC = "analytic"
    MONTE_CARLO = "monte_carlo"
    ROBUST = "robust"


class PriorModel(Protocol):
    """Prior p(theta | lambda) as seen by the secondary objective."""

    def draw(self, lam: np.ndarray, n: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        """n draws per parameter block, shaped (n,) or (n, k)."""

    def analytic_sd(self, lam: np.ndarray) -> Dict[str, np.ndarray]:
        """Closed-form marginal SDs for the blocks that have one."""


@dataclass(frozen=True)
class SecondaryComponent:
    name: str
    source: SdSource

    def __post_init__(self):
        object.__setattr__(self, "source", SdSource(self.source))


@dataclass(frozen=True)
class SecondaryConfig:
    """
    Attributes:
        components (tuple[SecondaryComponent, ...]): Parameter blocks and their SD sources.
        n_draws (int): Prior draws for Monte Carlo and robust sources.
        n_pairs (int): Random pairs used by the robust scale.
    """

    components: Tuple[SecondaryComponent, ...]
    n_draws: int = 10_000
    n_pairs: int = QN_PAIRS

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("the secondary objective needs at least one component")
        if self.n_draws < 100:
            raise ValueError(f"n_draws must be >= 100, got {self.n_draws}")

    @classmethod
    def from_sources(cls, sources: Mapping[str, str], n_draws: int = 10_000, n_pairs: int = QN_PAIRS):
        return cls(tuple(SecondaryComponent(name, src) for name, src in sources.items()), n_draws, n_pairs)

    @property
    def needs_draws(self) -> bool:
        return any(c.source is not SdSource.ANALYTIC for c in self.components)


def qn_scale(x, rng: RngLike, n_pairs: int = QN_PAIRS) -> float:
    """
    Pairwise-difference robust scale: QN_CONSTANT times the first quartile of
    |x_i - x_j|. All pairs are used when there are at most n_pairs of them,
    otherwise n_pairs random pairs with i != j.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("the robust scale needs at least two values")
    total = x.size * (x.size - 1) // 2
    if total <= n_pairs:
        i, j = np.triu_indices(x.size, k=1)
    else:
        gen = as_generator(rng)
        i = gen.integers(0, x.size, size=n_pairs)
        j = (i + gen.integers(1, x.size, size=n_pairs)) % x.size
    return float(QN_CONSTANT * np.quantile(np.abs(x[i] - x[j]), 0.25))


def _block_sd(name: str, source: SdSource, draws: Mapping[str, np.ndarray], analytic: Mapping[str, np.ndarray],
              cfg: SecondaryConfig, gen: np.random.Generator) -> np.ndarray:
    if source is SdSource.ANALYTIC:
        if name not in analytic:
            raise SecondaryObjectiveError(f"no closed-form SD for component '{name}'")
        return np.atleast_1d(np.asarray(analytic[name], dtype=float))
    values = np.asarray(draws[name], dtype=float)
    values = values.reshape(values.shape[0], -1)
    if source is SdSource.MONTE_CARLO:
        return np.std(values, axis=0, ddof=1)
    return np.array([qn_scale(values[:, k], gen, cfg.n_pairs) for k in range(values.shape[1])])


def secondary_objective(lam, prior: PriorModel, cfg: SecondaryConfig, rng: RngLike) -> float:
    """
    N(lambda) = -(1/Q) * sum_q log SD[theta_q] over every scalar marginal.

    Raises:
        SecondaryObjectiveError: When an SD is non-positive or not finite; the message names the block.
    """
    lam = np.asarray(lam, dtype=float)
    gen = as_generator(rng)
    analytic = prior.analytic_sd(lam)
    draws = prior.draw(lam, cfg.n_draws, gen) if cfg.needs_draws else {}
    log_sds = []
    for component in cfg.components:
        sd = _block_sd(component.name, component.source, draws, analytic, cfg, gen)
        if not np.all(np.isfinite(sd)) or np.any(sd <= 0):
            raise SecondaryObjectiveError(
                f"component '{component.name}' ({component.source.value}) has SD {sd} at lambda={lam}"
            )
        log_sds.append(np.log(sd))
    return float(-np.mean(np.concatenate(log_sds)))


def loss(log_d, n_value, kappa: float):
    if not kappa > 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    return np.asarray(log_d, dtype=float) + kappa * np.asarray(n_value, dtype=float)


@dataclass(frozen=True)
class KappaSweep:
    """
    Attributes:
        kappas (np.ndarray): The kappa grid.
        selected (np.ndarray): Per kappa, the index of the minimum-loss frontier point.
        losses (np.ndarray): Loss table, frontier points x kappas.
        lam (np.ndarray), log_d (np.ndarray), n_value (np.ndarray): The frontier the sweep ran over.
        names (tuple[str, ...]): Hyperparameter names.
    """

    kappas: np.ndarray
    selected: np.ndarray
    losses: np.ndarray
    lam: np.ndarray
    log_d: np.ndarray
    n_value: np.ndarray
    names: Tuple[str, ...]

    def lambda_star(self, kappa: float) -> np.ndarray:
        k = int(np.flatnonzero(np.isclose(self.kappas, kappa))[0])
        return self.lam[self.selected[k]]

    def to_frame(self) -> pd.DataFrame:
        """One row per frontier point per kappa."""
        records = []
        for k, kappa in enumerate(self.kappas):
            for i in range(self.lam.shape[0]):
                record = {"kappa": kappa, "point": i}
                record.update({name: self.lam[i, j] for j, name in enumerate(self.names)})
                record.update({
                    "log_D": self.log_d[i],
                    "N": self.n_value[i],
                    "loss": self.losses[i, k],
                    "selected": int(self.selected[k] == i),
                })
                records.append(record)
        return pd.DataFrame.from_records(records, columns=self.columns(self.names))

    @staticmethod
    def columns(names: Sequence[str]):
        return ["kappa", "point", *names, "log_D", "N", "loss", "selected"]


def kappa_sweep(front, kappas: Sequence[float]) -> KappaSweep:
    """
    Minimum-loss frontier point for each kappa. Ties go to the smaller log D,
    then to the lexicographically smaller lambda.

    Args:
        front: Any object with lam (n x L), log_d (n,), n_value (n,) and names.
        kappas: kappa grid, every entry > 0.
    """
    lam = np.atleast_2d(np.asarray(front.lam, dtype=float))
    log_d = np.asarray(front.log_d, dtype=float)
    n_value = np.asarray(front.n_value, dtype=float)
    if log_d.size == 0:
        raise ValueError("cannot sweep kappa over an empty frontier")
    kappas = np.asarray(kappas, dtype=float)
    losses = np.column_stack([loss(log_d, n_value, kappa) for kappa in kappas])
    tie_keys = [lam[:, j] for j in reversed(range(lam.shape[1]))] + [log_d]
    selected = np.array([np.lexsort(tie_keys + [losses[:, k]])[0] for k in range(kappas.size)], dtype=int)
    for kappa, idx in zip(kappas, selected):
        logger.info("kappa=%g selects frontier point %d (log_D=%.4f, N=%.4f)", kappa, idx, log_d[idx], n_value[idx])
    return KappaSweep(kappas, selected, losses, lam, log_d, n_value, tuple(front.names))
