"""
Controlled random search (CRS2) with local mutation.

A population spread uniformly over Lambda is improved by simplex reflections:
the centroid of the best member and L-1 random members reflects one more
random member. A reflection that leaves Lambda, or that does not beat the
population's worst member, is followed by a local mutation trial, a
coordinatewise random convex combination of the best member and the
reflection, clipped to Lambda. Any trial better than the worst member
replaces it. Every evaluation, including the initial population, is recorded.
"""
from dataclasses import dataclass
from typing import Callable, Optional
import logging

import numpy as np

from distributions.rng import RngLike, as_generator
from optimizer.bounds import Bounds

logger = logging.getLogger(__name__)


def population_size(dim: int) -> int:
    return max(10 * (dim + 1), 2 * dim + 2)


@dataclass(frozen=True)
class Crs2Trace:
    """
    Attributes:
        lam (np.ndarray): Every evaluated point, in evaluation order.
        values (np.ndarray): The objective at each point.
        population_size (int): Size of the search population.
    """

    lam: np.ndarray
    values: np.ndarray
    population_size: int

    def __len__(self) -> int:
        return self.values.size

    @property
    def best(self):
        i = int(np.argmin(self.values))
        return self.lam[i], float(self.values[i])


def crs2_minimize(f: Callable[[np.ndarray], float], bounds: Bounds, n_iters: int, rng: RngLike,
                  pop_size: Optional[int] = None) -> Crs2Trace:
    """
    Run CRS2 for exactly n_iters objective evaluations.

    Raises:
        ValueError: When n_iters is below the population size.
    """
    gen = as_generator(rng)
    dim = bounds.dim
    pop_size = pop_size or population_size(dim)
    if pop_size < dim + 1:
        raise ValueError(f"population of {pop_size} cannot form a simplex in {dim} dimensions")
    if n_iters < pop_size:
        raise ValueError(f"n_iters={n_iters} is below the CRS2 population size {pop_size}")
    logger.info("CRS2: %d evaluations, population %d, dimension %d", n_iters, pop_size, dim)

    trace_lam, trace_values = [], []

    def evaluate(x):
        value = float(f(x))
        trace_lam.append(np.array(x, dtype=float))
        trace_values.append(value)
        return value

    population = bounds.uniform(pop_size, gen)
    values = np.array([evaluate(x) for x in population])

    def try_replace(x, value):
        worst = int(np.argmax(values))
        if value < values[worst]:
            population[worst] = x
            values[worst] = value
            return True
        return False

    while len(trace_values) < n_iters:
        best = int(np.argmin(values))
        others = gen.choice(np.delete(np.arange(pop_size), best), size=dim, replace=False)
        centroid = (population[best] + population[others[:-1]].sum(axis=0)) / dim
        reflected = 2.0 * centroid - population[others[-1]]
        if bounds.contains(reflected):
            if try_replace(reflected, evaluate(reflected)) or len(trace_values) >= n_iters:
                continue
        omega = gen.uniform(size=dim)
        mutated = bounds.clip(omega * population[best] + (1.0 - omega) * reflected)
        try_replace(mutated, evaluate(mutated))

    return Crs2Trace(np.array(trace_lam), np.array(trace_values), pop_size)
