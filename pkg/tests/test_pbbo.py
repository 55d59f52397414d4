import numpy as np
import pytest

from distributions import RngState
from distributions import families
from models.problem import Problem
from optimizer.bounds import Bounds
from optimizer.crs2 import crs2_minimize
from optimizer.mspot import MspotConfig
from optimizer.pbbo import CountingObjective, OptimizerConfig, PbboRunError, build_initial_design, pbbo_run
from services.discrepancy import DiscrepancyConfig
from services.objectives import SecondaryConfig
from targets import Support, TargetSet, TargetSpec

BOX = Bounds.from_pairs([("mu", -3.0, 3.0), ("sd", 0.2, 3.0)])


class LocationScalePrior:
    def draw(self, lam, n, rng):
        return {"y": rng.normal(lam[0], lam[1], size=n)}

    def analytic_sd(self, lam):
        return {"y": np.array([lam[1]])}


def location_scale_sampler(lam, row, n, gen):
    return gen.normal(lam[0], lam[1], size=n)


def toy_problem():
    return Problem(
        name="toy",
        targets=TargetSet.single(TargetSpec(families.normal(1.0, 1.0), Support.real_line(), "N(1, 1)")),
        predictive_sampler=location_scale_sampler,
        prior=LocationScalePrior(),
        bounds=BOX,
        secondary=SecondaryConfig.from_sources({"y": "analytic"}),
    )


DISC = DiscrepancyConfig(n_predictive=200, n_importance=100)
SMALL = OptimizerConfig(n_crs2=40, n_batch=2, n_design=8, n_pad=2, mspot=MspotConfig(n_bo=3, n_new=50))


def test_run_produces_frontier_and_sweep():
    result = pbbo_run(toy_problem(), DISC, SMALL, [0.5, 1.0], RngState(0))
    assert len(result.front) >= 1
    assert np.all(BOX.contains(result.evaluated.lam))
    assert result.sweep.selected.shape == (2,)
    assert BOX.contains(result.lambda_star(0.5))
    assert result.diagnostics["n_log_d_evaluations"] >= 40
    assert result.diagnostics["crs2_population"] == 30
    assert "total" in result.timings


def test_reruns_are_identical():
    a = pbbo_run(toy_problem(), DISC, SMALL, [1.0], RngState(1))
    b = pbbo_run(toy_problem(), DISC, SMALL, [1.0], RngState(1))
    np.testing.assert_array_equal(a.front.lam, b.front.lam)
    np.testing.assert_array_equal(a.front.log_d, b.front.log_d)


def test_single_objective_mode_returns_one_point():
    cfg = OptimizerConfig(n_crs2=40, n_batch=2, n_design=8, n_pad=2,
                          mspot=MspotConfig(n_bo=2, n_new=50, mode="single_objective"))
    result = pbbo_run(toy_problem(), DISC, cfg, [0.1, 1.0], RngState(2))
    assert len(result.front) == 1
    assert result.evaluated.log_d.min() == result.front.log_d[0]


def test_design_too_small_for_surrogates():
    cfg = OptimizerConfig(n_crs2=40, n_design=2, n_pad=0, mspot=MspotConfig(n_bo=1, n_new=10))
    with pytest.raises(PbboRunError):
        pbbo_run(toy_problem(), DISC, cfg, [1.0], RngState(3))


def test_component_failure_names_the_stage():
    def broken(lam, row, n, gen):
        return np.full(n, np.nan)

    problem = toy_problem()
    problem = Problem(problem.name, problem.targets, broken, problem.prior, problem.bounds, problem.secondary)
    with pytest.raises(PbboRunError, match="crs2"):
        pbbo_run(problem, DISC, SMALL, [1.0], RngState(4))


def test_counting_objective_checks_bounds_and_nan():
    f = CountingObjective(lambda lam, rng: float(lam.sum()), BOX, RngState(5), "sum")
    assert f(np.array([0.0, 1.0])) == 1.0
    assert f.calls == 1
    with pytest.raises(ValueError):
        f(np.array([5.0, 1.0]))
    g = CountingObjective(lambda lam, rng: float("nan"), BOX, RngState(5), "nan")
    with pytest.raises(PbboRunError):
        g(np.array([0.0, 1.0]))


def test_initial_design_sizes():
    trace = crs2_minimize(lambda x: float(np.sum(x ** 2)), BOX, 60, RngState(6))
    design = build_initial_design(trace, 10, 3, BOX, lambda x: 0.0, RngState(7))
    assert len(design) == 13
    with pytest.raises(ValueError):
        build_initial_design(trace, 61, 0, BOX, lambda x: 0.0, RngState(7))


def test_optimizer_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(n_pad=-1)
    with pytest.raises(ValueError):
        OptimizerConfig(weight_scale="uniform")


@pytest.mark.slow
def test_recovers_location_and_scale():
    cfg = OptimizerConfig(n_crs2=400, n_batch=1, n_design=30, n_pad=5, mspot=MspotConfig(n_bo=20, n_new=500))
    disc = DiscrepancyConfig(n_predictive=2_000, n_importance=1_000)
    result = pbbo_run(toy_problem(), disc, cfg, [0.01], RngState(8))
    np.testing.assert_allclose(result.lambda_star(0.01), [1.0, 1.0], atol=0.3)
