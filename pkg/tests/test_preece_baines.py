import numpy as np
import pytest

from distributions import RngState
from models.preece_baines import (
    PreeceBainesPredictiveSampler,
    PreeceBainesPrior,
    covariate_independent_target,
    covariate_specific_targets,
    hyperparameter_names,
    lognormal_from_moments,
    monotonicity_violation_rate,
    pb_bounds,
    pb_height,
)
from targets import CovariateRow

LAM = np.array([170.0, 5.0, 15.0, 1.0, 0.1, 0.01, 1.0, 0.1, 12.0, 0.5])


def test_height_at_takeoff_age():
    assert pb_height(13.0, (80.0, 10.0, 0.1, 0.9, 13.0)) == 80.0


def test_height_at_takeoff_for_random_parameters():
    gen = np.random.default_rng(0)
    for _ in range(100):
        theta = gen.uniform([50, 1, 0.01, 0.1, 9], [180, 30, 0.2, 1.5, 15])
        assert pb_height(theta[4], theta) == pytest.approx(theta[0], rel=1e-12)


def test_height_approaches_adult_height():
    assert pb_height(200.0, (150.0, 20.0, 0.1, 1.0, 13.0)) == pytest.approx(170.0, abs=1e-9)


def test_bounds_and_names():
    bounds = pb_bounds()
    assert bounds.dim == 10
    assert bounds.names == hyperparameter_names()
    assert bounds.names[:2] == ("mu_h0", "sigma_h0")
    assert bounds.contains(LAM)


def test_lognormal_from_moments():
    mu, sigma = lognormal_from_moments(10.0, 2.0)
    assert np.exp(mu + sigma ** 2 / 2) == pytest.approx(10.0)
    assert np.sqrt((np.exp(sigma ** 2) - 1) * np.exp(2 * mu + sigma ** 2)) == pytest.approx(2.0)


def test_prior_draws_match_moments():
    draws = PreeceBainesPrior().draw(LAM, 100_000, np.random.default_rng(1))
    assert draws["h0"].mean() == pytest.approx(170.0, rel=0.01)
    assert draws["h0"].std(ddof=1) == pytest.approx(5.0, rel=0.03)
    assert PreeceBainesPrior().analytic_sd(LAM)["gamma"] == 0.5


def test_targets():
    specific = covariate_specific_targets()
    assert [row["age"] for row, _ in specific.pairs] == [2.0, 8.0, 13.0, 18.0]
    assert covariate_specific_targets([8.0, 18.0]).R == 2
    with pytest.raises(ValueError):
        covariate_specific_targets([5.0])
    assert covariate_independent_target().R == 1


def test_sampler_at_fixed_age():
    sampler = PreeceBainesPredictiveSampler()
    row = CovariateRow(np.array([12.0]), {"age": 12.0})
    draws = sampler(LAM, row, 50_000, np.random.default_rng(2))
    # at age 12 = mean gamma the curve is near h0
    assert draws.mean() == pytest.approx(170.0, abs=3.0)


def test_sampler_without_age_spreads_over_growth():
    sampler = PreeceBainesPredictiveSampler()
    draws = sampler(LAM, CovariateRow(), 20_000, np.random.default_rng(3))
    assert np.all(np.isfinite(draws))
    assert draws.std() > 10.0


def test_monotonicity_violation_rate():
    assert monotonicity_violation_rate(LAM, 2_000, RngState(4)) < 0.01
    steep = np.array([130.0, 1.0, 30.0, 1.0, 0.2, 0.01, 1.0, 0.1, 15.0, 0.1])
    assert monotonicity_violation_rate(steep, 2_000, RngState(5)) > 0.5
