import numpy as np
import pytest

from distributions import RngState
from optimizer.pareto import ParetoFront
from services.objectives import (
    KappaSweep,
    SecondaryConfig,
    SecondaryObjectiveError,
    kappa_sweep,
    loss,
    qn_scale,
    secondary_objective,
)


class GaussianPrior:
    """Independent normals with standard deviations lam."""

    def draw(self, lam, n, rng):
        return {"theta": rng.normal(0.0, lam, size=(n, lam.size))}

    def analytic_sd(self, lam):
        return {"theta": lam}


def test_analytic_secondary_objective():
    cfg = SecondaryConfig.from_sources({"theta": "analytic"})
    value = secondary_objective(np.array([1.0, np.e]), GaussianPrior(), cfg, RngState(0))
    assert value == pytest.approx(-0.5)


def test_scaling_every_sd_shifts_by_log_k():
    cfg = SecondaryConfig.from_sources({"theta": "analytic"})
    lam = np.array([0.5, 2.0, 3.0])
    base = secondary_objective(lam, GaussianPrior(), cfg, RngState(0))
    scaled = secondary_objective(4.0 * lam, GaussianPrior(), cfg, RngState(0))
    assert scaled == pytest.approx(base - np.log(4.0))


def test_monte_carlo_matches_analytic():
    lam = np.array([0.5, 2.0])
    exact = secondary_objective(lam, GaussianPrior(), SecondaryConfig.from_sources({"theta": "analytic"}), RngState(1))
    mc_cfg = SecondaryConfig.from_sources({"theta": "monte_carlo"}, n_draws=50_000)
    mc = secondary_objective(lam, GaussianPrior(), mc_cfg, RngState(1))
    assert mc == pytest.approx(exact, abs=0.02)


def test_robust_scale_matches_normal_sd():
    draws = np.random.default_rng(2).normal(0.0, 3.0, size=20_000)
    assert qn_scale(draws, RngState(3), n_pairs=200_000) == pytest.approx(3.0, rel=0.02)


def test_robust_scale_uses_all_pairs_when_few():
    x = np.array([0.0, 1.0, 3.0])
    # differences 1, 3, 2; first quartile of (1, 2, 3) is 1.5
    assert qn_scale(x, RngState(0)) == pytest.approx(2.2219 * 1.5)


def test_robust_scale_finite_for_heavy_tails():
    draws = np.random.default_rng(4).standard_cauchy(size=10_000)
    assert np.isfinite(qn_scale(draws, RngState(5), n_pairs=100_000))


def test_nonpositive_sd_raises_with_component_name():
    cfg = SecondaryConfig.from_sources({"theta": "analytic"})
    with pytest.raises(SecondaryObjectiveError, match="theta"):
        secondary_objective(np.array([1.0, 0.0]), GaussianPrior(), cfg, RngState(0))


def test_missing_analytic_sd_raises():
    cfg = SecondaryConfig.from_sources({"sigma": "analytic"})
    with pytest.raises(SecondaryObjectiveError):
        secondary_objective(np.array([1.0]), GaussianPrior(), cfg, RngState(0))


def test_secondary_config_validation():
    with pytest.raises(ValueError):
        SecondaryConfig(())
    with pytest.raises(ValueError):
        SecondaryConfig.from_sources({"theta": "monte_carlo"}, n_draws=50)
    with pytest.raises(ValueError):
        SecondaryConfig.from_sources({"theta": "bootstrap"})


def test_loss():
    assert loss(-2.0, 1.5, 0.2) == pytest.approx(-1.7)
    with pytest.raises(ValueError):
        loss(-2.0, 1.5, 0.0)
    with pytest.raises(ValueError):
        loss(-2.0, 1.5, -1.0)


def _front(log_d, n_value):
    lam = np.arange(len(log_d), dtype=float).reshape(-1, 1)
    return ParetoFront(lam, np.asarray(log_d, dtype=float), np.asarray(n_value, dtype=float), ("x",))


def test_kappa_sweep_two_points():
    sweep = kappa_sweep(_front([-3.0, -1.0], [2.0, 0.0]), [0.5, 3.0])
    np.testing.assert_array_equal(sweep.selected, [0, 1])
    np.testing.assert_array_equal(sweep.lambda_star(3.0), [1.0])


def test_kappa_sweep_single_point():
    sweep = kappa_sweep(_front([-2.0], [1.0]), [0.1, 1.0, 10.0])
    np.testing.assert_array_equal(sweep.selected, [0, 0, 0])


def test_selected_n_nonincreasing_in_kappa():
    log_d = np.linspace(-5.0, 0.0, 20)
    n_value = np.exp(-log_d) / 10.0
    front = _front(log_d, n_value)
    kappas = np.array([0.01, 0.1, 0.5, 1.0, 5.0, 50.0])
    sweep = kappa_sweep(front, kappas)
    selected_n = front.n_value[sweep.selected]
    assert np.all(np.diff(selected_n) <= 0)


def test_ties_go_to_smaller_log_d():
    # losses at kappa = 1 are both -1
    sweep = kappa_sweep(_front([-2.0, -1.0], [1.0, 0.0]), [1.0])
    assert sweep.selected[0] == 0


def test_sweep_frame_columns():
    sweep = kappa_sweep(_front([-3.0, -1.0], [2.0, 0.0]), [0.5, 3.0])
    frame = sweep.to_frame()
    assert list(frame.columns) == KappaSweep.columns(("x",))
    assert len(frame) == 4
    assert frame.groupby("kappa")["selected"].sum().tolist() == [1, 1]


def test_sweep_rejects_bad_kappa():
    with pytest.raises(ValueError):
        kappa_sweep(_front([-3.0, -1.0], [2.0, 0.0]), [0.0])
