import numpy as np
import pytest

from distributions import RngState
from services.importance import proposal_log_density, sample_proposal, select_proposal
from targets import Support


def _with_moments(mean, var):
    # two points with exactly the given mean and unbiased variance
    half = np.sqrt(var / 2.0)
    return np.array([mean - half, mean + half])


def test_half_line_gamma_components():
    samples = _with_moments(2.0, 4.0)
    q = select_proposal(Support.positive_half_line(), samples, samples, c=1.05)
    _, comp = q.mixture.components[0]
    assert comp.family == "gamma"
    assert comp.params[0] == pytest.approx(4.0 / 4.41)
    assert comp.params[1] == pytest.approx(2.0 / 4.41)
    assert [w for w, _ in q.mixture.components] == [0.5, 0.5]


def test_real_line_student_t_components():
    samples = _with_moments(0.0, 1.0)
    q = select_proposal(Support.real_line(), samples, samples, c=1.05)
    for _, comp in q.mixture.components:
        assert comp.family == "student_t"
        assert comp.params == pytest.approx((5.0, 0.0, 1.05))


def test_bounded_weights_and_atom():
    rng = np.random.default_rng(0)
    samples = rng.beta(2.0, 3.0, size=1_000) * 21.0
    q = select_proposal(Support.bounded(21.0, (21.0,)), samples, samples)
    assert q.nominal_weights == (0.45, 0.45, 0.05)
    assert [w for w, _ in q.mixture.components] == pytest.approx([0.45 / 0.95, 0.45 / 0.95])
    assert [loc for _, loc in q.mixture.atoms] == [21.0]
    assert q.mixture.atoms[0][0] == pytest.approx(0.05 / 0.95)
    assert q.mixture.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert proposal_log_density(q, 21.0) == pytest.approx(np.log(0.05 / 0.95))
    assert proposal_log_density(q, 21.5) == -np.inf
    assert proposal_log_density(q, 0.0) == -np.inf


def test_unscaled_proposals_report_their_mixture_weights():
    samples = _with_moments(2.0, 4.0)
    q = select_proposal(Support.positive_half_line(), samples, samples)
    assert q.nominal_weights == (0.5, 0.5)


def test_bounded_atom_fraction_in_draws():
    rng = np.random.default_rng(1)
    samples = rng.uniform(0.0, 1.0, size=1_000)
    q = select_proposal(Support.bounded(1.0), samples, samples)
    draws = sample_proposal(q, 100_000, RngState(2))
    assert np.mean(draws == 1.0) == pytest.approx(0.05 / 0.95, abs=0.003)
    assert np.all((draws > 0) & (draws <= 1.0))


def test_half_line_draws_positive():
    rng = np.random.default_rng(3)
    q = select_proposal(Support.positive_half_line(), rng.gamma(2.0, size=500), rng.gamma(5.0, size=500))
    assert np.all(sample_proposal(q, 10_000, RngState(4)) > 0)


def test_real_line_draw_moments():
    rng = np.random.default_rng(5)
    q = select_proposal(Support.real_line(), rng.normal(-2, 1, size=2_000), rng.normal(3, 2, size=2_000))
    draws = sample_proposal(q, 200_000, RngState(6))
    means = [comp.params[1] for _, comp in q.mixture.components]
    scales = [comp.params[2] for _, comp in q.mixture.components]
    mix_mean = np.mean(means)
    mix_var = np.mean([s**2 * 5.0 / 3.0 + m**2 for m, s in zip(means, scales)]) - mix_mean**2
    assert draws.mean() == pytest.approx(mix_mean, abs=0.05)
    assert draws.var() == pytest.approx(mix_var, rel=0.05)


def test_identical_sample_sets_give_identical_components():
    rng = np.random.default_rng(7)
    samples = rng.gamma(3.0, size=300)
    q = select_proposal(Support.positive_half_line(), samples, samples, c=1.0)
    (_, a), (_, b) = q.mixture.components
    assert a == b


def test_gamma_variance_clamp():
    samples = np.array([1.0, 3001.0])
    q = select_proposal(Support.positive_half_line(), samples, samples, c=1.0)
    mean = samples.mean()
    _, comp = q.mixture.components[0]
    assert comp.params[1] == pytest.approx(mean / 1e5)


def test_zero_spread_marks_degenerate():
    q = select_proposal(Support.real_line(), np.full(10, 3.0), np.random.default_rng(8).normal(size=10))
    assert q.degenerate
    assert np.all(np.isfinite([comp.params[2] for _, comp in q.mixture.components]))


def test_beta_shapes_clamped_near_bernoulli_bound():
    samples = np.array([1e-9, 1.0, 1e-9, 1.0])
    q = select_proposal(Support.bounded(1.0), samples, samples)
    assert q.clamped
    for _, comp in q.mixture.components:
        assert min(comp.params[:2]) >= 1e-2


def test_observed_samples_have_finite_proposal_density():
    rng = np.random.default_rng(9)
    p = rng.gamma(2.0, 3.0, size=500)
    t = rng.lognormal(1.0, 0.5, size=500)
    q = select_proposal(Support.positive_half_line(), p, t)
    assert np.all(np.isfinite(proposal_log_density(q, np.concatenate([p, t]))))


def test_uniform_proposal():
    q = select_proposal(Support.bounded(1.0), [0.2, 0.4], [0.3, 0.5], kind="uniform")
    assert proposal_log_density(q, 0.3) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        select_proposal(Support.real_line(), [0.2, 0.4], [0.3, 0.5], kind="uniform")


def test_invalid_arguments():
    with pytest.raises(ValueError):
        select_proposal(Support.real_line(), [], [1.0])
    with pytest.raises(ValueError):
        select_proposal(Support.real_line(), [1.0, 2.0], [1.0, 2.0], c=0.9)
