import numpy as np
import pytest

from distributions import RngState
from optimizer.bounds import Bounds
from optimizer.design import Design, pad_design
from optimizer.mspot import MspotConfig, mspot_batch, rank_candidates, resample_batch
from optimizer.pareto import pareto_front

LINE = Bounds.from_pairs([("x", 0.0, 1.0)])


def f_d(x):
    return float((x[0] - 0.2) ** 2)


def f_n(x):
    return float((x[0] - 0.8) ** 2)


def _start(f_secondary):
    return pad_design(6, LINE, f_d, f_secondary, RngState(0))


def test_frontier_covers_the_tradeoff():
    cfg = MspotConfig(n_bo=20, n_new=200, n_eval=1)
    front, design = mspot_batch(f_d, f_n, _start(f_n), cfg, LINE, RngState(1))
    assert len(design) >= 20
    assert len(front) >= 3
    x = front.lam.ravel()
    assert np.all((x >= 0.1) & (x <= 0.9))
    assert x.min() <= 0.35 and x.max() >= 0.65
    assert np.all(np.diff(front.log_d) > 0)


def test_constant_secondary_gives_single_point():
    def flat(x):
        return 0.0

    cfg = MspotConfig(n_bo=5, n_new=100)
    front, _ = mspot_batch(f_d, flat, _start(flat), cfg, LINE, RngState(2))
    assert len(front) == 1


def test_single_objective_mode():
    cfg = MspotConfig(n_bo=5, n_new=100, mode="single_objective")
    front, design = mspot_batch(f_d, None, _start(None), cfg, LINE, RngState(3))
    assert front is None
    assert not design.has_secondary.any()
    assert design.log_d.min() < 0.01


def test_batch_needs_secondary_values():
    with pytest.raises(ValueError):
        mspot_batch(f_d, f_n, _start(None), MspotConfig(n_bo=1, n_new=10), LINE, RngState(4))


def test_config_validation():
    with pytest.raises(ValueError):
        MspotConfig(n_bo=0)
    with pytest.raises(ValueError):
        MspotConfig(n_new=5, n_eval=6)


def test_rank_candidates_orders_by_front():
    mean_d = np.array([0.0, 1.0, 2.0, 2.0])
    mean_n = np.array([2.0, 1.0, 0.0, 2.0])
    order = rank_candidates(mean_d, mean_n)
    assert order[-1] == 3
    np.testing.assert_array_equal(rank_candidates(mean_d, None), [0, 1, 2, 3])


def test_resample_batch_size():
    x = np.random.default_rng(5).uniform(size=(30, 1))
    evaluated = Design.build(x, [f_d(row) for row in x], [f_n(row) for row in x])
    front = pareto_front(evaluated, LINE.names)
    design = resample_batch(front, evaluated, 10, 3, LINE, f_d, f_n, RngState(6))
    assert len(design) == len(front) + max(10 - len(front), 0) + 3
    assert design.has_secondary.all()
    for row in front.lam:
        assert np.any(np.all(design.lam == row, axis=1))


def test_resample_batch_keeps_best_row_in_single_objective_mode():
    x = np.linspace(0.0, 1.0, 12).reshape(-1, 1)
    evaluated = Design.build(x, [f_d(row) for row in x])
    best = evaluated.subset([int(np.argmin(evaluated.log_d))])
    design = resample_batch(best, evaluated, 5, 2, LINE, f_d, None, RngState(7))
    assert len(design) == 7
    assert design.log_d.min() == evaluated.log_d.min()
