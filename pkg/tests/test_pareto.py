import itertools

import numpy as np
import pytest

from optimizer.design import Design
from optimizer.pareto import (
    ParetoFront,
    dominates,
    hypervolume_contribution,
    nds_rank,
    non_dominated_mask,
    pareto_front,
    reference_point,
)


def _union_area(points, ref):
    """Area dominated by points inside ref, by coordinate compression."""
    if len(points) == 0:
        return 0.0
    points = np.asarray(points)
    xs = np.unique(np.append(points[:, 0], ref[0]))
    ys = np.unique(np.append(points[:, 1], ref[1]))
    area = 0.0
    for (x0, x1), (y0, y1) in itertools.product(zip(xs[:-1], xs[1:]), zip(ys[:-1], ys[1:])):
        if np.any((points[:, 0] <= x0) & (points[:, 1] <= y0)):
            area += (x1 - x0) * (y1 - y0)
    return area


def test_dominates():
    assert dominates([0, 0], [1, 0])
    assert not dominates([0, 0], [0, 0])
    assert not dominates([0, 1], [1, 0])


def test_non_dominated_mask():
    points = [[0.0, 2.0], [1.0, 1.0], [2.0, 0.0], [2.0, 2.0], [1.5, 1.5]]
    np.testing.assert_array_equal(non_dominated_mask(points), [True, True, True, False, False])


def test_nds_ranks():
    points = [[0.0, 2.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]
    np.testing.assert_array_equal(nds_rank(points), [1, 1, 2, 3])


def test_hypervolume_staircase():
    points = np.array([[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]])
    np.testing.assert_allclose(hypervolume_contribution(points, [3.0, 3.0]), [1.0, 1.0, 1.0])


def test_hypervolume_single_point():
    assert hypervolume_contribution([[0.0, 0.0]], [1.0, 1.0]) == pytest.approx([1.0])


def test_hypervolume_dominated_and_duplicate_points_contribute_nothing():
    points = np.array([[0.0, 1.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    contrib = hypervolume_contribution(points, [2.0, 2.0])
    assert contrib[0] == 0.0 and contrib[1] == 0.0 and contrib[3] == 0.0
    assert contrib[2] > 0


def test_hypervolume_requires_dominated_reference():
    with pytest.raises(ValueError):
        hypervolume_contribution([[0.0, 3.0]], [2.0, 2.0])


def test_hypervolume_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(30):
        points = rng.uniform(size=(rng.integers(1, 8), 2))
        ref = reference_point(points)
        total = _union_area(points, ref)
        contrib = hypervolume_contribution(points, ref)
        for i in range(points.shape[0]):
            rest = np.delete(points, i, axis=0)
            assert contrib[i] == pytest.approx(total - _union_area(rest, ref), abs=1e-12)


def test_reference_point_margin():
    np.testing.assert_allclose(reference_point([[0.0, 0.0], [1.0, 2.0]]), [1.1, 2.2])


def test_pareto_front_from_design():
    design = Design(
        np.arange(4, dtype=float).reshape(-1, 1),
        np.array([-1.0, -3.0, -2.0, 0.0]),
        np.array([1.0, 2.0, 3.0, np.nan]),
    )
    front = pareto_front(design, ("x",))
    np.testing.assert_array_equal(front.log_d, [-3.0, -1.0])
    np.testing.assert_array_equal(front.lam.ravel(), [1.0, 0.0])


def test_pareto_front_rejects_dominated_point():
    with pytest.raises(ValueError):
        ParetoFront(np.zeros((2, 1)), np.array([0.0, 1.0]), np.array([0.0, 1.0]), ("x",))


def test_pareto_front_needs_secondary_values():
    design = Design(np.zeros((1, 1)), np.zeros(1), np.full(1, np.nan))
    with pytest.raises(ValueError):
        pareto_front(design, ("x",))
