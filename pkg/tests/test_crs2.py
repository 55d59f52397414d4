import numpy as np
import pytest

from distributions import RngState
from optimizer.bounds import Bounds
from optimizer.crs2 import crs2_minimize, population_size

BOX = Bounds.from_pairs([("x", -5.0, 5.0), ("y", -5.0, 5.0)])


def sphere(x):
    return float(np.sum(x ** 2))


def test_population_size():
    assert population_size(2) == 30
    assert population_size(17) == 180


def test_sphere_converges():
    trace = crs2_minimize(sphere, BOX, 1_000, RngState(0))
    _, best = trace.best
    assert best <= 1e-3


def test_trace_records_every_evaluation():
    calls = []

    def constant(x):
        calls.append(x)
        return 1.0

    trace = crs2_minimize(constant, BOX, 137, RngState(1))
    assert len(trace) == 137
    assert len(calls) == 137
    assert trace.population_size == 30


def test_trace_stays_inside_bounds():
    trace = crs2_minimize(sphere, BOX, 300, RngState(2))
    assert np.all(BOX.contains(trace.lam))
    np.testing.assert_allclose(trace.values, np.sum(trace.lam ** 2, axis=1))


def test_same_stream_same_trace():
    a = crs2_minimize(sphere, BOX, 200, RngState(3))
    b = crs2_minimize(sphere, BOX, 200, RngState(3))
    np.testing.assert_array_equal(a.lam, b.lam)


def test_budget_below_population_raises():
    with pytest.raises(ValueError):
        crs2_minimize(sphere, BOX, 10, RngState(4))


@pytest.mark.slow
def test_rosenbrock():
    box = Bounds.from_pairs([("x", -2.0, 2.0), ("y", -2.0, 2.0)])

    def rosenbrock(x):
        return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)

    trace = crs2_minimize(rosenbrock, box, 5_000, RngState(5))
    lam, value = trace.best
    assert value <= 1e-2
    np.testing.assert_allclose(lam, [1.0, 1.0], atol=0.2)
