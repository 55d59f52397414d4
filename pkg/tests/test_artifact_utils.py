import json

import numpy as np
import pytest

from optimizer.pareto import ParetoFront
from utils.artifact_utils import frontier_frame, read_frontier, write_csv, write_json


def test_frontier_written_and_read_back(tmp_path):
    front = ParetoFront(np.array([[1.0, 0.1], [2.0, 1.0 / 3.0]]), np.array([-3.0, -1.0]), np.array([2.0, 0.5]), ("a", "b"))
    path = write_csv(frontier_frame(front), str(tmp_path / "nested" / "frontier.csv"))
    table = read_frontier(path)
    assert table.names == ("a", "b")
    np.testing.assert_array_equal(table.lam, front.lam)
    np.testing.assert_array_equal(table.log_d, front.log_d)
    with open(path) as f:
        assert f.readline().strip() == "a,b,log_D,N"


def test_malformed_frontiers(tmp_path):
    missing = tmp_path / "missing.csv"
    missing.write_text("a,log_D\n1,2\n")
    with pytest.raises(ValueError, match="missing"):
        read_frontier(str(missing))
    text = tmp_path / "text.csv"
    text.write_text("a,log_D,N\nx,1,2\n")
    with pytest.raises(ValueError):
        read_frontier(str(text))
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError):
        read_frontier(str(empty))
    no_rows = tmp_path / "no_rows.csv"
    no_rows.write_text("a,log_D,N\n")
    with pytest.raises(ValueError):
        read_frontier(str(no_rows))


def test_json_converts_numpy_and_nan(tmp_path):
    path = write_json({"b": np.float64(np.nan), "a": np.arange(3), "c": {1: np.int64(4)}}, str(tmp_path / "run.json"))
    with open(path) as f:
        text = f.read()
    assert json.loads(text) == {"a": [0, 1, 2], "b": None, "c": {"1": 4}}
    assert text.index('"a"') < text.index('"b"')
