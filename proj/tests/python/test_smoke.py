import math

import numpy as np
import pytest

import xfermse


def test_ridge_fixture():
    sol = xfermse.ridge_fit(np.array([[0.0], [1.0]]), np.array([[0.0], [1.0]]), 1.0)
    assert sol.a[0, 0] == pytest.approx(0.2, abs=1e-15)
    assert sol.b[0] == pytest.approx(0.4, abs=1e-15)
    assert sol.objective == pytest.approx(0.2, abs=1e-15)
    assert sol.predict(np.array([2.0])).shape == (1, 1)


def test_scores_agree_with_numpy_lstsq():
    rng = np.random.default_rng(0)
    f = rng.normal(size=(200, 6))
    y = rng.normal(size=(200, 2))
    aug = np.hstack([f, np.ones((200, 1))])
    coef, *_ = np.linalg.lstsq(aug, y, rcond=None)
    mse = np.mean(np.sum((y - aug @ coef) ** 2, axis=1))
    assert xfermse.lin_mse(f, y, 0.0).value == pytest.approx(-mse, rel=1e-10)
    s = xfermse.estimate("labmse", f[:, :2], y, 1.0)
    assert s.method == "LabMSE" and s.value <= 0.0


def test_bounds():
    delta = 4 * math.exp(-2)
    c = xfermse.complexity_term(1, 1, 1, 1, 1, delta)
    assert c == pytest.approx(16 * (math.sqrt(2) + 2), abs=1e-9)
    assert xfermse.label_bound(-0.2, 1, 1, 1, 1, 1, delta, 10000) == pytest.approx(-0.746274, abs=1e-6)
    assert xfermse.shared_label_bound(0.0, 1.0, 0.0, 1, 1, 1, 1, 1, delta, 10000) == pytest.approx(-c / 100)
    with pytest.raises(ValueError):
        xfermse.complexity_term(1, 1, 1, 1, 1, 4.0)


def test_metrics():
    x = np.array([1.0, 2.0, 3.0])
    y = np.array([1.0, 3.0, 2.0])
    assert xfermse.correlate(x, y, "pearson").value == pytest.approx(0.5)
    assert xfermse.correlate(x, y, "kendall").value == pytest.approx(1 / 3)
    with pytest.raises(xfermse.DegenerateError):
        xfermse.correlate(x, np.ones(3))
    r = xfermse.top_k_matching_rate(
        np.array([[10, 0], [0, 0], [0, 5.0]]), np.array([[3, 1], [2, 3], [1, 2.0]]), 1
    )
    assert r.rate == 0.5 and r.selected == [0, 2]


def test_dimension_errors_map_to_value_error():
    with pytest.raises(xfermse.DimensionError):
        xfermse.lin_mse(np.zeros((3, 2)), np.zeros((4, 1)))


def test_small_benchmark_and_io(tmp_path):
    spec = xfermse.TaskSpec()
    spec.n_train, spec.n_test, spec.feature_dim = 200, 100, 16
    res = xfermse.run_benchmark(spec, 2, 2, [0.0, 1.0])
    assert len(res["pairs"]) == 4
    assert res == xfermse.run_benchmark(spec, 2, 2, [0.0, 1.0])

    m = np.random.default_rng(1).normal(size=(7, 3))
    for name in ("m.csv", "m.xmat"):
        xfermse.write_matrix(tmp_path / name, m)
        assert np.array_equal(xfermse.read_matrix(tmp_path / name), m)
