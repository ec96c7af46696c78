import math

import numpy as np
import pytest

from fcmlearn.core import ActivationSpec, ResponseSet, WeightMatrix, simulate
from fcmlearn.datagen import RandomFcmSpec, generate_fcm, generate_initials, generate_responses
from fcmlearn.metrics import (
    ConfusionCounts,
    MetricsReport,
    aggregate,
    confusion,
    data_error,
    model_error,
    out_of_sample_error,
    ss_mean,
)

SIG = ActivationSpec("sigmoid", 5.0)


def _map_and_data(seed=0, n=6):
    w = generate_fcm(RandomFcmSpec(n, 0.4, SIG, seed))
    rs = generate_responses(w, SIG, generate_initials(3, n, "sigmoid", seed + 1), 12)
    return w, rs


def test_data_error_zero_for_generator():
    w, rs = _map_and_data()
    assert data_error(rs, w, SIG) == 0.0


def test_data_error_constant_offset():
    delta = 0.03
    x0 = np.random.default_rng(0).uniform(0, 1, (2, 4))
    rs = ResponseSet(x0, np.full((2, 7, 4), 0.5 + delta))
    assert data_error(rs, np.zeros((4, 4)), SIG) == pytest.approx(delta**2, rel=1e-12)


def test_data_error_dimension_mismatch():
    _, rs = _map_and_data()
    with pytest.raises(ValueError):
        data_error(rs, np.zeros((3, 3)), SIG)


def test_out_of_sample_examples():
    w, _ = _map_and_data()
    fresh = generate_initials(4, w.n, "sigmoid", 99)
    assert out_of_sample_error(w, w, SIG, fresh, 10) == 0.0
    # zero map: sigmoid runs sit at 0.5, tanh runs at 0, so every difference is 0.5
    z = np.zeros((w.n, w.n))
    got = out_of_sample_error(z, z, SIG, fresh, 10, learned_spec=ActivationSpec("tanh", 1.0))
    assert got == pytest.approx(0.5, abs=1e-15)


def test_out_of_sample_matches_brute_force():
    w, _ = _map_and_data(3)
    other = WeightMatrix(np.clip(w.weights + 0.2, -1, 1))
    fresh = generate_initials(2, w.n, "sigmoid", 5)
    a = simulate(fresh, w, SIG, 6)
    b = simulate(fresh, other, SIG, 6)
    total = 0.0
    for s in range(2):
        for t in range(6):
            for i in range(w.n):
                total += abs(a[s, t, i] - b[s, t, i])
    assert out_of_sample_error(w, other, SIG, fresh, 6) == pytest.approx(total / (2 * 6 * w.n), rel=1e-12)


def test_model_error_examples():
    w, _ = _map_and_data()
    assert model_error(w, w) == 0.0
    assert model_error(np.ones((5, 5)), np.zeros((5, 5))) == 1.0
    b = np.random.default_rng(1).uniform(-1, 1, (6, 6))
    assert model_error(w, b) == model_error(b, w)
    with pytest.raises(ValueError):
        model_error(np.zeros((2, 2)), np.zeros((3, 3)))


def test_ss_mean_worked_example():
    c = ConfusionCounts(tp=3, tn=4, fp=2, fn=1)
    assert c.sensitivity == pytest.approx(0.75)
    assert c.specificity == pytest.approx(2 / 3)
    assert c.ss_mean == pytest.approx(2 * 0.75 * (2 / 3) / (0.75 + 2 / 3), rel=1e-15)
    assert c.ss_mean == pytest.approx(0.70588, abs=1e-5)


def test_confusion_uses_zero_as_positive_class():
    target = np.array([[0.0, 0.5], [0.0, -0.7]])
    learned = np.array([[0.0, 0.0], [0.3, -0.6]])
    c = confusion(target, learned)
    # (0,0): zero/zero -> TP; (0,1): link/none -> FP; (1,0): zero/link -> FN; (1,1): link/link -> TN
    assert (c.tp, c.tn, c.fp, c.fn) == (1, 1, 1, 1)
    assert c.total == 4


def test_ss_mean_perfect_and_degenerate():
    w, _ = _map_and_data()
    assert ss_mean(w, w) == 1.0
    # all-link target and learned map: no zero weights, sensitivity 0/0 -> 0
    full = np.full((3, 3), 0.5)
    assert ss_mean(full, full) == 0.0


def test_threshold_boundary_is_no_link():
    target = np.array([[0.05, 0.0], [0.0, 0.2]])
    learned = np.array([[0.0, 0.0], [0.0, 0.2]])
    assert ss_mean(target, learned) == 1.0


def test_ss_mean_in_unit_interval():
    rng = np.random.default_rng(4)
    for _ in range(50):
        a = rng.uniform(-1, 1, (5, 5)) * (rng.random((5, 5)) < 0.4)
        b = rng.uniform(-1, 1, (5, 5)) * (rng.random((5, 5)) < 0.4)
        assert 0.0 <= ss_mean(a, b) <= 1.0


def test_aggregate_examples():
    one = aggregate([MetricsReport(0.1, 0.2, 0.3, 0.4, 1.0)])
    assert one.mean["data_error"] == 0.1 and one.std["data_error"] == 0.0
    two = aggregate([MetricsReport(1.0, 1.0), MetricsReport(3.0, 3.0)])
    assert two.mean["data_error"] == 2.0
    assert two.std["data_error"] == pytest.approx(math.sqrt(2.0))
    assert two.mean["model_error"] is None
    same = aggregate([MetricsReport(0.5, 0.5, 0.1, 0.9)] * 4)
    assert same.std["ss_mean"] == 0.0


def test_aggregate_errors():
    with pytest.raises(ValueError):
        aggregate([])
    with pytest.raises(ValueError):
        aggregate([MetricsReport(1.0, 1.0, 0.1), MetricsReport(1.0, 1.0, None)])


def test_aggregate_json_round_trip():
    agg = aggregate([MetricsReport(0.1, 0.2, None, None, 1.0), MetricsReport(0.3, 0.4, None, None, 2.0)])
    body = agg.to_json()
    assert body["modelErrorMean"] is None and "executionSecondsMean" in body
    assert "executionSecondsMean" not in agg.to_json(include_timing=False)
    back = type(agg).from_json(body)
    assert back.mean == agg.mean and back.std == agg.std
