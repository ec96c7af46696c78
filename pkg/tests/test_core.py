import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcmlearn.core import ActivationSpec, ResponseSet, WeightMatrix, activate, activate_inverse, simulate, step

SIG5 = ActivationSpec("sigmoid", 5.0)
SIG1 = ActivationSpec("sigmoid", 1.0)
TANH1 = ActivationSpec("tanh", 1.0)


def test_activation_spec_rejects_nonpositive_lambda():
    with pytest.raises(ValueError):
        ActivationSpec("sigmoid", 0.0)
    with pytest.raises(ValueError):
        ActivationSpec("tanh", -1.0)


@pytest.mark.parametrize(
    "x, spec, expected",
    [
        (0.0, SIG5, 0.5),
        (0.0, TANH1, 0.0),
        (math.log(3.0), SIG1, 0.75),
    ],
)
def test_activate_examples(x, spec, expected):
    assert activate(x, spec) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "y, spec, expected",
    [
        (0.5, SIG5, 0.0),
        (0.0, TANH1, 0.0),
        (0.75, SIG1, math.log(3.0)),
    ],
)
def test_activate_inverse_examples(y, spec, expected):
    assert activate_inverse(y, spec, 1e-6) == pytest.approx(expected, abs=1e-12)


def test_inverse_clamps_out_of_range_observations():
    eps = 1e-6
    assert activate_inverse(1.3, SIG1, eps) == pytest.approx(activate_inverse(1 - eps, SIG1, eps))
    assert activate_inverse(-0.2, SIG1, eps) == pytest.approx(activate_inverse(eps, SIG1, eps))
    assert activate_inverse(-4.0, TANH1, eps) == pytest.approx(activate_inverse(-1 + eps, TANH1, eps))
    assert np.isfinite(activate_inverse(np.array([0.0, 1.0]), SIG5, eps)).all()


def test_inverse_rejects_bad_clamp():
    with pytest.raises(ValueError):
        activate_inverse(0.5, SIG1, 0.5)


@pytest.mark.parametrize("spec", [SIG5, SIG1, TANH1, ActivationSpec("tanh", 3.0)])
def test_activation_monotone_on_grid(spec):
    y = activate(np.linspace(-5, 5, 2001), spec)
    assert np.all(np.diff(y) >= 0)


@settings(max_examples=200, deadline=None)
@given(
    u=st.floats(min_value=0.0, max_value=1.0),
    lam=st.floats(min_value=0.1, max_value=6.0),
    family=st.sampled_from(["sigmoid", "tanh"]),
)
def test_round_trip_inside_clamped_domain(u, lam, family):
    eps = 1e-6
    spec = ActivationSpec(family, lam)
    lo, hi = spec.family.bounds
    y = (lo + eps) + u * (hi - lo - 2 * eps)
    assert abs(activate(activate_inverse(y, spec, eps), spec) - y) < 1e-12


def test_step_examples():
    rng = np.random.default_rng(0)
    state = rng.uniform(0, 1, 4)
    np.testing.assert_array_equal(step(state, np.zeros((4, 4)), SIG5), np.full(4, 0.5))
    np.testing.assert_array_equal(step(state, np.zeros((4, 4)), TANH1), np.zeros(4))
    out = step([1.0, 0.0], WeightMatrix([[0.0, 1.0], [0.0, 0.0]]), SIG1)
    np.testing.assert_allclose(out, [0.5, 1.0 / (1.0 + math.exp(-1.0))], rtol=1e-15)
    assert out[1] == pytest.approx(0.73106, abs=1e-5)


def test_step_dimension_mismatch():
    with pytest.raises(ValueError):
        step(np.zeros(3), np.zeros((2, 2)), SIG1)


def test_simulate_zero_matrix_and_definition():
    x0 = np.array([0.1, 0.9, 0.3])
    out = simulate(x0, np.zeros((3, 3)), SIG5, 3)
    np.testing.assert_array_equal(out, np.full((3, 3), 0.5))
    w = np.random.default_rng(1).uniform(-1, 1, (3, 3))
    np.testing.assert_array_equal(simulate(x0, w, SIG1, 1)[0], step(x0, w, SIG1))
    np.testing.assert_array_equal(simulate(x0, w, SIG1, 5), simulate(x0, w, SIG1, 5))
    with pytest.raises(ValueError):
        simulate(x0, w, SIG1, 0)


def test_simulate_rows_follow_step():
    rng = np.random.default_rng(2)
    w = rng.uniform(-1, 1, (4, 4))
    x0 = rng.uniform(-1, 1, 4)
    out = simulate(x0, w, TANH1, 6)
    prev = x0
    for t in range(6):
        np.testing.assert_array_equal(out[t], step(prev, w, TANH1))
        prev = out[t]


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), family=st.sampled_from(["sigmoid", "tanh"]))
def test_simulator_output_in_open_range(seed, family):
    rng = np.random.default_rng(seed)
    spec = ActivationSpec(family, 1.0)
    lo, hi = spec.family.bounds
    w = rng.uniform(-1, 1, (5, 5))
    out = simulate(rng.uniform(lo, hi, (3, 5)), w, spec, 10)
    assert np.all(out > lo) and np.all(out < hi)


def test_weight_matrix_validation_and_json_round_trip(tmp_path):
    with pytest.raises(ValueError):
        WeightMatrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        WeightMatrix([[1.5]])
    w = WeightMatrix(np.random.default_rng(3).uniform(-1, 1, (4, 4)))
    assert w.to_json()["n"] == 4
    w.save(tmp_path / "w.json")
    assert WeightMatrix.load(tmp_path / "w.json") == w
    with pytest.raises(ValueError):
        WeightMatrix.from_json({"n": 3, "weights": [[0.0]]})


def test_weight_matrix_is_immutable():
    w = WeightMatrix(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        w.weights[0, 0] = 1.0


def test_response_set_invariants():
    with pytest.raises(ValueError):
        ResponseSet(np.zeros((1, 2)), np.zeros((1, 1, 2)))  # k < 2
    with pytest.raises(ValueError):
        ResponseSet(np.zeros((2, 3)), np.zeros((2, 4, 2)))
    rs = ResponseSet(np.zeros((2, 3)), np.zeros((2, 4, 3)))
    assert (rs.m, rs.k, rs.n) == (2, 4, 3)
    assert rs.subset([1]).m == 1
