import numpy as np
import pytest

from fcmlearn.baselines import PsoConfig, fitness, pso_learn
from fcmlearn.core import ActivationSpec, ResponseSet, WeightMatrix
from fcmlearn.datagen import RandomFcmSpec, generate_fcm, generate_initials, generate_responses

SIG = ActivationSpec("sigmoid", 5.0)


def _data(seed=0, n=5, m=2, k=10):
    w = generate_fcm(RandomFcmSpec(n, 0.4, SIG, seed))
    return w, generate_responses(w, SIG, generate_initials(m, n, "sigmoid", seed + 1), k)


def _loop_fitness(w, rs, spec):
    total = 0.0
    for s in range(rs.m):
        state = rs.initials[s].copy()
        for t in range(rs.k):
            nxt = np.empty(rs.n)
            for i in range(rs.n):
                x = sum(state[j] * w[j, i] for j in range(rs.n))
                nxt[i] = 1.0 / (1.0 + np.exp(-spec.lam * x))
            state = nxt
            total += np.sum((state - rs.sequences[s, t]) ** 2)
    return total / (rs.m * rs.k * rs.n)


def test_fitness_zero_at_generator():
    w, rs = _data()
    assert fitness(w, rs, SIG) == 0.0


def test_fitness_matches_loop_oracle():
    _, rs = _data(3)
    cand = np.random.default_rng(0).uniform(-1, 1, (5, 5))
    assert fitness(cand, rs, SIG) == pytest.approx(_loop_fitness(cand, rs, SIG), rel=1e-12)


def test_fitness_constant_offset():
    x0 = np.random.default_rng(1).uniform(0, 1, (1, 3))
    rs = ResponseSet(x0, np.full((1, 4, 3), 0.6))
    assert fitness(np.zeros((3, 3)), rs, SIG) == pytest.approx(0.01, rel=1e-12)


def test_pso_determinism_and_box():
    _, rs = _data()
    cfg = PsoConfig(population_size=10, max_iters=40, seed=3)
    a = pso_learn(rs, SIG, cfg)
    assert a == pso_learn(rs, SIG, cfg)
    assert np.all(np.abs(a.weights) <= 1.0)
    assert a != pso_learn(rs, SIG, PsoConfig(population_size=10, max_iters=40, seed=4))


def test_gbest_is_monotone_and_matches_result():
    _, rs = _data(2)
    hist: list[float] = []
    w = pso_learn(rs, SIG, PsoConfig(population_size=12, max_iters=60, seed=1), history=hist)
    assert len(hist) >= 2
    assert np.all(np.diff(hist) <= 0)
    assert fitness(w, rs, SIG) == pytest.approx(hist[-1], rel=1e-12)


def test_pso_improves_on_zero_map():
    _, rs = _data(4)
    w = pso_learn(rs, SIG, PsoConfig(population_size=20, max_iters=100, seed=0))
    assert fitness(w, rs, SIG) < fitness(WeightMatrix(np.zeros((5, 5))), rs, SIG)


def test_pso_config_validation():
    with pytest.raises(ValueError):
        PsoConfig(population_size=0)
    with pytest.raises(ValueError):
        PsoConfig(max_iters=0)
