"""Global-best particle swarm baseline over the full weight matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ActivationSpec, ResponseSet, WeightMatrix, _as_matrix, activate
from .datagen import make_rng

# velocity limit, half the width of the [-1, 1] search box
VELOCITY_LIMIT = 1.0
# iterations over which gbest improvement is measured for early stopping
STALL_WINDOW = 20


@dataclass(frozen=True)
class PsoConfig:
    population_size: int = 20
    max_iters: int = 500
    accel1: float = 2.0
    accel2: float = 2.0
    inertia_start: float = 0.9
    inertia_end: float = 0.4
    min_error_grad: float = 1e-20
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.inertia_start < self.inertia_end:
            raise ValueError("inertia_start must be >= inertia_end")


def _batch_fitness(ws: np.ndarray, rs: ResponseSet, spec: ActivationSpec) -> np.ndarray:
    """Free-run squared error for a stack of candidate matrices, shape (p, n, n)."""
    p = ws.shape[0]
    state = np.broadcast_to(rs.initials, (p,) + rs.initials.shape)
    total = np.zeros(p)
    for t in range(rs.k):
        state = activate(np.matmul(state, ws), spec)
        total += np.sum((state - rs.sequences[None, :, t, :]) ** 2, axis=(1, 2))
    return total / (rs.m * rs.n * rs.k)


def fitness(w, rs: ResponseSet, spec: ActivationSpec) -> float:
    """Mean squared free-run error of ``w`` over every sequence in ``rs``."""
    w = _as_matrix(w)
    if w.shape != (rs.n, rs.n):
        raise ValueError(f"weight matrix of shape {w.shape} does not match n={rs.n}")
    return float(_batch_fitness(w[None], rs, spec)[0])


def pso_learn(rs: ResponseSet, spec: ActivationSpec, cfg: PsoConfig = PsoConfig(),
              history: list | None = None) -> WeightMatrix:
    """Minimize :func:`fitness` with a global-best swarm; returns gbest.

    If ``history`` is given, the gbest fitness after initialisation and after
    every iteration is appended to it.
    """
    n = rs.n
    dim = n * n
    P = cfg.population_size
    rng = make_rng(cfg.seed)
    x = rng.uniform(-1.0, 1.0, size=(P, dim))
    v = rng.uniform(-VELOCITY_LIMIT, VELOCITY_LIMIT, size=(P, dim))
    fx = _batch_fitness(x.reshape(P, n, n), rs, spec)
    pbest, pbest_f = x.copy(), fx.copy()
    g = int(np.argmin(pbest_f))
    gbest, gbest_f = pbest[g].copy(), float(pbest_f[g])
    trail = [gbest_f]
    if history is not None:
        history.append(gbest_f)

    for it in range(cfg.max_iters):
        frac = it / (cfg.max_iters - 1) if cfg.max_iters > 1 else 1.0
        inertia = cfg.inertia_start - (cfg.inertia_start - cfg.inertia_end) * frac
        r1 = rng.random((P, dim))
        r2 = rng.random((P, dim))
        v = inertia * v + cfg.accel1 * r1 * (pbest - x) + cfg.accel2 * r2 * (gbest - x)
        np.clip(v, -VELOCITY_LIMIT, VELOCITY_LIMIT, out=v)
        x = np.clip(x + v, -1.0, 1.0)
        fx = _batch_fitness(x.reshape(P, n, n), rs, spec)
        better = fx < pbest_f
        pbest[better] = x[better]
        pbest_f[better] = fx[better]
        # first index wins ties
        g = int(np.argmin(pbest_f))
        if pbest_f[g] < gbest_f:
            gbest, gbest_f = pbest[g].copy(), float(pbest_f[g])
        trail.append(gbest_f)
        if history is not None:
            history.append(gbest_f)
        if len(trail) > STALL_WINDOW and trail[-STALL_WINDOW - 1] - gbest_f < cfg.min_error_grad:
            break
    return WeightMatrix(gbest.reshape(n, n))
