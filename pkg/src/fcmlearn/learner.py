"""Per-node convex learning of FCM weights.

Each column ``w_i`` of the weight matrix is the solution of

    minimize    ||X w - Y_i||_2 + beta * ||w||_1 - alpha * Htilde(w)
    subject to  ||w||_inf <= 1

where ``X`` stacks the observed states and ``Y_i`` holds the inverse
activation of node ``i``'s next-step observations. ``Htilde(w) = -sum p ln p``
with ``p = (w + 1) / 2``.

The solver is a primal log-barrier interior-point method on the epigraph
form of the problem (second-order cone for the residual norm, ``|w| <= u``
for the L1 term), with damped Newton centering steps. Columns are solved
in a batch that shares the design matrix; every column keeps its own
iterate, step size and stopping state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_CLAMP_EPS, ActivationSpec, ResponseSet, WeightMatrix, activate_inverse

log = logging.getLogger(__name__)


class NumericalError(RuntimeError):
    """Non-finite values met while assembling or solving a node system."""


@dataclass(frozen=True)
class LearnConfig:
    alpha: float
    beta: float
    activation: ActivationSpec
    clamp_eps: float = DEFAULT_CLAMP_EPS
    entropy_floor: float = 1e-12
    smooth_mu: float = 1e-8
    max_iters: int = 10000
    grad_tol: float = 1e-6
    obj_tol: float = 1e-9

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError(f"alpha and beta must be >= 0, got {self.alpha}, {self.beta}")
        for name in ("clamp_eps", "entropy_floor", "smooth_mu", "grad_tol", "obj_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def replace(self, **changes) -> "LearnConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class NodeSystem:
    X: np.ndarray  # (M, n)
    Y: np.ndarray  # (M,)
    node: int = 0


def design_matrix(rs: ResponseSet) -> np.ndarray:
    """Rows 1..k-1 of every response matrix, stacked in sequence order."""
    return rs.sequences[:, :-1, :].reshape(-1, rs.n)


def targets(rs: ResponseSet, cfg: LearnConfig) -> np.ndarray:
    """Inverse activation of rows 2..k of every response matrix, shape (M, n)."""
    y = activate_inverse(rs.sequences[:, 1:, :], cfg.activation, cfg.clamp_eps)
    return np.asarray(y).reshape(-1, rs.n)


def assemble_system(rs: ResponseSet, i: int, cfg: LearnConfig) -> NodeSystem:
    if rs.m < 1 or rs.k < 2:
        raise ValueError("response set needs at least one sequence of length >= 2")
    if not 0 <= i < rs.n:
        raise IndexError(f"node index {i} out of range for n={rs.n}")
    X = design_matrix(rs)
    Y = np.asarray(activate_inverse(rs.sequences[:, 1:, i], cfg.activation, cfg.clamp_eps)).ravel()
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise NumericalError(f"non-finite entries in the system for node {i}")
    return NodeSystem(X, Y, i)


def _check(w, sys: NodeSystem) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (sys.X.shape[1],):
        raise ValueError(f"w of shape {w.shape} does not match n={sys.X.shape[1]}")
    if np.max(np.abs(w), initial=0.0) > 1.0 + 1e-12:
        raise ValueError("w lies outside the box |w| <= 1")
    return w


def entropy_surrogate(w, floor: float = 1e-12) -> float:
    """``-sum p ln p`` with ``p = (w + 1) / 2``; a zero ``p`` contributes 0."""
    p = (np.asarray(w, dtype=float) + 1.0) / 2.0
    return float(-np.sum(np.where(p > 0, p * np.log(np.maximum(p, floor)), 0.0)))


def objective(w, sys: NodeSystem, cfg: LearnConfig) -> float:
    w = _check(w, sys)
    r = sys.X @ w - sys.Y
    return float(
        np.linalg.norm(r) + cfg.beta * np.sum(np.abs(w)) - cfg.alpha * entropy_surrogate(w, cfg.entropy_floor)
    )


def smoothed_objective(w, sys: NodeSystem, cfg: LearnConfig) -> float:
    """The objective with both norms smoothed by ``smooth_mu``."""
    w = _check(w, sys)
    mu2 = cfg.smooth_mu**2
    r = sys.X @ w - sys.Y
    return float(
        np.sqrt(r @ r + mu2)
        + cfg.beta * np.sum(np.sqrt(w * w + mu2))
        - cfg.alpha * entropy_surrogate(w, cfg.entropy_floor)
    )


def objective_gradient(w, sys: NodeSystem, cfg: LearnConfig) -> np.ndarray:
    """Gradient of :func:`smoothed_objective`."""
    w = _check(w, sys)
    mu2 = cfg.smooth_mu**2
    r = sys.X @ w - sys.Y
    g = sys.X.T @ r / np.sqrt(r @ r + mu2)
    g += cfg.beta * w / np.sqrt(w * w + mu2)
    p = np.maximum((w + 1.0) / 2.0, cfg.entropy_floor)
    g += cfg.alpha * 0.5 * (np.log(p) + 1.0)
    return g


# ---------------------------------------------------------------------------
# interior-point solver


@dataclass
class SolveTrace:
    """Per-column record of accepted barrier-objective values, one list per centering stage."""

    stages: list = field(default_factory=list)
    iterations: int = 0


def _reduce(X: np.ndarray, Y: np.ndarray):
    """Compress a tall least-squares system to n rows plus a constant residual.

    ``||X w - y||^2 = ||R w - Q^T y||^2 + ||y - Q Q^T y||^2`` for ``X = Q R``.
    Residuals are then evaluated without cancellation against ``||y||^2``.
    """
    M, n = X.shape
    if M <= n:
        return X, Y, np.zeros(Y.shape[1])
    Q, R = np.linalg.qr(X)
    QtY = Q.T @ Y
    perp = Y - Q @ QtY
    return R, QtY, np.einsum("mc,mc->c", perp, perp)


def minimize_columns(X, Y, cfg: LearnConfig, trace: list[SolveTrace] | None = None) -> np.ndarray:
    """Solve the box-constrained problem for every column of ``Y`` (shape (M, c)).

    Returns the (n, c) matrix of minimizers.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.ndim != 2 or Y.shape[0] != X.shape[0]:
        raise ValueError(f"incompatible system shapes {X.shape} and {Y.shape}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise NumericalError("non-finite entries in the system")
    n = X.shape[1]
    c = Y.shape[1]
    A, B, rho2 = _reduce(X, Y)
    G = A.T @ A
    alpha, beta = cfg.alpha, cfg.beta
    # a smaller beta is below any objective tolerance and would let u run off to overflow
    use_u = beta > 1e-12

    # barrier parameter: 2 for the cone, 2 per box side pair, 2 per |w| <= u pair
    theta = 2.0 + 2.0 * n + (2.0 * n if use_u else 0.0)

    def resid(w, cols):  # w: (n, len(cols)) -> r: (rows, len(cols)), ||r||^2
        r = A @ w - B[:, cols]
        return r, np.einsum("rc,rc->c", r, r) + rho2[cols]

    def f0(w, u, t):
        p = (w + 1.0) / 2.0
        val = t + alpha * np.sum(p * np.log(p), axis=0)
        if use_u:
            val = val + beta * np.sum(u, axis=0)
        return val

    def barrier(w, u, t, cols):
        _, q = resid(w, cols)
        s = t * t - q
        val = -np.log(s) - np.sum(np.log1p(-w) + np.log1p(w), axis=0)
        if use_u:
            val = val - np.sum(np.log(u - w) + np.log(u + w), axis=0)
        return val

    def feasible(w, u, t, cols):
        _, q = resid(w, cols)
        ok = (t > 0) & (t * t - q > 0) & np.all(np.abs(w) < 1.0, axis=0)
        if use_u:
            ok &= np.all(u - np.abs(w) > 0, axis=0)
        return ok

    w = np.zeros((n, c))
    u = np.ones((n, c))
    allc = np.arange(c)
    _, q0 = resid(w, allc)
    t = np.sqrt(q0) + 1.0
    tau = np.maximum(1.0, theta / np.maximum(1.0, t))
    done = np.zeros(c, dtype=bool)
    stage_active = np.ones(c, dtype=bool)
    phi = tau * f0(w, u, t) + barrier(w, u, t, allc)
    if trace is not None:
        new = [SolveTrace(stages=[[float(phi[j])]]) for j in range(c)]
        trace.extend(new)
        trace = new
    iters = 0
    while iters < cfg.max_iters and np.any(~done):
        act = np.flatnonzero(stage_active)
        if act.size == 0:
            # every remaining column is centered: tighten the barrier or finish
            gap = theta / tau
            scale = np.maximum(1.0, np.abs(f0(w, u, t)))
            finished = gap <= cfg.obj_tol * scale
            done |= finished
            grow = ~done
            tau[grow] *= 20.0
            stage_active = grow.copy()
            phi = tau * f0(w, u, t) + barrier(w, u, t, allc)
            if trace is not None:
                for j in np.flatnonzero(grow):
                    trace[j].stages.append([float(phi[j])])
            continue
        iters += 1
        wa, ua, ta, tua = w[:, act], u[:, act], t[act], tau[act]
        r, q = resid(wa, act)
        s = ta * ta - q
        Atr = A.T @ r  # (n, a)
        p = (wa + 1.0) / 2.0

        # gradient of tau*f0 + barrier
        gw = tua * alpha * 0.5 * (np.log(p) + 1.0) + 2.0 * Atr / s + 1.0 / (1.0 - wa) - 1.0 / (1.0 + wa)
        gt = tua - 2.0 * ta / s
        hdiag = tua * alpha / (4.0 * p) + 1.0 / (1.0 - wa) ** 2 + 1.0 / (1.0 + wa) ** 2
        if use_u:
            a_ = ua - wa
            b_ = ua + wa
            gw += 1.0 / a_ - 1.0 / b_
            gu = tua * beta - 1.0 / a_ - 1.0 / b_
            d1 = 1.0 / a_**2 + 1.0 / b_**2
            d2 = 1.0 / b_**2 - 1.0 / a_**2
            hdiag += d1 - d2 * d2 / d1
            gw_eff = gw - (d2 / d1) * gu
        else:
            gw_eff = gw

        # Hessian blocks, one (n+1)x(n+1) system per active column
        v = 2.0 * Atr / s  # gradient of -ln s w.r.t. w
        H = np.empty((act.size, n + 1, n + 1))
        H[:, :n, :n] = 2.0 * G[None] / s[:, None, None] + np.einsum("ia,ja->aij", v, v)
        H[:, :n, :n][:, np.arange(n), np.arange(n)] += hdiag.T
        htw = -v * (2.0 * ta / s)
        H[:, :n, n] = htw.T
        H[:, n, :n] = htw.T
        H[:, n, n] = (2.0 * ta * ta + 2.0 * q) / (s * s)
        rhs = -np.concatenate([gw_eff, gt[None, :]], axis=0).T[..., None]
        try:
            sol = np.linalg.solve(H, rhs)[..., 0].T
        except np.linalg.LinAlgError:
            sol = np.stack([np.linalg.lstsq(H[j], rhs[j, :, 0], rcond=None)[0] for j in range(act.size)], axis=1)
        dw, dt = sol[:n], sol[n]
        du = -(gu + d2 * dw) / d1 if use_u else np.zeros_like(dw)
        if not np.all(np.isfinite(sol)):
            raise NumericalError("non-finite Newton direction")

        slope = np.sum(gw * dw, axis=0) + gt * dt
        if use_u:
            slope = slope + np.sum(gu * du, axis=0)
        decrement = -slope
        centered = decrement / 2.0 <= cfg.grad_tol
        # backtracking line search on the barrier-augmented objective
        step = np.ones(act.size)
        phi_a = phi[act]
        accepted = centered.copy()
        new_w, new_u, new_t = wa.copy(), ua.copy(), ta.copy()
        new_phi = phi_a.copy()
        pending = ~centered
        for _ in range(60):
            if not np.any(pending):
                break
            idx = np.flatnonzero(pending)
            cw = wa[:, idx] + step[idx] * dw[:, idx]
            cu = ua[:, idx] + step[idx] * du[:, idx]
            ct = ta[idx] + step[idx] * dt[idx]
            cols = act[idx]
            ok = feasible(cw, cu, ct, cols)
            val = np.full(idx.size, np.inf)
            if np.any(ok):
                with np.errstate(invalid="ignore", divide="ignore"):
                    val[ok] = tua[idx][ok] * f0(cw[:, ok], cu[:, ok], ct[ok]) + barrier(cw[:, ok], cu[:, ok], ct[ok], cols[ok])
            good = ok & (val <= phi_a[idx] + 0.25 * step[idx] * slope[idx])
            gi = idx[good]
            new_w[:, gi], new_u[:, gi], new_t[gi], new_phi[gi] = cw[:, good], cu[:, good], ct[good], val[good]
            accepted[gi] = True
            pending[gi] = False
            step[idx[~good]] *= 0.5
        moved = accepted & ~centered
        # line search exhausted, or progress lost in rounding: treat as centered
        stalled = ~accepted | (moved & (phi_a - new_phi <= 1e-14 * (1.0 + np.abs(phi_a))))
        w[:, act], u[:, act], t[act], phi[act] = new_w, new_u, new_t, new_phi
        if trace is not None:
            for local in np.flatnonzero(moved):
                trace[act[local]].stages[-1].append(float(new_phi[local]))
                trace[act[local]].iterations += 1
        stage_active[act[centered | stalled]] = False

    if not np.all(np.isfinite(w)):
        raise NumericalError("non-finite solution")
    if iters >= cfg.max_iters and np.any(~done):
        log.warning("interior-point solver hit max_iters=%d before reaching tolerance", cfg.max_iters)
    return np.clip(w, -1.0, 1.0)


def _column_objectives(W, X, Y, cfg: LearnConfig) -> np.ndarray:
    R = X @ W - Y
    p = (W + 1.0) / 2.0
    plogp = np.where(p > 0, p * np.log(np.maximum(p, cfg.entropy_floor)), 0.0)
    return np.linalg.norm(R, axis=0) + cfg.beta * np.abs(W).sum(axis=0) + cfg.alpha * plogp.sum(axis=0)


def _keep_if_better(W, X, Y, cfg: LearnConfig) -> np.ndarray:
    """Fall back to the zero column wherever the solver failed to beat it."""
    worse = _column_objectives(W, X, Y, cfg) > _column_objectives(np.zeros_like(W), X, Y, cfg)
    if np.any(worse):
        log.debug("solver result worse than w=0 for %d column(s)", int(worse.sum()))
        W = W.copy()
        W[:, worse] = 0.0
    return W


def solve_column(sys: NodeSystem, cfg: LearnConfig, trace: list[SolveTrace] | None = None) -> np.ndarray:
    """Minimize the node objective over the box; returns the weight column."""
    return _keep_if_better(minimize_columns(sys.X, sys.Y, cfg, trace), sys.X, sys.Y[:, None], cfg)[:, 0]


def learn(rs: ResponseSet, cfg: LearnConfig) -> WeightMatrix:
    """Learn every column of the weight matrix from ``rs``."""
    X = design_matrix(rs)
    Y = targets(rs, cfg)
    return WeightMatrix(_keep_if_better(minimize_columns(X, Y, cfg), X, Y, cfg))
