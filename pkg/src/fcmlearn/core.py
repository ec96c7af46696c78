"""FCM domain types, activation functions and forward dynamics."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

DEFAULT_CLAMP_EPS = 1e-6


class Family(str, enum.Enum):
    SIGMOID = "sigmoid"
    TANH = "tanh"

    @property
    def bounds(self) -> tuple[float, float]:
        return (0.0, 1.0) if self is Family.SIGMOID else (-1.0, 1.0)


@dataclass(frozen=True)
class ActivationSpec:
    family: Family
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.lam > 0:
            raise ValueError(f"activation shape parameter must be > 0, got {self.lam}")

    def __call__(self, x):
        return activate(x, self)

    def inverse(self, y, clamp_eps: float = DEFAULT_CLAMP_EPS):
        return activate_inverse(y, self, clamp_eps)


def activate(x, spec: ActivationSpec):
    """Sigmoid ``1 / (1 + exp(-lam x))`` or ``tanh(lam x)``, elementwise."""
    z = spec.lam * np.asarray(x, dtype=float)
    if spec.family is Family.SIGMOID:
        out = expit(z)
    else:
        out = np.tanh(z)
    return out if out.ndim else float(out)


def activate_inverse(y, spec: ActivationSpec, clamp_eps: float = DEFAULT_CLAMP_EPS):
    """Inverse activation after clamping ``y`` into the open range.

    Noisy observations may fall outside the activation range; they are
    clamped to ``clamp_eps`` inside it before inversion so the result is
    always finite.
    """
    if not 0.0 < clamp_eps < 0.5:
        raise ValueError(f"clamp_eps must lie in (0, 0.5), got {clamp_eps}")
    y = np.asarray(y, dtype=float)
    lo, hi = spec.family.bounds
    y = np.clip(y, lo + clamp_eps, hi - clamp_eps)
    if spec.family is Family.SIGMOID:
        out = -np.log((1.0 - y) / y) / spec.lam
    else:
        out = np.log((1.0 + y) / (1.0 - y)) / (2.0 * spec.lam)
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Square matrix of edge weights; entry ``[j, i]`` is the edge C_j -> C_i.

    Column ``i`` holds every incoming weight of node ``i``.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ValueError(f"weight matrix must be square with n >= 1, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weight matrix contains non-finite entries")
        if np.max(np.abs(w)) > 1.0 + 1e-12:
            raise ValueError("weights must satisfy |w| <= 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other):
        if not isinstance(other, WeightMatrix):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def to_json(self) -> dict:
        return {"n": self.n, "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "WeightMatrix":
        w = np.asarray(obj["weights"], dtype=float)
        if w.shape != (obj["n"], obj["n"]):
            raise ValueError(f"declared n={obj['n']} does not match weights of shape {w.shape}")
        return cls(w)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "WeightMatrix":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class ResponseSet:
    """``m`` observed response matrices ``D_s`` (each k x n) and their initial states."""

    initials: np.ndarray  # (m, n)
    sequences: np.ndarray  # (m, k, n)

    def __post_init__(self):
        x0 = np.array(self.initials, dtype=float)
        d = np.array(self.sequences, dtype=float)
        if d.ndim != 3:
            raise ValueError(f"sequences must be a (m, k, n) array, got shape {d.shape}")
        m, k, n = d.shape
        if m < 1:
            raise ValueError("response set must hold at least one sequence")
        if k < 2:
            raise ValueError(f"sequence length k must be >= 2, got {k}")
        if x0.shape != (m, n):
            raise ValueError(f"initials shape {x0.shape} does not match (m, n) = {(m, n)}")
        x0.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "initials", x0)
        object.__setattr__(self, "sequences", d)

    @property
    def m(self) -> int:
        return self.sequences.shape[0]

    @property
    def k(self) -> int:
        return self.sequences.shape[1]

    @property
    def n(self) -> int:
        return self.sequences.shape[2]

    def subset(self, idx) -> "ResponseSet":
        idx = list(idx)
        return ResponseSet(self.initials[idx], self.sequences[idx])

    def __eq__(self, other):
        if not isinstance(other, ResponseSet):
            return NotImplemented
        return np.array_equal(self.initials, other.initials) and np.array_equal(
            self.sequences, other.sequences
        )


def _as_matrix(w) -> np.ndarray:
    return w.weights if isinstance(w, WeightMatrix) else np.asarray(w, dtype=float)


def step(state, w, spec: ActivationSpec) -> np.ndarray:
    """One synchronous update ``A(t+1) = f(A(t) W)``.

    ``state`` may also be a batch of row vectors of shape (b, n).
    """
    w = _as_matrix(w)
    state = np.asarray(state, dtype=float)
    if state.shape[-1] != w.shape[0]:
        raise ValueError(f"state of length {state.shape[-1]} does not match n={w.shape[0]}")
    return np.asarray(activate(state @ w, spec))


def simulate(initial, w, spec: ActivationSpec, k: int) -> np.ndarray:
    """Free-run ``k`` steps from ``initial``; row ``t`` is the state after ``t+1`` updates.

    A batch of initial states of shape (b, n) gives a (b, k, n) array.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    w = _as_matrix(w)
    state = np.asarray(initial, dtype=float)
    out = np.empty(state.shape[:-1] + (k, state.shape[-1]))
    for t in range(k):
        state = step(state, w, spec)
        out[..., t, :] = state
    return out
