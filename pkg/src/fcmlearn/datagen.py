"""Synthetic FCMs, initial states, response sets and Gaussian noise.

All randomness comes from numpy's PCG64 bit generator seeded through
``np.random.SeedSequence``; per-sequence streams are derived with
``SeedSequence.spawn`` so results are reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ActivationSpec, Family, ResponseSet, WeightMatrix, simulate


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


@dataclass(frozen=True)
class RandomFcmSpec:
    n: int
    density: float
    activation: ActivationSpec
    seed: int
    prune_threshold: float = 0.05

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.density <= 1.0:
            raise ValueError(f"density must lie in (0, 1], got {self.density}")
        if self.prune_threshold < 0:
            raise ValueError("prune_threshold must be >= 0")


@dataclass(frozen=True)
class NoiseSpec:
    mu: float = 0.0
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


# Table of the benchmark maps: name -> (n, lambda sigmoid, lambda tanh, density, m, k)
MAP_CONFIGS = {
    "C20": (20, 5.0, 1.0, 0.20, 5, 100),
    "C40": (40, 5.0, 1.0, 0.40, 10, 40),
    "C100": (100, 0.7, 0.8, 0.30, 5, 20),
    "C200": (200, 0.2, 0.4, 0.30, 10, 10),
}


def map_config(name: str, family) -> dict:
    """Node count, activation, density, m and k of a named benchmark map."""
    n, lam_sig, lam_tanh, density, m, k = MAP_CONFIGS[name]
    family = Family(family)
    lam = lam_sig if family is Family.SIGMOID else lam_tanh
    return {"n": n, "activation": ActivationSpec(family, lam), "density": density, "m": m, "k": k}


def generate_fcm(spec: RandomFcmSpec) -> WeightMatrix:
    """Random sparse map: floor(density * n^2) positions drawn without replacement.

    The diagonal is eligible. Drawn values below ``prune_threshold`` in
    magnitude are zeroed, so the final nonzero count can fall short.
    """
    rng = make_rng(spec.seed)
    n = spec.n
    count = int(np.floor(spec.density * n * n))
    w = np.zeros(n * n)
    pos = rng.choice(n * n, size=count, replace=False)
    vals = rng.uniform(-1.0, 1.0, size=count)
    vals[np.abs(vals) < spec.prune_threshold] = 0.0
    w[pos] = vals
    return WeightMatrix(w.reshape(n, n))


def generate_initials(m: int, n: int, family, seed) -> np.ndarray:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    lo, hi = Family(family).bounds
    return make_rng(seed).uniform(lo, hi, size=(m, n))


def generate_responses(fcm: WeightMatrix, spec: ActivationSpec, initials, k: int) -> ResponseSet:
    initials = np.atleast_2d(np.asarray(initials, dtype=float))
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if initials.shape[1] != fcm.n:
        raise ValueError(f"initial states of length {initials.shape[1]} do not match n={fcm.n}")
    return ResponseSet(initials, simulate(initials, fcm, spec, k))


def add_noise(rs: ResponseSet, noise: NoiseSpec) -> ResponseSet:
    """Add i.i.d. N(mu, sigma) to every observed entry; no clamping.

    Each sequence draws from its own spawned stream, so a sequence's noise
    does not depend on how many other sequences the set holds.
    """
    children = np.random.SeedSequence(noise.seed).spawn(rs.m)
    noisy = np.empty_like(rs.sequences)
    for s, child in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(child))
        noisy[s] = rs.sequences[s] + rng.normal(noise.mu, noise.sigma, size=rs.sequences[s].shape)
    return ResponseSet(rs.initials, noisy)
