"""Evaluation metrics for learned FCMs and mean/std aggregation across trials.

Link-recovery counts follow the convention where an absent link (zero
weight) is the *positive* class:

    TP  target zero,     learned zero
    TN  target nonzero,  learned nonzero
    FP  target nonzero,  learned zero
    FN  target zero,     learned nonzero

This is the reverse of the usual convention; sensitivity therefore measures
how well absent links are recovered and specificity how well present ones are.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .core import ActivationSpec, ResponseSet, WeightMatrix, _as_matrix, simulate

LINK_THRESHOLD = 0.05


def _same_n(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"weight matrices differ in shape: {a.shape} vs {b.shape}")


def data_error(target: ResponseSet, learned, spec: ActivationSpec) -> float:
    """Mean squared error of the learned map's free run against the observed sequences."""
    w = _as_matrix(learned)
    if w.shape[0] != target.n:
        raise ValueError(f"learned map has n={w.shape[0]}, data has n={target.n}")
    sim = simulate(target.initials, w, spec, target.k)
    return float(np.mean((sim - target.sequences) ** 2))


def out_of_sample_error(target, learned, spec: ActivationSpec, initials, k: int,
                        learned_spec: ActivationSpec | None = None) -> float:
    """Mean absolute difference of both maps' free runs from fresh initial states.

    ``learned_spec`` lets the learned map run with its own tuned activation.
    """
    wt, wl = _as_matrix(target), _as_matrix(learned)
    _same_n(wt, wl)
    initials = np.atleast_2d(initials)
    a = simulate(initials, wt, spec, k)
    b = simulate(initials, wl, learned_spec or spec, k)
    return float(np.mean(np.abs(a - b)))


def sequence_abs_error(target: ResponseSet, learned, spec: ActivationSpec) -> float:
    """Mean absolute error of the learned free run against observed sequences."""
    sim = simulate(target.initials, _as_matrix(learned), spec, target.k)
    return float(np.mean(np.abs(sim - target.sequences)))


def model_error(target, learned) -> float:
    wt, wl = _as_matrix(target), _as_matrix(learned)
    _same_n(wt, wl)
    return float(np.mean(np.abs(wt - wl)))


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def specificity(self) -> float:
        d = self.tn + self.fp
        return self.tn / d if d else 0.0

    @property
    def sensitivity(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def ss_mean(self) -> float:
        spec, sens = self.specificity, self.sensitivity
        if spec + sens == 0:
            return 0.0
        return 2.0 * spec * sens / (spec + sens)


def confusion(target, learned, threshold: float = LINK_THRESHOLD) -> ConfusionCounts:
    """Counts over all n^2 positions; a link exists where ``|w| > threshold``."""
    wt, wl = _as_matrix(target), _as_matrix(learned)
    _same_n(wt, wl)
    t_link = np.abs(wt) > threshold
    l_link = np.abs(wl) > threshold
    return ConfusionCounts(
        tp=int(np.sum(~t_link & ~l_link)),
        tn=int(np.sum(t_link & l_link)),
        fp=int(np.sum(t_link & ~l_link)),
        fn=int(np.sum(~t_link & l_link)),
    )


def ss_mean(target, learned, threshold: float = LINK_THRESHOLD) -> float:
    return confusion(target, learned, threshold).ss_mean


@dataclass(frozen=True)
class MetricsReport:
    data_error: float
    out_of_sample_error: float
    model_error: float | None = None
    ss_mean: float | None = None
    execution_seconds: float = 0.0


METRIC_FIELDS = [f.name for f in fields(MetricsReport)]
TIMING_FIELDS = ("execution_seconds",)


def _camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(p.title() for p in rest)


@dataclass(frozen=True)
class AggregateReport:
    """Per-field sample mean and standard deviation (n-1 estimator) over trials."""

    trials: int
    mean: dict
    std: dict

    def to_json(self, include_timing: bool = True) -> dict:
        out = {"trials": self.trials}
        for name in METRIC_FIELDS:
            if not include_timing and name in TIMING_FIELDS:
                continue
            key = _camel(name)
            out[key + "Mean"] = self.mean[name]
            out[key + "Std"] = self.std[name]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "AggregateReport":
        mean, std = {}, {}
        for name in METRIC_FIELDS:
            key = _camel(name)
            mean[name] = obj.get(key + "Mean")
            std[name] = obj.get(key + "Std")
        return cls(obj["trials"], mean, std)


def aggregate(trials: list[MetricsReport]) -> AggregateReport:
    if not trials:
        raise ValueError("cannot aggregate an empty list of reports")
    mean, std = {}, {}
    for name in METRIC_FIELDS:
        vals = [getattr(t, name) for t in trials]
        present = [v is not None for v in vals]
        if any(present) and not all(present):
            raise ValueError(f"field {name!r} is present in some reports but not others")
        if not all(present):
            mean[name] = std[name] = None
            continue
        arr = np.asarray(vals, dtype=float)
        mean[name] = float(arr.mean())
        std[name] = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return AggregateReport(len(trials), mean, std)


def report_to_json(r: MetricsReport) -> dict:
    return {_camel(k): v for k, v in asdict(r).items()}


def is_finite_report(r: MetricsReport) -> bool:
    return all(v is None or math.isfinite(v) for v in asdict(r).values())
