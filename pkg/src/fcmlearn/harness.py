"""Experiment orchestration: random search, leave-one-out evaluation, full runs."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .baselines import PsoConfig, pso_learn
from .core import ActivationSpec, Family, ResponseSet, WeightMatrix
from .datagen import (
    MAP_CONFIGS,
    NoiseSpec,
    RandomFcmSpec,
    add_noise,
    generate_fcm,
    generate_initials,
    generate_responses,
    make_rng,
    map_config,
)
from .io import canonical_json, dump_json, load_timeseries_csv, write_timeseries_csv
from .learner import LearnConfig, learn
from .metrics import (
    AggregateReport,
    MetricsReport,
    aggregate,
    data_error,
    model_error,
    out_of_sample_error,
    report_to_json,
    sequence_abs_error,
    ss_mean,
)

log = logging.getLogger(__name__)

HIST_BINS = 41


class ConfigError(ValueError):
    pass


def _seed_ints(seed, count: int) -> list[int]:
    """``count`` independent 32-bit seeds derived from ``seed``."""
    return [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(seed).spawn(count)]


# ---------------------------------------------------------------------------
# random search


@dataclass(frozen=True)
class SearchSpace:
    alpha_range: tuple[float, float] = (0.0, 0.3)
    beta_range: tuple[float, float] = (0.0, 0.5)
    lambda_range: tuple[float, float] = (0.0, 5.5)
    budget: int = 200
    seed: int = 0

    def __post_init__(self):
        for name in ("alpha_range", "beta_range", "lambda_range"):
            lo, hi = getattr(self, name)
            if not (hi > 0 and hi > lo):
                raise ConfigError(f"{name} must be a nonempty interval with positive upper bound, got {(lo, hi)}")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if self.lambda_range[0] < 0 or self.alpha_range[0] < 0 or self.beta_range[0] < 0:
            raise ConfigError("search ranges must be nonnegative")
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")

    def sample(self) -> list[tuple[float, float, float]]:
        """``budget`` (alpha, beta, lambda) triples, each strictly inside its interval."""
        rng = make_rng(self.seed)

        def draw(lo, hi):
            while True:
                x = lo + (hi - lo) * rng.random()
                if lo < x < hi:
                    return x

        return [
            (draw(*self.alpha_range), draw(*self.beta_range), draw(*self.lambda_range))
            for _ in range(self.budget)
        ]


@dataclass
class SearchResult:
    alpha: float
    beta: float
    lam: float
    weights: WeightMatrix
    data_error: float
    candidates: list = field(default_factory=list)  # (alpha, beta, lam, data_error)

    def config(self, base: LearnConfig) -> LearnConfig:
        return base.replace(alpha=self.alpha, beta=self.beta,
                            activation=ActivationSpec(base.activation.family, self.lam))

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "lambda": self.lam, "dataError": self.data_error}


def random_search(rs: ResponseSet, space: SearchSpace, base: LearnConfig) -> SearchResult:
    """Pick the (alpha, beta, lambda) triple whose learned map best reproduces ``rs``.

    Candidates are scored by training data error; the first of equal scores wins.
    """
    best = None
    candidates = []
    for alpha, beta, lam in space.sample():
        cfg = base.replace(alpha=alpha, beta=beta, activation=ActivationSpec(base.activation.family, lam))
        w = learn(rs, cfg)
        err = data_error(rs, w, cfg.activation)
        candidates.append((alpha, beta, lam, err))
        if best is None or err < best.data_error:
            best = SearchResult(alpha, beta, lam, w, err)
    best.candidates = candidates
    return best


# ---------------------------------------------------------------------------
# leave-one-out


@dataclass
class FoldResult:
    held_out: int
    weights: WeightMatrix
    report: MetricsReport


def leave_one_out(
    rs: ResponseSet,
    cfg: LearnConfig,
    target: WeightMatrix | None = None,
    *,
    target_spec: ActivationSpec | None = None,
    learner: Callable[[ResponseSet], WeightMatrix] | None = None,
    eval_m: int | None = None,
    eval_k: int | None = None,
    eval_seed: int = 0,
) -> tuple[AggregateReport, list[FoldResult]]:
    """Train on all but one sequence, ``m`` times, and aggregate the fold metrics.

    Data error is measured on each fold's training sequences. With a
    ``target`` map, out-of-sample error compares free runs of target and
    learned maps from ``eval_m`` fresh initial states; without one it is the
    mean absolute error on the held-out sequence. ``learner`` replaces the
    default ``learn(rs, cfg)``; the learned map always runs with
    ``cfg.activation``.
    """
    if rs.m < 2:
        raise ValueError(f"leave-one-out needs at least 2 sequences, got m={rs.m}")
    fit = learner or (lambda train: learn(train, cfg))
    spec = cfg.activation
    target_spec = target_spec or spec
    eval_m = eval_m or rs.m
    eval_k = eval_k or rs.k
    fold_seeds = _seed_ints(eval_seed, rs.m)
    folds = []
    for s in range(rs.m):
        train = rs.subset([j for j in range(rs.m) if j != s])
        t0 = time.perf_counter()
        w = fit(train)
        elapsed = time.perf_counter() - t0
        de = data_error(train, w, spec)
        if target is not None:
            fresh = generate_initials(eval_m, rs.n, spec.family, fold_seeds[s])
            oos = out_of_sample_error(target, w, target_spec, fresh, eval_k, learned_spec=spec)
            me, ss = model_error(target, w), ss_mean(target, w)
        else:
            oos = sequence_abs_error(rs.subset([s]), w, spec)
            me = ss = None
        folds.append(FoldResult(s, w, MetricsReport(de, oos, me, ss, elapsed)))
    return aggregate([f.report for f in folds]), folds


# ---------------------------------------------------------------------------
# experiments


def _camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(p.title() for p in rest)


def _snake(name: str) -> str:
    return "".join("_" + c.lower() if c.isupper() else c for c in name)


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark setting; serialised as camelCase JSON."""

    family: str = "sigmoid"
    map_name: str | None = "C20"
    n: int | None = None
    density: float | None = None
    lam_real: float | None = None
    m: int | None = None
    k: int | None = None
    data_path: str | None = None
    target_path: str | None = None
    noise_mu: float = 0.0
    noise_sigma: float = 0.0
    search: SearchSpace = SearchSpace()
    trials: int = 1
    eval_m: int | None = None
    eval_k: int | None = None
    run_pso: bool = False
    pso: PsoConfig = PsoConfig()
    seed: int = 0

    def __post_init__(self):
        try:
            Family(self.family)
        except ValueError:
            raise ConfigError(f"unknown activation family {self.family!r}") from None
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.data_path is None:
            if self.map_name is not None and self.map_name not in MAP_CONFIGS:
                raise ConfigError(f"unknown map {self.map_name!r}; choose from {sorted(MAP_CONFIGS)}")
            if self.map_name is None and None in (self.n, self.density, self.lam_real, self.m, self.k):
                raise ConfigError("synthetic runs need mapName or all of n, density, lamReal, m, k")
        if self.noise_sigma < 0:
            raise ConfigError("noiseSigma must be >= 0")

    def resolved(self) -> dict:
        """Map size, activation, density, m and k after applying overrides to ``map_name``."""
        base = map_config(self.map_name, self.family) if self.map_name else {}
        lam = self.lam_real if self.lam_real is not None else base["activation"].lam
        out = {
            "n": self.n if self.n is not None else base.get("n"),
            "density": self.density if self.density is not None else base.get("density"),
            "activation": ActivationSpec(self.family, lam),
            "m": self.m if self.m is not None else base.get("m"),
            "k": self.k if self.k is not None else base.get("k"),
        }
        return out

    def to_json(self) -> dict:
        out = {}
        for key, val in asdict(self).items():
            if key in ("search", "pso"):
                val = {_camel(k): (list(v) if isinstance(v, tuple) else v) for k, v in val.items()}
            out[_camel(key)] = val
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        kwargs = {}
        for key, val in obj.items():
            name = _snake(key)
            if name == "search":
                val = SearchSpace(**{_snake(k): (tuple(v) if isinstance(v, list) else v) for k, v in val.items()})
            elif name == "pso":
                val = PsoConfig(**{_snake(k): v for k, v in val.items()})
            kwargs[name] = val
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


@dataclass
class TrialResult:
    generator: WeightMatrix | None
    data: ResponseSet
    search: SearchResult
    learned: dict  # method -> WeightMatrix trained on the full data
    reports: dict  # method -> AggregateReport over the leave-one-out folds
    folds: dict  # method -> list[FoldResult]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trials: list[TrialResult]
    summary: dict  # method -> AggregateReport over every fold of every trial


def weight_histogram(w, bins: int = HIST_BINS) -> tuple[np.ndarray, np.ndarray]:
    counts, edges = np.histogram(np.asarray(getattr(w, "weights", w)).ravel(), bins=bins, range=(-1.0, 1.0))
    return counts, edges


def _write_histogram(path: Path, w) -> None:
    counts, edges = weight_histogram(w)
    lines = ["binLow,binHigh,count"]
    lines += [f"{lo!r},{hi!r},{c}" for lo, hi, c in zip(edges[:-1].tolist(), edges[1:].tolist(), counts.tolist())]
    path.write_text("\n".join(lines) + "\n")


def _trial_data(cfg: ExperimentConfig, seeds: list[int]):
    """Generator map (or None) and noisy response set for one trial."""
    if cfg.data_path is not None:
        rs = load_timeseries_csv(cfg.data_path)
        target = WeightMatrix.load(cfg.target_path) if cfg.target_path else None
        if cfg.noise_sigma > 0 or cfg.noise_mu != 0:
            rs = add_noise(rs, NoiseSpec(cfg.noise_mu, cfg.noise_sigma, seeds[2]))
        return target, rs
    r = cfg.resolved()
    spec = r["activation"]
    target = generate_fcm(RandomFcmSpec(r["n"], r["density"], spec, seeds[0]))
    x0 = generate_initials(r["m"], r["n"], spec.family, seeds[1])
    rs = generate_responses(target, spec, x0, r["k"])
    rs = add_noise(rs, NoiseSpec(cfg.noise_mu, cfg.noise_sigma, seeds[2]))
    return target, rs


def run_experiment(cfg: ExperimentConfig, outdir=None, base: LearnConfig | None = None) -> ExperimentResult:
    """Generate or load data, tune and evaluate LEFCM (and optionally PSO), write artifacts.

    Layout of ``outdir``::

        config.json
        metrics_<method>.json        aggregate over all trials
        timing.json                  execution-time aggregates (kept apart so
                                     metrics files are reproducible byte for byte)
        trial_<t>/generator.json     synthetic runs only
        trial_<t>/search.json
        trial_<t>/learned_<method>.json
        trial_<t>/metrics_<method>.json
        trial_<t>/hist_<source>.csv
        trial_<t>/timeseries/<s>.csv
    """
    family = Family(cfg.family)
    true_spec = cfg.resolved()["activation"] if cfg.data_path is None else ActivationSpec(
        family, cfg.lam_real or 1.0)
    base = base or LearnConfig(0.0, 0.0, true_spec)
    trial_seeds = _seed_ints(cfg.seed, cfg.trials)
    trials = []
    for t, tseed in enumerate(trial_seeds):
        seeds = _seed_ints(tseed, 6)  # map, initials, noise, search, evaluation, pso
        target, rs = _trial_data(cfg, seeds)
        space = SearchSpace(cfg.search.alpha_range, cfg.search.beta_range, cfg.search.lambda_range,
                            cfg.search.budget, seeds[3])
        log.info("trial %d: random search over %d candidates", t, space.budget)
        found = random_search(rs, space, base)
        tuned = found.config(base)
        learned = {"lefcm": found.weights}
        reports, folds = {}, {}
        reports["lefcm"], folds["lefcm"] = leave_one_out(
            rs, tuned, target, target_spec=true_spec, eval_m=cfg.eval_m, eval_k=cfg.eval_k, eval_seed=seeds[4])
        if cfg.run_pso:
            pcfg = PsoConfig(**{**asdict(cfg.pso), "seed": seeds[5]})
            pso_base = base.replace(activation=true_spec)
            learned["pso"] = pso_learn(rs, true_spec, pcfg)
            reports["pso"], folds["pso"] = leave_one_out(
                rs, pso_base, target, target_spec=true_spec, learner=lambda tr: pso_learn(tr, true_spec, pcfg),
                eval_m=cfg.eval_m, eval_k=cfg.eval_k, eval_seed=seeds[4])
        trials.append(TrialResult(target, rs, found, learned, reports, folds))

    methods = list(trials[0].reports)
    summary = {m: aggregate([f.report for tr in trials for f in tr.folds[m]]) for m in methods}
    result = ExperimentResult(cfg, trials, summary)
    if outdir is not None:
        write_results(result, outdir)
    return result


def write_results(result: ExperimentResult, outdir) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    dump_json(result.config.to_json(), out / "config.json")
    timing = {}
    for method, agg in result.summary.items():
        body = agg.to_json(include_timing=False)
        body["perTrial"] = [tr.reports[method].to_json(include_timing=False) for tr in result.trials]
        dump_json(body, out / f"metrics_{method}.json")
        timing[method] = {
            "executionSecondsMean": agg.mean["execution_seconds"],
            "executionSecondsStd": agg.std["execution_seconds"],
        }
    dump_json(timing, out / "timing.json")
    for t, tr in enumerate(result.trials):
        tdir = out / f"trial_{t}"
        (tdir / "timeseries").mkdir(parents=True, exist_ok=True)
        if tr.generator is not None:
            tr.generator.save(tdir / "generator.json")
            _write_histogram(tdir / "hist_generator.csv", tr.generator)
        dump_json(tr.search.to_json(), tdir / "search.json")
        for method, w in tr.learned.items():
            w.save(tdir / f"learned_{method}.json")
            _write_histogram(tdir / f"hist_{method}.csv", w)
            body = {
                "aggregate": tr.reports[method].to_json(include_timing=False),
                "folds": [
                    {k: v for k, v in report_to_json(f.report).items() if k != "executionSeconds"}
                    | {"heldOut": f.held_out}
                    for f in tr.folds[method]
                ],
            }
            dump_json(body, tdir / f"metrics_{method}.json")
        for s in range(tr.data.m):
            write_timeseries_csv(tr.data, tdir / "timeseries" / f"{s}.csv", seqs=[s])


def metrics_fingerprint(outdir) -> dict[str, str]:
    """Contents of every metrics JSON under ``outdir``, keyed by relative path."""
    out = Path(outdir)
    return {str(p.relative_to(out)): p.read_text() for p in sorted(out.rglob("metrics_*.json"))}


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "SearchResult",
    "SearchSpace",
    "canonical_json",
    "leave_one_out",
    "metrics_fingerprint",
    "random_search",
    "run_experiment",
    "weight_histogram",
]
