"""Command-line interface: ``fcmlearn <command> ...``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .baselines import PsoConfig, pso_learn
from .core import ActivationSpec, ResponseSet, WeightMatrix
from .datagen import MAP_CONFIGS, NoiseSpec, RandomFcmSpec, add_noise, generate_fcm, generate_initials, \
    generate_responses, map_config
from .harness import ConfigError, ExperimentConfig, SearchSpace, leave_one_out, random_search, run_experiment
from .io import DataFormatError, canonical_json, dump_json, load_json, load_timeseries_csv, write_timeseries_csv
from .learner import LearnConfig, NumericalError, learn
from .metrics import data_error, model_error, out_of_sample_error, sequence_abs_error, ss_mean

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _activation(args) -> ActivationSpec:
    return ActivationSpec(args.family, args.lam)


def _add_activation(p, lam_required=True):
    p.add_argument("--family", choices=["sigmoid", "tanh"], default="sigmoid")
    p.add_argument("--lam", type=float, required=lam_required, default=None, help="activation shape parameter")


def cmd_generate(args) -> int:
    if args.map:
        cfg = map_config(args.map, args.family)
        n, density, spec, m, k = cfg["n"], cfg["density"], cfg["activation"], cfg["m"], cfg["k"]
    else:
        n, density, m, k = args.n, args.density, args.m, args.k
        if None in (n, density, m, k, args.lam):
            raise ConfigError("without --map, --n --density --m --k --lam are all required")
        spec = _activation(args)
    if args.lam is not None:
        spec = ActivationSpec(args.family, args.lam)
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(args.seed).spawn(3)]
    w = generate_fcm(RandomFcmSpec(n, density, spec, seeds[0]))
    rs = generate_responses(w, spec, generate_initials(m, n, spec.family, seeds[1]), k)
    rs = add_noise(rs, NoiseSpec(args.noise_mu, args.noise_sigma, seeds[2]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    w.save(out / "generator.json")
    write_timeseries_csv(rs, out / "timeseries.csv")
    print(f"wrote {out / 'generator.json'} and {out / 'timeseries.csv'} (n={n}, m={m}, k={k})")
    return 0


def _learn_config(args) -> LearnConfig:
    return LearnConfig(args.alpha, args.beta, _activation(args), clamp_eps=args.clamp_eps)


def cmd_learn(args) -> int:
    rs = load_timeseries_csv(args.data)
    t0 = time.perf_counter()
    w = learn(rs, _learn_config(args))
    elapsed = time.perf_counter() - t0
    w.save(args.out)
    print(f"learned {w.n}x{w.n} map in {elapsed:.2f}s; data error {data_error(rs, w, _activation(args)):.6g}")
    return 0


def cmd_pso(args) -> int:
    rs = load_timeseries_csv(args.data)
    cfg = PsoConfig(population_size=args.population, max_iters=args.iters, seed=args.seed)
    w = pso_learn(rs, _activation(args), cfg)
    w.save(args.out)
    print(f"PSO map written to {args.out}; data error {data_error(rs, w, _activation(args)):.6g}")
    return 0


def cmd_evaluate(args) -> int:
    rs = load_timeseries_csv(args.data)
    spec = _activation(args)
    w = WeightMatrix.load(args.learned)
    report = {"dataError": data_error(rs, w, spec)}
    if args.target:
        target = WeightMatrix.load(args.target)
        tspec = ActivationSpec(args.family, args.target_lam or args.lam)
        fresh = generate_initials(args.eval_m or rs.m, rs.n, spec.family, args.seed)
        report["outOfSampleError"] = out_of_sample_error(target, w, tspec, fresh, args.eval_k or rs.k,
                                                         learned_spec=spec)
        report["modelError"] = model_error(target, w)
        report["ssMean"] = ss_mean(target, w)
    else:
        report["sequenceAbsError"] = sequence_abs_error(rs, w, spec)
    print(canonical_json(report), end="")
    return 0


def cmd_search(args) -> int:
    rs = load_timeseries_csv(args.data)
    space = SearchSpace(tuple(args.alpha_range), tuple(args.beta_range), tuple(args.lambda_range),
                        args.budget, args.seed)
    base = LearnConfig(0.0, 0.0, ActivationSpec(args.family, 1.0), clamp_eps=args.clamp_eps)
    found = random_search(rs, space, base)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    found.weights.save(out / "learned_lefcm.json")
    dump_json(found.to_json(), out / "search.json")
    if args.loo and rs.m >= 2:
        target = WeightMatrix.load(args.target) if args.target else None
        agg, _ = leave_one_out(rs, found.config(base), target, eval_seed=args.seed)
        dump_json(agg.to_json(include_timing=False), out / "metrics_lefcm.json")
    print(canonical_json(found.to_json()), end="")
    return 0


def cmd_experiment(args) -> int:
    raw = load_json(args.config) if args.config else {}
    if args.map:
        raw["mapName"] = args.map
    if args.family:
        raw["family"] = args.family
    if args.noise_sigma is not None:
        raw["noiseSigma"] = args.noise_sigma
    if args.trials is not None:
        raw["trials"] = args.trials
    if args.budget is not None:
        raw.setdefault("search", {})["budget"] = args.budget
    if args.pso:
        raw["runPso"] = True
    raw["seed"] = args.seed
    cfg = ExperimentConfig.from_json(raw)
    result = run_experiment(cfg, args.out)
    for method, agg in result.summary.items():
        print(method, json.dumps(agg.to_json()))
    return 0


def cmd_convert(args) -> int:
    """Convert a DREAM4-style time-series TSV into the ``seq,t,c1..cn`` CSV."""
    blocks, cur = [], []
    with open(args.input, encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter="\t"))
    header = None
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not c.strip() for c in row):
            if cur:
                blocks.append(cur)
                cur = []
            continue
        if header is None:
            header = row
            continue
        if row[0].strip().lower() == "time":
            continue
        try:
            cur.append([float(c) for c in row[1:]])
        except ValueError:
            raise DataFormatError(f"{args.input}: row {lineno}: non-numeric cell") from None
    if cur:
        blocks.append(cur)
    if not blocks:
        raise DataFormatError(f"{args.input}: no data rows")
    lengths = {len(b) for b in blocks}
    widths = {len(r) for b in blocks for r in b}
    if len(lengths) != 1 or len(widths) != 1:
        raise DataFormatError(f"{args.input}: ragged blocks (lengths {sorted(lengths)}, widths {sorted(widths)})")
    data = np.asarray(blocks)
    if args.normalize:
        lo, hi = data.min(), data.max()
        data = (data - lo) / (hi - lo) if hi > lo else np.zeros_like(data)
    rs = ResponseSet(data[:, 0, :], data[:, 1:, :])
    write_timeseries_csv(rs, args.out)
    print(f"wrote {args.out}: m={rs.m}, k={rs.k}, n={rs.n}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fcmlearn", description="Learn fuzzy cognitive maps from time series.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a random map and its (noisy) response sequences")
    p.add_argument("--map", choices=sorted(MAP_CONFIGS))
    p.add_argument("--n", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    _add_activation(p, lam_required=False)
    p.add_argument("--noise-mu", type=float, default=0.0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", help="learn a map with fixed hyperparameters")
    p.add_argument("--data", required=True)
    _add_activation(p)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--clamp-eps", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("pso", help="learn a map with the particle swarm baseline")
    p.add_argument("--data", required=True)
    _add_activation(p)
    p.add_argument("--population", type=int, default=20)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pso)

    p = sub.add_parser("evaluate", help="score a learned map")
    p.add_argument("--data", required=True)
    p.add_argument("--learned", required=True)
    _add_activation(p)
    p.add_argument("--target")
    p.add_argument("--target-lam", type=float)
    p.add_argument("--eval-m", type=int)
    p.add_argument("--eval-k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("search", help="random search over (alpha, beta, lambda)")
    p.add_argument("--data", required=True)
    p.add_argument("--family", choices=["sigmoid", "tanh"], default="sigmoid")
    p.add_argument("--alpha-range", type=float, nargs=2, default=[0.0, 0.3])
    p.add_argument("--beta-range", type=float, nargs=2, default=[0.0, 0.5])
    p.add_argument("--lambda-range", type=float, nargs=2, default=[0.0, 5.5])
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--clamp-eps", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--loo", action="store_true", help="also run leave-one-out with the selected triple")
    p.add_argument("--target")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("experiment", help="full protocol: data, search, leave-one-out, artifacts")
    p.add_argument("--config", help="ExperimentConfig JSON")
    p.add_argument("--map", choices=sorted(MAP_CONFIGS))
    p.add_argument("--family", choices=["sigmoid", "tanh"])
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--pso", action="store_true")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("convert", help="DREAM4 time-series TSV to seq,t,c1..cn CSV")
    p.add_argument("input")
    p.add_argument("--normalize", action="store_true", help="min-max scale all values into [0, 1]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataFormatError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
