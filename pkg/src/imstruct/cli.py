"""Command-line front end: ``python -m imstruct {analyze,elicit,simulate,transform}``.

Every command writes a schema-versioned JSON document (to ``--out`` or
stdout).  When ``--out`` is given, flat CSV tables for plotting are written
next to it, named ``<stem>.<table>.csv``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric or rank error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np
from scipy import stats

from .data import load_csv
from .elicit import solve_gamma, upper_mean, upper_mean_curve
from .errors import DataError, DomainError, RankDeficiencyError, StaleTableError
from .possibility import MassFunction, grid_contour, most_diffuse, prob_to_poss
from .simulate import (
    DEFAULT_ALPHAS,
    VALIDITY_GRID,
    CoverageConfig,
    coverage_experiment,
    false_confidence_experiment,
    validity_experiment,
)
from .structure import (
    PriorSpec,
    cached_reference_table,
    confidence_set,
    enumerate_structures,
    marginal_complexity_contour,
    structure_contour,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str) -> np.ndarray:
    """``start:stop:step`` with ``stop`` included when it lies on the grid."""
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("grid needs step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def _common(parser: argparse.ArgumentParser, mc_default: int):
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (default: $IMSTRUCT_SEED or 0)")
    parser.add_argument("--mc-samples", type=int, default=mc_default,
                        help=f"Monte Carlo sample size (default {mc_default})")
    parser.add_argument("--out", type=Path, default=None, help="JSON output path (default stdout)")
    parser.add_argument("--cache-dir", type=Path, default=None,
                        help="reference-table cache (default: $IMSTRUCT_CACHE_DIR, else no cache)")
    parser.add_argument("--n-jobs", type=int, default=1, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imstruct", description="Possibilistic inference on regression structure.")
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", help="contour over variable subsets for a CSV data set")
    _common(an, 10_000)
    an.add_argument("--data", type=Path, required=True)
    an.add_argument("--response", required=True)
    an.add_argument("--standardize", action="store_true")
    an.add_argument("--exclude", action="append", default=[], help="column to drop (repeatable or comma list)")
    an.add_argument("--interactions", default=None, help="products to add, e.g. a:b,c:d")
    an.add_argument("--marginality", action="store_true", help="interactions only with both parents present")
    an.add_argument("--gamma", type=float, required=True)
    an.add_argument("--alpha", type=float, action="append", default=None, help="confidence level (repeatable)")
    an.set_defaults(func=cmd_analyze)

    el = sub.add_parser("elicit", help="tune gamma against the prior upper mean of the complexity")
    _common(el, 0)
    el.add_argument("--p", type=int, required=True)
    group = el.add_mutually_exclusive_group(required=True)
    group.add_argument("--target-mean", type=float)
    group.add_argument("--gamma", type=float)
    el.add_argument("--grid", type=_grid, default=None, help="gamma grid for the curve, start:stop:step")
    el.set_defaults(func=cmd_elicit)

    sim = sub.add_parser("simulate", help="coverage, validity and false-confidence studies")
    sim_sub = sim.add_subparsers(dest="experiment", required=True)
    for name in ("coverage", "validity"):
        sp = sim_sub.add_parser(name)
        _common(sp, 5000)
        sp.add_argument("--p", type=int, default=3)
        sp.add_argument("--n", type=int, default=25)
        sp.add_argument("--gamma", type=float, default=1.0)
        sp.add_argument("--coefficients", type=_float_list, default=None, help="slope pool, length p")
        sp.add_argument("--intercept", type=float, default=0.0)
        sp.add_argument("--variance", type=float, default=1.0)
        sp.add_argument("--reps", type=int, default=2000)
        sp.add_argument("--alpha", type=float, action="append", default=None)
        sp.set_defaults(func=cmd_simulate)
    fc = sim_sub.add_parser("false-confidence")
    _common(fc, 10_000)
    fc.add_argument("--n", type=int, default=25)
    fc.add_argument("--coefficients", type=_float_list, default=[0.3, 0.1], help="intercept,slope")
    fc.add_argument("--variance", type=float, default=1.0)
    fc.add_argument("--reps", type=int, default=1000)
    fc.add_argument("--threshold", type=float, default=-1.0)
    fc.set_defaults(func=cmd_simulate)

    tr = sub.add_parser("transform", help="probability-to-possibility transform of a named distribution")
    _common(tr, 0)
    tr.add_argument("--dist", required=True)
    tr.add_argument("--params", type=_float_list, required=True)
    tr.add_argument("--grid", type=_grid, default=None, help="evaluation grid for continuous families")
    tr.set_defaults(func=cmd_transform)
    return parser


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("IMSTRUCT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"IMSTRUCT_SEED={env!r} is not an integer") from None


def _cache_dir(args):
    if args.cache_dir is not None:
        return args.cache_dir
    env = os.environ.get("IMSTRUCT_CACHE_DIR")
    return Path(env) if env else None


def _emit(args, doc: dict, tables: dict[str, tuple[list[str], list]]):
    text = json.dumps(doc, indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        return
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(text)
    for name, (header, rows) in tables.items():
        path = args.out.with_name(f"{args.out.stem}.{name}.csv")
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)


def _doc(kind: str, **body) -> dict:
    return {"schema": f"imstruct.{kind}", "schema_version": SCHEMA_VERSION, **body}


def cmd_analyze(args) -> dict:
    if args.gamma < 0:
        raise UsageError("--gamma must be nonnegative")
    alphas = args.alpha or [0.05]
    if not all(0 < a < 1 for a in alphas):
        raise UsageError("--alpha values must lie in (0, 1)")
    exclude = [c for item in args.exclude for c in item.split(",") if c]
    loaded = load_csv(args.data, args.response, exclude, args.standardize, args.interactions)
    data = loaded.dataset
    universe = enumerate_structures(data.p, loaded.rules if args.marginality else None)
    prior = PriorSpec(args.gamma, data.p)
    seed = _seed(args)
    table = cached_reference_table(data.design, prior, universe, args.mc_samples, seed,
                                   _cache_dir(args), args.n_jobs)
    sc = structure_contour(data, prior, table, universe)
    ranked = sc.ranked()
    structures = [
        {"mask": s.mask, "names": s.names(data.names), "complexity": s.complexity, "possibility": v}
        for s, v in ranked
    ]
    sets = []
    for a in alphas:
        members = confidence_set(sc, a)
        sets.append({"alpha": a, "size": len(members), "masks": [s.mask for s, _ in members]})
    marginal = marginal_complexity_contour(sc)
    doc = _doc(
        "analysis",
        structures=structures,
        confidence_sets=sets,
        complexity_contour=[{"k": k, "possibility": v} for k, v in marginal.items()],
        prior={"gamma": args.gamma, "q_K": prior.values.tolist()},
        metadata={
            "data": str(args.data),
            "response": args.response,
            "covariates": list(data.names),
            "n": data.n,
            "p": data.p,
            "standardize": args.standardize,
            "exclude": exclude,
            "interactions": args.interactions,
            "marginality": args.marginality,
            "universe_size": len(universe),
            "B": args.mc_samples,
            "seed": seed,
        },
    )
    tables = {
        "structures": (["rank", "mask", "names", "complexity", "possibility"],
                       [[i + 1, r["mask"], " ".join(r["names"]), r["complexity"], r["possibility"]]
                        for i, r in enumerate(structures)]),
        "complexity": (["k", "possibility"], [[k, v] for k, v in marginal.items()]),
    }
    _emit(args, doc, tables)
    return doc


def cmd_elicit(args) -> dict:
    if args.p < 1:
        raise UsageError("--p must be at least 1")
    grid = args.grid if args.grid is not None else _grid("0.05:5:0.05")
    if args.target_mean is not None:
        if not 0 < args.target_mean < args.p:
            raise UsageError(f"--target-mean must lie strictly between 0 and p={args.p}")
        gamma = solve_gamma(args.p, args.target_mean)
    else:
        if not args.gamma > 0:
            raise UsageError("--gamma must be positive")
        gamma = args.gamma
    prior = PriorSpec(gamma, args.p)
    curve = upper_mean_curve(args.p, grid[grid > 0])
    doc = _doc(
        "elicitation",
        p=args.p,
        target_mean=args.target_mean,
        gamma=gamma,
        upper_mean=upper_mean(args.p, gamma),
        q_K=prior.values.tolist(),
        most_diffuse=most_diffuse(prior.contour()).masses.tolist(),
        curve=[{"gamma": g, "upper_mean": m} for g, m in curve],
    )
    _emit(args, doc, {"curve": (["gamma", "upper_mean"], [list(r) for r in curve])})
    return doc


def cmd_simulate(args) -> dict:
    seed = _seed(args)
    if args.experiment == "false-confidence":
        if len(args.coefficients) != 2:
            raise UsageError("--coefficients must be intercept,slope")
        if args.reps < 1:
            raise UsageError("--reps must be positive")
        report = false_confidence_experiment(args.n, args.coefficients, args.variance, args.reps,
                                             args.mc_samples, seed, args.threshold)
        doc = _doc(
            "false_confidence",
            config={"n": args.n, "coefficients": args.coefficients, "variance": args.variance,
                    "datasets": args.reps, "posterior_draws": args.mc_samples, "seed": seed,
                    "threshold": args.threshold, "design": "standard normal, fixed across data sets"},
            exceedance_0_6=report.exceedance(0.6),
            records=[{"level": g, "cdf": c} for g, c in report.cdf],
        )
        print(f"fraction with posterior probability > 0.6: {report.exceedance(0.6):.3f}", file=sys.stderr)
        _emit(args, doc, {"cdf": (["level", "cdf"], [list(r) for r in report.cdf])})
        return doc

    coeffs = args.coefficients or [0.5, 1.0, 5.0][: args.p] + [1.0] * max(0, args.p - 3)
    config = CoverageConfig(p=args.p, n=args.n, gamma=args.gamma, coefficients=tuple(coeffs),
                            intercept=args.intercept, variance=args.variance, replications=args.reps,
                            alphas=tuple(args.alpha or DEFAULT_ALPHAS), B=args.mc_samples, seed=seed)
    if args.experiment == "coverage":
        report = coverage_experiment(config, n_jobs=args.n_jobs)
        doc = _doc("coverage", **json.loads(report.to_json()))
        for r in report.records:
            print(f"alpha={r.alpha:.2f} im={r.im_coverage:.4f} bayes={r.bayes_coverage:.4f}", file=sys.stderr)
        rows = [[r.alpha, r.im_coverage, r.bayes_coverage, r.mc_standard_error] for r in report.records]
        _emit(args, doc, {"coverage": (["alpha", "im_coverage", "bayes_coverage", "mc_standard_error"], rows)})
        return doc
    grid = VALIDITY_GRID if args.alpha is None else tuple(sorted(set(args.alpha) | {1.0}))
    cdf = validity_experiment(config, grid=grid, n_jobs=args.n_jobs)
    doc = _doc("validity", replications=config.replications, config=config.to_dict(),
               records=[{"alpha": a, "cdf": c} for a, c in cdf])
    _emit(args, doc, {"validity": (["alpha", "cdf"], [list(r) for r in cdf])})
    return doc


def cmd_transform(args) -> dict:
    family = args.dist.lower()
    if family == "binom":
        if len(args.params) != 2:
            raise UsageError("binom needs --params size,prob")
        size, prob = int(args.params[0]), args.params[1]
        if size != args.params[0] or size < 0 or not 0 <= prob <= 1:
            raise UsageError("binom needs an integer size >= 0 and prob in [0, 1]")
        support = np.arange(size + 1)
        contour = prob_to_poss(MassFunction(tuple(support.tolist()), stats.binom.pmf(support, size, prob)))
    elif family == "gamma":
        if len(args.params) != 2 or min(args.params) <= 0:
            raise UsageError("gamma needs --params shape,rate with both positive")
        if args.grid is None:
            raise UsageError("gamma needs --grid start:stop:step")
        shape, rate = args.params
        contour = grid_contour(lambda t: stats.gamma.pdf(t, shape, scale=1.0 / rate), args.grid)
    else:
        raise UsageError(f"unsupported distribution {args.dist!r}; use binom or gamma")
    rows = [[x, v] for x, v in contour.items()]
    doc = _doc("transform", dist=family, params=args.params,
               contour=[{"point": x, "possibility": v} for x, v in rows])
    _emit(args, doc, {"contour": (["point", "possibility"], rows)})
    return doc


def _fail(code: int, exc: Exception) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("row", "column", "columns"):
        value = getattr(exc, attr, None)
        if value not in (None, ()):
            payload[attr] = list(value) if isinstance(value, tuple) else value
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    except (DataError, StaleTableError) as exc:
        return _fail(EXIT_DATA, exc)
    except DomainError as exc:
        return _fail(EXIT_USAGE, exc)
    except (RankDeficiencyError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
