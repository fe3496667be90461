"""Command-line interface.

Subcommands: ``run``, ``grid``, ``baseline``, ``synth``, ``convert``.
Exit codes: 0 success, 2 dataset/validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import experiment as ex
from .data import convert_mfeat, generate_synthetic, load_dataset, save_dataset
from .errors import DatasetError, InputError, NumericsError
from .types import Hyperparams

EXIT_OK, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3


def _floats(text: str):
    return [float(x) for x in text.split(",") if x.strip()]


def _add_solver_args(p, method=True):
    p.add_argument("--manifest", required=True, help="dataset manifest (JSON)")
    if method:
        p.add_argument("--method", default="gfsc",
                       help="gfsc, gf, sc-view:V (1-based), sc-ave or kmeans-concat")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.01)
    p.add_argument("--k", type=int, help="cluster count (default: number of classes)")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--init", choices=("random", "warm"), default="random")
    p.add_argument("--row-normalize", action="store_true",
                   help="unit-normalize embedding rows before the final k-means")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="results file (JSON); a .txt table is written alongside")
    p.add_argument("--trace-dir", help="also write one trace file per run, with timings")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gfsc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one method with the repetition protocol")
    _add_solver_args(p)

    p = sub.add_parser("grid", help="grid search over alpha, beta, gamma")
    _add_solver_args(p)
    for axis in ("alphas", "betas", "gammas"):
        p.add_argument(f"--{axis}", type=_floats,
                       help="comma-separated values (default 1e-7,...,1e7)")

    p = sub.add_parser("baseline", help="run several methods and print a comparison table")
    _add_solver_args(p, method=False)
    p.add_argument("--methods", help="comma-separated methods "
                   "(default: every SC view, sc-ave, kmeans-concat, gf, gfsc)")

    p = sub.add_parser("synth", help="write a synthetic planted-partition dataset")
    p.add_argument("--n", type=int, default=150)
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("convert", help="convert UCI Multiple Features files to CSV + manifest")
    p.add_argument("--src", required=True, help="directory with mfeat-* files")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _params(args, data) -> Hyperparams:
    k = args.k if args.k is not None else data.n_classes
    if k is None:
        raise InputError("--k is required when the dataset has no labels")
    return Hyperparams(alpha=args.alpha, beta=args.beta, gamma=args.gamma, k=k,
                       max_iter=args.max_iter, tol=args.tol, seed=args.seed)


def _config(args, method, params, grid=None, out=None):
    return ex.ExperimentConfig(manifest=args.manifest, method=method, params=params,
                               repetitions=args.reps, grid=grid, out=out, init=args.init,
                               row_normalize=args.row_normalize, workers=args.workers)


def _write_traces(report, trace_dir, tag):
    d = Path(trace_dir)
    d.mkdir(parents=True, exist_ok=True)
    for run in report["runs"]:
        if "trace" in run:
            (d / f"{tag}-rep{run['rep']}.json").write_text(json.dumps(run["trace"], indent=1))


def _status(reports) -> int:
    for rep in reports:
        if any(r.get("numerical") for r in rep["runs"]):
            return EXIT_NUMERIC
    return EXIT_OK


def cmd_run(args) -> int:
    data = load_dataset(args.manifest)
    config = _config(args, args.method, _params(args, data), out=args.out)
    report = ex.run_experiment(config, data)
    if args.trace_dir:
        _write_traces(report, args.trace_dir, args.method.replace(":", "-"))
    print(ex.format_table([report], data.name), end="")
    return _status([report])


def cmd_grid(args) -> int:
    data = load_dataset(args.manifest)
    grid = {"alpha": args.alphas or list(ex.DEFAULT_GRID),
            "beta": args.betas or list(ex.DEFAULT_GRID),
            "gamma": args.gammas or list(ex.DEFAULT_GRID)}
    config = _config(args, args.method, _params(args, data), grid=grid, out=args.out)
    result = ex.grid_search(config, data)
    print(f"cells: {len(result['surface'])}")
    print(f"best: {json.dumps(result['best'])}")
    return _status(result["reports"])


def cmd_baseline(args) -> int:
    data = load_dataset(args.manifest)
    if args.methods:
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    else:
        methods = ([f"sc-view:{v + 1}" for v in range(data.t)]
                   + ["sc-ave", "kmeans-concat", "gf", "gfsc"])
    params = _params(args, data)
    reports = [ex.run_experiment(_config(args, m, params), data) for m in methods]
    if args.out:
        ex.write_reports(reports, args.out)
    print(ex.format_table(reports, data.name), end="")
    return _status(reports)


def cmd_synth(args) -> int:
    data = generate_synthetic(args.n, args.t, args.k, noise=args.noise, seed=args.seed)
    path = save_dataset(data, args.out)
    print(path)
    return EXIT_OK


def cmd_convert(args) -> int:
    print(convert_mfeat(args.src, args.out))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "grid": cmd_grid, "baseline": cmd_baseline,
            "synth": cmd_synth, "convert": cmd_convert}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (DatasetError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
