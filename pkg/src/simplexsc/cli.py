"""Command-line interface.

Three subcommands: ``cluster`` runs the pipeline on a CSV or IDX dataset,
``bench-synthetic`` sweeps one of the synthetic tables, and
``active-loop`` alternates label queries with constrained re-clustering.
Flags mirror config-file keys; values from ``--config`` files are applied
first and explicit flags win.  Exit codes: 0 on success, 2 on data
errors, 3 when some solves missed certification and that was not
explicitly accepted.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import active, bench, datasets, metrics, pipeline
from .errors import DataError

EXIT_OK = 0
EXIT_DATA = 2
EXIT_NOT_CERTIFIED = 3


def _load_config_file(path):
    """Parse a JSON object or plain key=value lines into a dict."""
    text = Path(path).read_text()
    stripped = text.strip()
    if stripped.startswith("{"):
        payload = json.loads(stripped)
        if not isinstance(payload, dict):
            raise DataError(f"{path}: top-level JSON value must be an object")
        return payload
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}: line {lineno} is not key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


_FLAG_TO_KEY = {
    "k": "n_clusters",
    "knn": "knn",
    "rho": "rho",
    "xi": "xi",
    "q": "dim",
    "seed": "seed",
    "restarts": "restarts",
    "accept_nonconverged": "accept_nonconverged",
}


def _merge_config(args, require=()):
    """Config-file values overridden by explicitly supplied flags.

    ``require`` lists config keys that must come from one of the two
    sources; missing ones are data errors rather than silent defaults.
    """
    values = {}
    if getattr(args, "config", None):
        for key, value in _load_config_file(args.config).items():
            values[_FLAG_TO_KEY.get(key, key)] = value
    for flag, key in _FLAG_TO_KEY.items():
        supplied = getattr(args, flag, None)
        if supplied is not None and supplied is not False:
            values[key] = supplied
    for key in require:
        if key not in values:
            flag = {v: k for k, v in _FLAG_TO_KEY.items()}.get(key, key)
            raise DataError(f"missing setting: pass --{flag} or put "
                            f"{flag} in the config file")
    try:
        return pipeline.Config.from_mapping(values)
    except ValueError as err:
        raise DataError(str(err)) from None


def _features_only_csv(path):
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataError(f"{path}: empty file")
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    try:
        points = np.array([[float(c) for c in row] for row in rows])
    except ValueError as err:
        raise DataError(f"{path}: {err}") from None
    return points


def _project(points, target_dim):
    try:
        return datasets.pca_project(points, target_dim)
    except ValueError as err:
        raise DataError(str(err)) from None


def _load_input(args):
    """Returns (points, labels-or-None) for a cluster/active command."""
    path = args.input
    is_idx = args.format == "idx" or (
        args.format == "auto"
        and ("idx" in Path(path).suffixes[-1:] or path.endswith("-ubyte"))
    )
    if is_idx:
        if not args.labels:
            raise DataError("IDX input needs --labels with the label file")
        data = datasets.load_idx(path, args.labels)
        return data.points, data.labels
    if args.label_column is not None:
        column = args.label_column
        if isinstance(column, str) and column.lstrip("-").isdigit():
            column = int(column)
        data = datasets.load_csv(path, column)
        return data.points, data.labels
    return _features_only_csv(path), None


def _write_json(payload, out):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _add_common_flags(sub):
    sub.add_argument("--knn", type=int, default=None, help="neighborhood size")
    sub.add_argument("--rho", type=float, default=None, help="sparsity penalty")
    sub.add_argument("--xi", type=float, default=None, help="ridge strength")
    sub.add_argument("--q", type=int, default=None,
                     help="subspace dimension for refinement stages")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--restarts", type=int, default=None,
                     help="k-means restarts")
    sub.add_argument("--config", default=None,
                     help="JSON or key=value config file; flags override it")
    sub.add_argument("--accept-nonconverged", dest="accept_nonconverged",
                     action="store_true", default=None,
                     help="exit 0 even when some solves miss certification")
    sub.add_argument("--out", default=None, help="output JSON path")


def _add_input_flags(sub):
    sub.add_argument("--input", required=True, help="CSV file or IDX images")
    sub.add_argument("--labels", default=None, help="IDX label file")
    sub.add_argument("--label-column", dest="label_column", default=None,
                     help="CSV label column name or index")
    sub.add_argument("--format", choices=["auto", "csv", "idx"],
                     default="auto")
    sub.add_argument("--pca", type=int, default=None,
                     help="project onto this many principal directions first")


def cmd_cluster(args):
    config = _merge_config(args, require=("n_clusters",))
    points, truth = _load_input(args)
    if args.pca:
        points = _project(points, args.pca)
    result = pipeline.cluster_cloud(points, config)
    payload = {
        "labels": result.assignment.labels.tolist(),
        "n_clusters": config.n_clusters,
        "accuracy": (
            metrics.accuracy(result.assignment, truth)
            if truth is not None
            else None
        ),
        "rejected": [int(i) for i in result.rejected],
        "extra_components": result.assignment.extra_components,
        "runtime": result.runtime,
        "config": vars(config).copy(),
        "build": bench.build_identifier(),
    }
    _write_json(payload, args.out)
    if result.rejected and not config.accept_nonconverged:
        return EXIT_NOT_CERTIFIED
    return EXIT_OK


def cmd_bench_synthetic(args):
    seeds = tuple(range(args.seeds))
    configs = bench.TABLES[args.table](
        seeds=seeds, n_per_cluster=args.n_per_cluster
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    any_rejected = False
    for config in configs:
        result = bench.run_experiment(config, jobs=args.jobs)
        bench.save_result(
            result,
            outdir / f"{config.name}.json",
            outdir / f"{config.name}.csv",
        )
        rejected = sum(row["rejected"] for row in result.per_seed)
        any_rejected = any_rejected or rejected > 0
        print(
            f"{config.name}: median={result.median_accuracy:.3f} "
            f"std={result.std_accuracy:.3f} "
            f"runtime={result.total_runtime:.1f}s rejected={rejected}"
        )
    if any_rejected and not args.accept_nonconverged:
        return EXIT_NOT_CERTIFIED
    return EXIT_OK


def _prompt_oracle(index):
    return int(input(f"class label for point {index}: "))


def cmd_active_loop(args):
    config = _merge_config(args, require=("n_clusters",))
    if config.dim is None:
        raise DataError("active-loop needs --q (subspace dimension)")
    points, truth = _load_input(args)
    if args.pca:
        points = _project(points, args.pca)
    if args.oracle == "ground-truth":
        if truth is None:
            raise DataError("ground-truth oracle needs labelled input")
        oracle = lambda i: int(truth[i])
    else:
        oracle = _prompt_oracle

    plain = pipeline.cluster_cloud(points, config)
    state = active.state_from_labels(
        points, plain.assignment.labels, config.n_clusters,
        config.dim, config.center,
    )
    budget = max(1, round(args.budget_pct / 100.0 * points.shape[0]))
    alpha = None if args.alpha == "auto" else float(args.alpha)
    store = active.ConstraintStore(alpha=alpha, budget_per_round=budget)
    base = (plain.cloud, plain.neighborhoods)

    rounds = []
    any_rejected = len(plain.rejected) > 0
    for round_no in range(args.rounds):
        outcome = active.constrained_round(
            points, config, store, state, oracle=oracle, base=base
        )
        state, store = outcome.state, outcome.store
        record = {"round": round_no, **outcome.diagnostics}
        if truth is not None:
            record["accuracy"] = metrics.accuracy(state.labels, truth)
        print(json.dumps(record, sort_keys=True))
        rounds.append(record)
        any_rejected = any_rejected or outcome.diagnostics["rejected_solves"] > 0

    payload = {
        "rounds": rounds,
        "final_labels": state.labels.tolist(),
        "initial_accuracy": (
            metrics.accuracy(plain.assignment, truth)
            if truth is not None
            else None
        ),
        "config": vars(config).copy(),
        "build": bench.build_identifier(),
    }
    if args.out:
        _write_json(payload, args.out)
    if any_rejected and not config.accept_nonconverged:
        return EXIT_NOT_CERTIFIED
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="simplexsc",
        description="Subspace clustering through simplex-constrained "
        "sparse representations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cluster = sub.add_parser("cluster", help="cluster a dataset file")
    _add_input_flags(cluster)
    cluster.add_argument("--k", type=int, default=None,
                         help="number of clusters")
    _add_common_flags(cluster)
    cluster.set_defaults(func=cmd_cluster)

    bench_cmd = sub.add_parser(
        "bench-synthetic", help="run a synthetic results table"
    )
    bench_cmd.add_argument("--table", choices=sorted(bench.TABLES),
                           required=True)
    bench_cmd.add_argument("--seeds", type=int, default=10)
    bench_cmd.add_argument("--n-per-cluster", dest="n_per_cluster",
                           type=int, default=200)
    bench_cmd.add_argument("--jobs", type=int, default=1,
                           help="seeds run on this many worker threads")
    bench_cmd.add_argument("--out", required=True, help="output directory")
    bench_cmd.add_argument("--accept-nonconverged",
                           dest="accept_nonconverged",
                           action="store_true", default=False)
    bench_cmd.set_defaults(func=cmd_bench_synthetic)

    loop = sub.add_parser(
        "active-loop", help="alternate label queries with re-clustering"
    )
    _add_input_flags(loop)
    loop.add_argument("--k", type=int, default=None)
    loop.add_argument("--oracle", choices=["ground-truth", "prompt"],
                      default="ground-truth")
    loop.add_argument("--budget-pct", dest="budget_pct", type=float,
                      default=1.0, help="percent of points queried per round")
    loop.add_argument("--rounds", type=int, default=1)
    loop.add_argument("--alpha", default="auto",
                      help="'auto' (labelled fraction) or a value in [0,1]")
    _add_common_flags(loop)
    loop.set_defaults(func=cmd_active_loop)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
