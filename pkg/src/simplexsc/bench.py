"""Experiment harness: synthetic sweeps, aggregation, and persistence.

Each experiment clusters freshly generated data over a list of seeds and
aggregates the per-seed accuracies.  Results persist as one JSON document
per experiment (config, per-seed metrics, aggregates, build identifier)
plus a flat CSV of the per-seed rows.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import datasets, metrics, pipeline


@dataclass
class ExperimentConfig:
    """One synthetic experiment: a generator setting plus pipeline knobs.

    ``kind`` selects the generator: 'two_subspaces' uses ``theta``,
    ``dims`` and a pair of clusters; 'k_subspaces' uses ``n_clusters``
    equal-dimension random subspaces of dimension ``dim``.
    """

    name: str
    kind: str = "two_subspaces"
    theta: float = 60.0
    sigma: float = 0.01
    dims: tuple = (1, 1)
    n_clusters: int = 2
    dim: int = 2
    ambient: int = 3
    n_per_cluster: int = 200
    seeds: tuple = tuple(range(10))
    pipeline: pipeline.Config = field(default_factory=pipeline.Config)

    def __post_init__(self):
        if self.kind not in ("two_subspaces", "k_subspaces"):
            raise ValueError(f"unknown generator kind: {self.kind}")
        self.dims = tuple(self.dims)
        self.seeds = tuple(int(s) for s in self.seeds)

    def make_data(self, seed):
        if self.kind == "two_subspaces":
            return datasets.generate_two_subspaces(
                self.theta,
                self.sigma,
                self.n_per_cluster,
                dims=self.dims,
                ambient=self.ambient,
                seed=seed,
            )
        return datasets.generate_k_subspaces(
            self.n_clusters,
            self.dim,
            self.ambient,
            self.n_per_cluster,
            self.sigma,
            seed=seed,
        )

    @property
    def cluster_count(self):
        return 2 if self.kind == "two_subspaces" else self.n_clusters

    def to_dict(self):
        snapshot = dataclasses.asdict(self)
        snapshot["dims"] = list(self.dims)
        snapshot["seeds"] = list(self.seeds)
        return snapshot

    @classmethod
    def from_dict(cls, payload):
        payload = dict(payload)
        payload["pipeline"] = pipeline.Config(**payload["pipeline"])
        return cls(**payload)


@dataclass
class ExperimentResult:
    """Aggregated outcome of one experiment, JSON-serializable as-is."""

    name: str
    config: dict
    per_seed: list
    median_accuracy: float
    std_accuracy: float
    total_runtime: float
    build: str

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, payload):
        return cls(**payload)


def build_identifier():
    """Git description of the working tree, or 'unknown' outside a repo."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=10,
        )
    except (OSError, subprocess.TimeoutExpired):
        return "unknown"
    if out.returncode != 0:
        return "unknown"
    return out.stdout.strip() or "unknown"


def _run_seed(config, seed):
    data = config.make_data(seed)
    cfg = config.pipeline.replace(seed=seed, n_clusters=config.cluster_count)
    outcome = pipeline.cluster_cloud(data.points, cfg)
    return {
        "seed": int(seed),
        "accuracy": metrics.accuracy(outcome.assignment, data.labels),
        "runtime": outcome.runtime,
        "rejected": len(outcome.rejected),
    }


def run_experiment(config, jobs=1):
    """Cluster fresh data per seed and aggregate the accuracies.

    The per-seed pipeline seed is the data seed, so reruns reproduce
    both the data and the spectral stage exactly.  Seeds are mutually
    independent; with ``jobs`` > 1 they run on a thread pool and only
    the aggregation below touches shared state.
    """
    start = time.perf_counter()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_seed = list(
                pool.map(lambda s: _run_seed(config, s), config.seeds)
            )
    else:
        per_seed = [_run_seed(config, seed) for seed in config.seeds]
    accuracies = np.array([row["accuracy"] for row in per_seed])
    return ExperimentResult(
        name=config.name,
        config=config.to_dict(),
        per_seed=per_seed,
        median_accuracy=float(np.median(accuracies)),
        std_accuracy=float(np.std(accuracies)),
        total_runtime=time.perf_counter() - start,
        build=build_identifier(),
    )


def save_result(result, json_path, csv_path=None):
    """Persist a result as JSON, optionally with a per-seed CSV."""
    with open(json_path, "w") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["seed", "accuracy", "runtime", "rejected"]
            )
            writer.writeheader()
            writer.writerows(result.per_seed)


def load_result(json_path):
    with open(json_path) as fh:
        return ExperimentResult.from_dict(json.load(fh))


def angle_table(seeds=tuple(range(10)), n_per_cluster=200):
    """Two 1-D lines in R^3 at angles 10..60 degrees, light noise."""
    return [
        ExperimentConfig(
            name=f"angle-{int(theta)}",
            kind="two_subspaces",
            theta=theta,
            sigma=0.01,
            dims=(1, 1),
            n_per_cluster=n_per_cluster,
            seeds=seeds,
            pipeline=pipeline.Config(knn=10, rho=0.01, xi=1e-4),
        )
        for theta in (10.0, 20.0, 30.0, 40.0, 50.0, 60.0)
    ]


def noise_table(seeds=tuple(range(10)), n_per_cluster=200):
    """A line and a plane at 60 degrees under growing noise."""
    return [
        ExperimentConfig(
            name=f"noise-{sigma:.1f}",
            kind="two_subspaces",
            theta=60.0,
            sigma=sigma,
            dims=(1, 2),
            n_per_cluster=n_per_cluster,
            seeds=seeds,
            pipeline=pipeline.Config(knn=10, rho=0.01, xi=1e-4),
        )
        for sigma in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
    ]


def dims_table(seeds=tuple(range(10)), n_per_cluster=200):
    """Four random subspaces in R^20 with growing dimension."""
    return [
        ExperimentConfig(
            name=f"dims-{dim}",
            kind="k_subspaces",
            n_clusters=4,
            dim=dim,
            ambient=20,
            sigma=0.01,
            n_per_cluster=n_per_cluster,
            seeds=seeds,
            pipeline=pipeline.Config(knn=50, rho=0.01, xi=1e-4),
        )
        for dim in (2, 4, 6, 8, 10, 12, 14, 16)
    ]


TABLES = {
    "angles": angle_table,
    "noise": noise_table,
    "dims": dims_table,
}
