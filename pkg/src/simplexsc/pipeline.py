"""End-to-end clustering pipeline.

Normalizes the data, solves one simplex program per point, assembles the
affinity and runs spectral clustering.  The per-point solves follow an
accept-iff-certified policy: the best iterate is always used, but any
point whose first-order certificate fails at the configured tolerance is
recorded as rejected so callers can surface the failure.
"""

import dataclasses
import time
from dataclasses import dataclass
from typing import NamedTuple, Optional

from . import geometry, simplex_qp, spectral
from .errors import NotConverged


@dataclass
class Config:
    """Knobs for the full pipeline.

    Attributes
    ----------
    n_clusters : int
        Number of clusters to extract.
    knn : int
        Neighborhood size per anchor.
    rho : float
        Sparsity penalty strength.
    xi : float
        Ridge strength; keep positive for strict convexity.
    tol, max_iter, kkt_tol : float, int, float
        Solver step tolerance, iteration budget, certificate tolerance.
    restarts : int
        K-means restarts inside spectral clustering.
    seed : int, optional
        Seed threaded to every randomized stage.
    dim : int, optional
        Subspace dimension for refinement stages; None leaves refinement
        callers to choose.
    center : bool
        Mean-center data before subspace fits.
    query_mode : str
        'exact' or 'approx' active-learning utilities.
    accept_nonconverged : bool
        Treat certificate failures as fatal (False) or tolerated (True)
        when a caller turns the rejected list into an exit status.
    """

    n_clusters: int = 2
    knn: int = 10
    rho: float = 0.01
    xi: float = 1e-4
    tol: float = 1e-8
    max_iter: int = 10_000
    kkt_tol: float = 1e-6
    restarts: int = 20
    seed: Optional[int] = None
    dim: Optional[int] = None
    center: bool = False
    query_mode: str = "exact"
    accept_nonconverged: bool = False

    def replace(self, **updates):
        return dataclasses.replace(self, **updates)

    @classmethod
    def from_mapping(cls, mapping):
        """Build a Config from string-keyed values, coercing types.

        Unknown keys raise, so typos in config files fail loudly.
        """
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            if key not in fields:
                raise ValueError(f"unknown config key: {key}")
            kwargs[key] = _coerce(value, fields[key].type)
        return cls(**kwargs)


def _coerce(value, annotation):
    if value is None or not isinstance(value, str):
        return value
    text = value.strip()
    if annotation in ("int", int):
        return int(text)
    if annotation in ("float", float):
        return float(text)
    if annotation in ("bool", bool):
        lowered = text.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if annotation in ("Optional[int]", Optional[int]):
        return None if text.lower() in ("none", "") else int(text)
    return text


class PipelineResult(NamedTuple):
    cloud: object
    neighborhoods: list
    solutions: list
    rejected: list
    affinity: object
    assignment: object
    runtime: float


def solve_all(neighborhoods, unit_points, config):
    """Solve the per-anchor programs for every neighborhood.

    Non-converged solves contribute their best iterate; every solution
    whose certificate fails at ``config.kkt_tol`` lands on the rejected
    list by anchor index.

    Returns
    -------
    (solutions, rejected) : (list of SimplexSolution, list of int)
    """
    solutions = []
    rejected = []
    for nb in neighborhoods:
        problem = simplex_qp.assemble(
            nb, unit_points[nb.anchor], config.rho, config.xi
        )
        try:
            sol = simplex_qp.solve(
                problem,
                tol=config.tol,
                max_iter=config.max_iter,
                kkt_tol=config.kkt_tol,
            )
        except NotConverged as exc:
            sol = exc.best
        if not sol.certificate.passing:
            rejected.append(nb.anchor)
        solutions.append(sol)
    return solutions, rejected


def cluster_cloud(points, config):
    """Run the full pipeline on raw points.

    Returns
    -------
    PipelineResult
        Carries every intermediate product so callers can audit solves,
        reuse neighborhoods, or feed refinement stages.
    """
    start = time.perf_counter()
    cloud = geometry.normalize(points)
    neighborhoods = geometry.build_all_neighborhoods(cloud, config.knn)
    solutions, rejected = solve_all(neighborhoods, cloud.normalized, config)
    affinity = spectral.build_affinity(
        solutions, neighborhoods, size=len(cloud)
    )
    assignment = spectral.spectral_cluster(
        affinity,
        config.n_clusters,
        restarts=config.restarts,
        seed=config.seed,
    )
    runtime = time.perf_counter() - start
    return PipelineResult(
        cloud=cloud,
        neighborhoods=neighborhoods,
        solutions=solutions,
        rejected=rejected,
        affinity=affinity,
        assignment=assignment,
        runtime=runtime,
    )
