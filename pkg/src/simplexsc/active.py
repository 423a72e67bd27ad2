"""Label querying and the constrained clustering round.

Query selection scores every unlabelled point by how much total
reconstruction error would drop if its label moved it between clusters.
Obtained labels then reshape the per-pair dissimilarities, the simplex
programs are re-solved, and the spectral result is refined under the
label constraints.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

from . import geometry, pipeline, spectral, subspace
from .errors import BudgetExceedsUnlabelled


@dataclass
class ConstraintStore:
    """Labels gathered so far plus the querying policy knobs.

    Attributes
    ----------
    known : dict
        Point index -> class label.
    queried_order : list
        Indices in the order they were queried; a subset of ``known``
        (labels supplied up front never appear here).
    alpha : float, optional
        Additive penalty for pairs believed to lie in different clusters,
        inside [0, 1].  None selects the labelled fraction automatically.
    budget_per_round : int
        Number of points to query per round.
    """

    known: dict = field(default_factory=dict)
    queried_order: list = field(default_factory=list)
    alpha: Optional[float] = None
    budget_per_round: int = 1

    def __post_init__(self):
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.budget_per_round < 1:
            raise ValueError("budget_per_round must be positive")
        if len(set(self.queried_order)) != len(self.queried_order):
            raise ValueError("queried_order contains duplicates")
        missing = [i for i in self.queried_order if i not in self.known]
        if missing:
            raise ValueError(f"queried points without labels: {missing}")

    def effective_alpha(self, n_points):
        if self.alpha is not None:
            return self.alpha
        return len(self.known) / n_points

    def add(self, index, label):
        index = int(index)
        if index in self.known:
            raise ValueError(f"point {index} is already labelled")
        self.known[index] = int(label)
        self.queried_order.append(index)

    def copy(self):
        return ConstraintStore(
            known=dict(self.known),
            queried_order=list(self.queried_order),
            alpha=self.alpha,
            budget_per_round=self.budget_per_round,
        )


@dataclass
class ClusterState:
    """Assignment plus fitted bases carried between rounds."""

    labels: np.ndarray
    bases: list

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)

    @property
    def n_clusters(self):
        return len(self.bases)


@dataclass
class QueryUtility:
    """Expected error movement for labelling one point.

    ``u1`` is the drop in its current cluster's reconstruction error if
    the point leaves, ``u2`` the rise in the runner-up cluster's error if
    it joins, and ``score = u1 - u2`` ranks the queries.
    """

    point: int
    u1: float
    u2: float
    score: float


class RoundResult(NamedTuple):
    state: ClusterState
    store: ConstraintStore
    diagnostics: dict


def state_from_labels(points, labels, n_clusters, dim, center=False):
    """Fit per-cluster bases to an existing assignment."""
    labels = np.asarray(labels, dtype=np.int64)
    bases = subspace._fit_all(points, labels, n_clusters, dim, center)
    return ClusterState(labels=labels, bases=bases)


def _scatter_error(scatter, dim):
    """Total squared residual of a point set against its best fit.

    Equals trace minus the top-``dim`` eigenvalue mass of the scatter
    matrix; clipped at zero to absorb roundoff.
    """
    trace = float(np.trace(scatter))
    ambient = scatter.shape[0]
    if dim >= ambient:
        return 0.0
    top = scipy.linalg.eigh(
        scatter, eigvals_only=True, subset_by_index=[ambient - dim, ambient - 1]
    )
    return max(0.0, trace - float(top.sum()))


def compute_utilities(points, state, store, mode="exact"):
    """Query utilities for every unlabelled point, ascending index order.

    The runner-up cluster is the nearest one other than the point's own
    (which coincides with the second nearest whenever the point sits in
    its nearest cluster, the steady state after a refinement step).

    ``exact`` refits each affected cluster with the point removed or
    added through the scatter-matrix eigenvalues.  ``approx`` keeps the
    current bases, which is the first-order expansion of the same
    quantities: to first order a removal lowers the error mass by the
    point's residual against the unperturbed basis, an insertion raises
    it by the same measure.
    """
    if mode not in ("exact", "approx"):
        raise ValueError("mode must be 'exact' or 'approx'")
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    n_clusters = state.n_clusters
    if n_clusters < 2:
        raise ValueError("need at least two clusters to rank queries")
    residuals = subspace.residual_matrix(points, state.bases)
    unlabelled = [i for i in range(n) if i not in store.known]
    dim = state.bases[0].dim

    scatters = []
    errors = []
    if mode == "exact":
        for k in range(1, n_clusters + 1):
            members = points[state.labels == k]
            scatter = members.T @ members
            scatters.append(scatter)
            errors.append(_scatter_error(scatter, dim))

    utilities = []
    for i in unlabelled:
        own = int(state.labels[i]) - 1
        row = residuals[i].copy()
        row[own] = np.inf
        runner_up = int(np.argmin(row))
        if mode == "approx":
            u1 = float(residuals[i, own])
            u2 = float(residuals[i, runner_up])
        else:
            x = points[i]
            outer = np.outer(x, x)
            u1 = errors[own] - _scatter_error(scatters[own] - outer, dim)
            u2 = _scatter_error(scatters[runner_up] + outer, dim) - errors[
                runner_up
            ]
        utilities.append(
            QueryUtility(point=i, u1=u1, u2=u2, score=u1 - u2)
        )
    return utilities


def select_queries(points, state, store, budget=None, mode="exact"):
    """The ``budget`` unlabelled points with the highest query scores.

    Ties break toward the lower point index.

    Raises
    ------
    BudgetExceedsUnlabelled
        When the budget outnumbers the unlabelled points.
    """
    budget = store.budget_per_round if budget is None else int(budget)
    utilities = compute_utilities(points, state, store, mode=mode)
    if budget > len(utilities):
        raise BudgetExceedsUnlabelled(
            f"budget {budget} exceeds {len(utilities)} unlabelled points"
        )
    ranked = sorted(utilities, key=lambda u: (-u.score, u.point))
    return [u.point for u in ranked[:budget]]


def pair_dissimilarity(d, i, j, known, previous_labels, alpha):
    """Label-aware update of one pairwise dissimilarity.

    Both labelled and agreeing: shrink by e.  Both labelled and
    disagreeing: grow by e plus the alpha offset.  Any unlabelled side:
    add alpha only when the previous round separated the pair.
    """
    li = known.get(i)
    lj = known.get(j)
    if li is not None and lj is not None:
        if li == lj:
            return d / math.e
        return d * math.e + alpha
    if previous_labels is not None and previous_labels[i] != previous_labels[j]:
        return d + alpha
    return d


def update_dissimilarities(neighborhoods, store, previous_labels, alpha=None):
    """Rebuild every neighborhood with label-updated weights.

    Membership is untouched so added penalties cannot evict neighbors;
    members are re-sorted by their new weight (ties by index) to keep the
    nondecreasing-weight invariant the solver relies on.
    """
    if previous_labels is not None:
        previous_labels = np.asarray(previous_labels)
    if alpha is None:
        size = len(neighborhoods)
        alpha = store.effective_alpha(size)
    updated = []
    for nb in neighborhoods:
        new_weights = np.array(
            [
                pair_dissimilarity(
                    float(d), nb.anchor, int(j), store.known,
                    previous_labels, alpha,
                )
                for d, j in zip(nb.weights, nb.members)
            ]
        )
        order = np.lexsort((nb.members, new_weights))
        updated.append(
            geometry.Neighborhood(
                anchor=nb.anchor,
                members=nb.members[order],
                weights=new_weights[order],
                stretched=nb.stretched[:, order].copy(),
            )
        )
    return updated


def constrained_round(points, config, store, previous, oracle=None, base=None):
    """One query-update-resolve-cluster round.

    Queries ``store.budget_per_round`` labels through ``oracle`` (skipped
    when ``oracle`` is None, the purely constrained mode), updates the
    dissimilarities, re-solves every simplex program, reclusters
    spectrally, and, when any labels exist, refines under the constraints
    so the returned assignment satisfies all of them.  The input ``store``
    is never mutated: the updated copy comes back in the result, so a
    failed round leaves the caller's state untouched.

    Parameters
    ----------
    points : (N, P) ndarray
    config : pipeline.Config
        ``config.dim`` must be set (subspace dimension for refinement and
        for the bases carried to the next round).
    store : ConstraintStore
    previous : ClusterState
        State from the previous round (or from the plain pipeline).
    oracle : callable, optional
        Maps a point index to its class label.
    base : (PointCloud, list of Neighborhood), optional
        Precomputed base geometry to reuse across rounds.

    Returns
    -------
    RoundResult
    """
    points = np.asarray(points, dtype=np.float64)
    if config.dim is None:
        raise ValueError("config.dim is required for constrained rounds")
    if base is None:
        cloud = geometry.normalize(points)
        neighborhoods = geometry.build_all_neighborhoods(cloud, config.knn)
    else:
        cloud, neighborhoods = base
    store = store.copy()

    queried = []
    if oracle is not None:
        queried = select_queries(
            points, previous, store, mode=config.query_mode
        )
        for i in queried:
            store.add(i, oracle(i))

    alpha = store.effective_alpha(len(cloud))
    reweighted = update_dissimilarities(
        neighborhoods, store, previous.labels, alpha
    )
    solutions, rejected = pipeline.solve_all(
        reweighted, cloud.normalized, config
    )
    affinity = spectral.build_affinity(
        solutions, reweighted, size=len(cloud)
    )
    clustered = spectral.spectral_cluster(
        affinity,
        config.n_clusters,
        restarts=config.restarts,
        seed=config.seed,
    )

    refinement_objectives = []
    if store.known:
        refined = subspace.kscc(
            points,
            config.n_clusters,
            config.dim,
            clustered.labels,
            store.known,
            center=config.center,
        )
        labels = refined.assignment.labels
        bases = refined.bases
        refinement_objectives = refined.objectives
    else:
        labels = clustered.labels
        bases = subspace._fit_all(
            points, labels, config.n_clusters, config.dim, config.center
        )

    diagnostics = {
        "queried": [int(i) for i in queried],
        "n_labelled": len(store.known),
        "alpha": alpha,
        "rejected_solves": len(rejected),
        "spectral_inertia": clustered.inertia,
        "extra_components": clustered.extra_components,
        "refinement_objectives": refinement_objectives,
        "constraints_satisfied": _constraints_satisfied(labels, store.known),
    }
    state = ClusterState(labels=labels, bases=bases)
    return RoundResult(state=state, store=store, diagnostics=diagnostics)


def _constraints_satisfied(labels, known):
    """True when equal classes share clusters and unequal ones never do."""
    items = list(known.items())
    for a in range(len(items)):
        i, ci = items[a]
        for b in range(a + 1, len(items)):
            j, cj = items[b]
            if (labels[i] == labels[j]) != (ci == cj):
                return False
    return True
