"""Principal-direction subspace fitting and alternating subspace clustering.

Clusters are modelled as linear subspaces through the origin.  A basis is
the top principal directions of the uncentered data matrix, membership is
by smallest reconstruction error, and the constrained variant forces
points of known class into a common cluster through an optimal
class-to-cluster matching recomputed every iteration.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateCluster, InfeasibleLabels
from .spectral import ClusterAssignment


@dataclass
class SubspaceBasis:
    """Orthonormal basis of one cluster's fitted subspace.

    Attributes
    ----------
    basis : (P, dim) ndarray
        Orthonormal columns spanning the subspace.
    cluster : int
        1-based id of the cluster the basis was fitted on.
    dim : int
        Subspace dimension.
    """

    basis: np.ndarray
    cluster: int
    dim: int


@dataclass
class ReconstructionReport:
    """Squared residuals of points against their assigned subspaces."""

    per_point: np.ndarray
    total: float


class KscResult(NamedTuple):
    assignment: ClusterAssignment
    bases: list
    objectives: list


class KsccResult(NamedTuple):
    assignment: ClusterAssignment
    bases: list
    mapping: dict
    objectives: list


def fit_basis(points, dim, cluster=0, center=False):
    """Top principal directions of a cluster's points.

    The data matrix is not mean-centered by default: the subspaces pass
    through the origin, so the directions come straight from the singular
    vectors of the raw matrix.  ``center=True`` subtracts the mean before
    the decomposition for data that calls for affine subspaces.

    Parameters
    ----------
    points : (n, P) ndarray
    dim : int
        Subspace dimension, 1 <= dim <= P.
    cluster : int
        Id recorded on the result.
    center : bool
        Subtract the column mean before the decomposition.

    Returns
    -------
    SubspaceBasis

    Raises
    ------
    DegenerateCluster
        If the cluster holds fewer than ``dim`` points.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("expected a 2-d array of row points")
    n, ambient = points.shape
    if not 1 <= dim <= ambient:
        raise ValueError("dim must lie in [1, ambient dimension]")
    if n < dim:
        raise DegenerateCluster(cluster, n)
    if center:
        points = points - points.mean(axis=0)
    _, _, vt = np.linalg.svd(points, full_matrices=False)
    return SubspaceBasis(basis=vt[:dim].T.copy(), cluster=cluster, dim=dim)


def _basis_array(basis):
    return basis.basis if isinstance(basis, SubspaceBasis) else np.asarray(basis)


def residual_matrix(points, bases):
    """Squared distance of every point to every subspace.

    Returns
    -------
    (N, K) ndarray with entry (i, k) = ||x_i - V_k V_k^T x_i||^2.
    """
    points = np.asarray(points, dtype=np.float64)
    out = np.empty((points.shape[0], len(bases)))
    for k, basis in enumerate(bases):
        v = _basis_array(basis)
        flat = points - (points @ v) @ v.T
        out[:, k] = (flat**2).sum(axis=1)
    return out


def reconstruction_error(points, bases, labels):
    """Residual of each point against its assigned cluster's subspace.

    Parameters
    ----------
    points : (N, P) ndarray
    bases : sequence of SubspaceBasis or (P, dim) ndarray
        Element k serves cluster id k+1.
    labels : (N,) array of int
        1-based cluster ids.

    Returns
    -------
    ReconstructionReport
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 1 or labels.max() > len(bases):
        raise ValueError("labels must be 1-based cluster ids")
    residuals = residual_matrix(points, bases)
    per_point = residuals[np.arange(labels.size), labels - 1]
    return ReconstructionReport(per_point=per_point, total=float(per_point.sum()))


def _dims_per_cluster(dim, n_clusters):
    """Broadcast a scalar dimension, or validate one entry per cluster."""
    if np.isscalar(dim):
        return [int(dim)] * n_clusters
    dims = [int(d) for d in dim]
    if len(dims) != n_clusters:
        raise ValueError(
            f"got {len(dims)} dimensions for {n_clusters} clusters"
        )
    return dims


def _fit_all(points, labels, n_clusters, dim, center):
    dims = _dims_per_cluster(dim, n_clusters)
    bases = []
    for k in range(1, n_clusters + 1):
        members = points[labels == k]
        bases.append(
            fit_basis(members, dims[k - 1], cluster=k, center=center)
        )
    return bases


def _repair_empty(labels, residuals, n_clusters, protected=None):
    """Reseed each empty cluster with the worst-explained point.

    ``protected`` marks points that must keep their cluster (labelled
    points in the constrained variant).  Returns the repaired labels and
    the number of reseeds performed.
    """
    n = labels.size
    movable = np.ones(n, dtype=bool)
    if protected is not None:
        movable[protected] = False
    repairs = 0
    for k in range(1, n_clusters + 1):
        if np.any(labels == k):
            continue
        current = residuals[np.arange(n), labels - 1].copy()
        current[~movable] = -np.inf
        worst = int(np.argmax(current))
        labels[worst] = k
        movable[worst] = False
        repairs += 1
    return labels, repairs


def ksc(points, n_clusters, dim, init_labels, max_iter=100, center=False):
    """Alternating subspace clustering.

    Alternates between fitting a basis per cluster and reassigning every
    point to its nearest subspace, until the assignment stops changing or
    ``max_iter`` is hit.  The logged objective is the total reconstruction
    error evaluated after each reassignment; it is nonincreasing.

    Parameters
    ----------
    points : (N, P) ndarray
    n_clusters : int
    dim : int or sequence of int
        Common subspace dimension, or one dimension per cluster id.
    init_labels : (N,) array of int
        1-based starting assignment covering every cluster id.
    max_iter : int
    center : bool
        Passed through to :func:`fit_basis`.

    Returns
    -------
    KscResult
        ``assignment`` (1-based labels), ``bases`` and the logged
        ``objectives``.

    Raises
    ------
    DegenerateCluster
        When some cluster shrinks below ``dim`` points.
    """
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(init_labels, dtype=np.int64).copy()
    if labels.size != points.shape[0]:
        raise ValueError("one init label per point is required")
    if labels.min() < 1 or labels.max() > n_clusters:
        raise ValueError("init labels must be 1-based cluster ids")
    objectives = []
    bases = _fit_all(points, labels, n_clusters, dim, center)
    for _ in range(max_iter):
        residuals = residual_matrix(points, bases)
        new_labels = np.argmin(residuals, axis=1).astype(np.int64) + 1
        objectives.append(float(residuals.min(axis=1).sum()))
        new_labels, _ = _repair_empty(new_labels, residuals, n_clusters)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        bases = _fit_all(points, labels, n_clusters, dim, center)
    assignment = ClusterAssignment(labels=labels, n_clusters=n_clusters)
    return KscResult(assignment=assignment, bases=bases, objectives=objectives)


def _class_index(known_labels, n_clusters):
    """Distinct class values in sorted order, validated against K."""
    classes = sorted({int(v) for v in known_labels.values()})
    if len(classes) > n_clusters:
        raise InfeasibleLabels(
            f"{len(classes)} distinct labels exceed {n_clusters} clusters"
        )
    return classes


def _optimal_mapping(residuals, known_labels, classes):
    """Class-to-cluster matching minimizing labelled reconstruction cost.

    The labelled cost is additive over classes, so the minimum over all
    permutations is a linear assignment on the per-class cost matrix.
    """
    cost = np.zeros((len(classes), residuals.shape[1]))
    for row, cls in enumerate(classes):
        idx = [i for i, v in known_labels.items() if int(v) == cls]
        cost[row] = residuals[idx].sum(axis=0)
    rows, cols = linear_sum_assignment(cost)
    mapping = {classes[r]: int(c) + 1 for r, c in zip(rows, cols)}
    return mapping, float(cost[rows, cols].sum())


def kscc(
    points,
    n_clusters,
    dim,
    init_labels,
    known_labels,
    max_iter=100,
    center=False,
):
    """Alternating subspace clustering with class-label constraints.

    Each iteration fits bases on the current clusters, matches known
    classes to clusters by minimum labelled reconstruction cost, forces
    labelled points into their matched cluster, and sends unlabelled
    points to their nearest subspace.  Every iterate therefore satisfies
    all label constraints, and the logged objective

        0.5 * (unlabelled nearest-subspace error + matched labelled error)

    is nonincreasing.

    Parameters
    ----------
    points : (N, P) ndarray
    n_clusters, dim, init_labels, max_iter, center
        As in :func:`ksc`.
    known_labels : dict
        Point index -> class label.  Empty dict reduces to :func:`ksc`
        up to the constant factor in the logged objective.

    Returns
    -------
    KsccResult
        ``mapping`` is the final class -> cluster dictionary.

    Raises
    ------
    InfeasibleLabels
        More distinct classes than clusters.
    DegenerateCluster
        Propagated from basis fitting.
    """
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(init_labels, dtype=np.int64).copy()
    if labels.size != points.shape[0]:
        raise ValueError("one init label per point is required")
    if labels.min() < 1 or labels.max() > n_clusters:
        raise ValueError("init labels must be 1-based cluster ids")
    known_labels = {int(i): int(v) for i, v in known_labels.items()}
    classes = _class_index(known_labels, n_clusters)
    labelled = np.array(sorted(known_labels), dtype=np.int64)
    unlabelled_mask = np.ones(labels.size, dtype=bool)
    if labelled.size:
        unlabelled_mask[labelled] = False
    objectives = []
    mapping = {}
    bases = _fit_all(points, labels, n_clusters, dim, center)
    for _ in range(max_iter):
        residuals = residual_matrix(points, bases)
        if classes:
            mapping, labelled_cost = _optimal_mapping(
                residuals, known_labels, classes
            )
        else:
            labelled_cost = 0.0
        new_labels = np.argmin(residuals, axis=1).astype(np.int64) + 1
        for i in labelled:
            new_labels[i] = mapping[known_labels[int(i)]]
        unlabelled_cost = float(
            residuals[unlabelled_mask].min(axis=1).sum()
        ) if unlabelled_mask.any() else 0.0
        objectives.append(0.5 * (unlabelled_cost + labelled_cost))
        new_labels, _ = _repair_empty(
            new_labels, residuals, n_clusters, protected=labelled
        )
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        bases = _fit_all(points, labels, n_clusters, dim, center)
    assignment = ClusterAssignment(labels=labels, n_clusters=n_clusters)
    return KsccResult(
        assignment=assignment, bases=bases, mapping=mapping, objectives=objectives
    )
