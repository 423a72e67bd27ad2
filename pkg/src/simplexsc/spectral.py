"""Coefficient-matrix assembly and normalized-cut spectral clustering.

Per-point simplex solutions are scattered into an N x N coefficient matrix,
symmetrized into a nonnegative affinity, embedded through the symmetric
normalized Laplacian, and partitioned with K-means on the row-normalized
eigenvector matrix.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


@dataclass
class ClusterAssignment:
    """A hard partition of N points into clusters labelled 1..n_clusters.

    Attributes
    ----------
    labels : (N,) ndarray of int
        Cluster ids, 1-based.
    n_clusters : int
        Number of clusters requested.
    extra_components : int
        How many connected components the affinity graph has beyond
        ``n_clusters``.  Zero for a connected (or mildly split) graph;
        positive values flag that K-means necessarily merged whole
        components, which callers may want to surface as a warning.
    inertia : float
        Final K-means objective of the winning restart, NaN when the
        assignment did not come from the spectral path.
    """

    labels: np.ndarray
    n_clusters: int
    extra_components: int = 0
    inertia: float = field(default=float("nan"))

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)

    def __len__(self):
        return self.labels.size

    @property
    def counts(self):
        """Points per cluster id, index 0 unused."""
        return np.bincount(self.labels, minlength=self.n_clusters + 1)


def coefficient_matrix(solutions, neighborhoods, size=None):
    """Scatter per-point coefficients into an N x N matrix.

    Row i holds the solution for anchor i placed at its member indices.
    Rows therefore sum to one and the diagonal is exactly zero (a point is
    never its own member).

    Parameters
    ----------
    solutions : sequence of SimplexSolution
    neighborhoods : sequence of Neighborhood
        Must align with ``solutions`` one-to-one.
    size : int, optional
        Number of points N; defaults to ``len(solutions)``.

    Returns
    -------
    (N, N) ndarray
    """
    if len(solutions) != len(neighborhoods):
        raise ValueError("one solution per neighborhood is required")
    n = len(solutions) if size is None else int(size)
    coeffs = np.zeros((n, n))
    for sol, nb in zip(solutions, neighborhoods):
        coeffs[nb.anchor, nb.members] = sol.beta
    return coeffs


def affinity_from_coefficients(coeffs):
    """Symmetrize a coefficient matrix into an affinity.

    Entrywise (|B| + |B^T|) / 2 with the diagonal forced to zero.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    affinity = 0.5 * (np.abs(coeffs) + np.abs(coeffs.T))
    np.fill_diagonal(affinity, 0.0)
    return affinity


def build_affinity(solutions, neighborhoods, size=None):
    """Affinity matrix straight from per-point solutions.

    Equivalent to ``affinity_from_coefficients(coefficient_matrix(...))``.
    """
    return affinity_from_coefficients(
        coefficient_matrix(solutions, neighborhoods, size=size)
    )


def laplacian_embedding(affinity, n_clusters):
    """Row-normalized bottom eigenvectors of the normalized Laplacian.

    Vertices with zero degree receive a unit self-loop before
    normalization so the degree scaling stays finite; they then behave as
    singleton components.

    Parameters
    ----------
    affinity : (N, N) ndarray
        Symmetric nonnegative weights.
    n_clusters : int
        Number of eigenvectors to keep.

    Returns
    -------
    embedding : (N, n_clusters) ndarray
        Eigenvectors for the ``n_clusters`` smallest eigenvalues, each row
        scaled to unit norm (zero rows cannot occur once isolates carry a
        self-loop).
    eigenvalues : (n_clusters,) ndarray
        The corresponding eigenvalues, inside [0, 2] up to roundoff.
    """
    a = np.array(affinity, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("affinity must be square")
    if not np.allclose(a, a.T, atol=1e-12):
        raise ValueError("affinity must be symmetric")
    n = a.shape[0]
    degrees = a.sum(axis=1)
    isolated = degrees <= 0.0
    if isolated.any():
        idx = np.nonzero(isolated)[0]
        a[idx, idx] = 1.0
        degrees[idx] = 1.0
    inv_sqrt = 1.0 / np.sqrt(degrees)
    lap = -a * inv_sqrt[:, None] * inv_sqrt[None, :]
    lap[np.diag_indices(n)] += 1.0
    lap = 0.5 * (lap + lap.T)
    eigenvalues, vectors = scipy.linalg.eigh(
        lap, subset_by_index=[0, n_clusters - 1]
    )
    row_norms = np.linalg.norm(vectors, axis=1)
    row_norms[row_norms == 0.0] = 1.0
    return vectors / row_norms[:, None], eigenvalues


def _plus_plus_centers(points, n_clusters, rng):
    """K-means++ seeding: spread the initial centers by sampling each new
    center with probability proportional to squared distance from the
    chosen ones."""
    n = points.shape[0]
    centers = np.empty((n_clusters, points.shape[1]))
    first = int(rng.integers(n))
    centers[0] = points[first]
    closest = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, n_clusters):
        total = closest.sum()
        if total <= 0.0:
            # all points coincide with a chosen center; any pick works
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=closest / total))
        centers[c] = points[pick]
        dist = ((points - centers[c]) ** 2).sum(axis=1)
        np.minimum(closest, dist, out=closest)
    return centers


def _lloyd(points, centers, max_iter):
    """Alternate assignment and mean updates until labels stop changing.

    Returns (labels, centers, inertia, trace) where trace holds the
    objective after every assignment step.
    """
    n, _ = points.shape
    n_clusters = centers.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    trace = []
    for _ in range(max_iter):
        sq = (
            (points**2).sum(axis=1)[:, None]
            - 2.0 * points @ centers.T
            + (centers**2).sum(axis=1)[None, :]
        )
        new_labels = np.argmin(sq, axis=1)
        inertia = float(np.maximum(sq[np.arange(n), new_labels], 0.0).sum())
        trace.append(inertia)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(n_clusters):
            mask = labels == c
            if mask.any():
                centers[c] = points[mask].mean(axis=0)
            else:
                # revive an empty cluster at the worst-explained point
                worst = int(np.argmax(sq[np.arange(n), labels]))
                centers[c] = points[worst]
    return labels, centers, trace[-1], trace


def kmeans(points, n_clusters, restarts=20, max_iter=300, seed=None):
    """K-means with K-means++ seeding and multiple restarts.

    Parameters
    ----------
    points : (N, d) ndarray
    n_clusters : int
    restarts : int
        Independent seedings; the lowest-inertia run wins.
    max_iter : int
        Lloyd iteration cap per restart.
    seed : int or numpy Generator, optional

    Returns
    -------
    labels : (N,) ndarray of int
        0-based cluster indices.
    centers : (n_clusters, d) ndarray
    inertia : float
        Sum of squared distances to assigned centers.
    trace : list of float
        Objective per iteration of the winning restart, nonincreasing.
    """
    points = np.asarray(points, dtype=np.float64)
    if n_clusters < 1 or n_clusters > points.shape[0]:
        raise ValueError("n_clusters must be in [1, N]")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, int(restarts))):
        centers = _plus_plus_centers(points, n_clusters, rng)
        result = _lloyd(points, centers, max_iter)
        if best is None or result[2] < best[2]:
            best = result
    return best


def count_components(affinity):
    """Connected components of the positive-weight graph."""
    graph = csr_matrix(np.asarray(affinity) > 0.0)
    n_comp, _ = connected_components(graph, directed=False)
    return int(n_comp)


def spectral_cluster(affinity, n_clusters, restarts=20, seed=None):
    """Normalized-cut spectral clustering of an affinity matrix.

    Embeds the graph through the symmetric normalized Laplacian, keeps the
    eigenvectors of the ``n_clusters`` smallest eigenvalues, scales rows to
    unit norm and runs restarted K-means on them.

    Parameters
    ----------
    affinity : (N, N) ndarray
        Symmetric nonnegative weights, zero diagonal.
    n_clusters : int
        Must satisfy 2 <= n_clusters <= N.
    restarts, seed
        Passed to :func:`kmeans`.

    Returns
    -------
    ClusterAssignment
        Labels are 1-based.  When the graph splits into more components
        than clusters, rows of one component share an embedding row, so
        the partition is a merge of whole components and
        ``extra_components`` records the excess.
    """
    affinity = np.asarray(affinity, dtype=np.float64)
    n = affinity.shape[0]
    if n_clusters < 2:
        raise ValueError("need at least two clusters")
    if n_clusters > n:
        raise ValueError("more clusters than points")
    embedding, _ = laplacian_embedding(affinity, n_clusters)
    labels, _, inertia, _ = kmeans(
        embedding, n_clusters, restarts=restarts, seed=seed
    )
    extra = max(0, count_components(affinity) - n_clusters)
    return ClusterAssignment(
        labels=labels + 1,
        n_clusters=n_clusters,
        extra_components=extra,
        inertia=inertia,
    )
