"""Sphere geometry feeding the per-point representation problems.

Points are scaled to the unit sphere, similarity between two points is the
absolute cosine of their angle, and each anchor sees its neighbors through
a "stretch" onto the anchor's tangent hyperplane: member j is rescaled so
that its inner product with the anchor equals one.  Nearness is measured by
the inverse absolute cosine, which on the tangent hyperplane is a monotone
function of the Euclidean distance to the anchor.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyNeighborhood, OrthogonalPoint, ZeroNormPoint

ZERO_NORM_TOL = 1e-14
ORTHO_TOL = 1e-12


@dataclass
class PointCloud:
    """Raw data together with its unit-sphere version.

    Attributes
    ----------
    data : (N, P) ndarray
        Original points, one per row.
    norms : (N,) ndarray
        Euclidean row norms, all positive.
    normalized : (N, P) ndarray
        Rows of ``data`` scaled to unit norm.
    """

    data: np.ndarray
    norms: np.ndarray
    normalized: np.ndarray

    def __len__(self):
        return self.data.shape[0]

    @property
    def ambient_dim(self):
        return self.data.shape[1]


@dataclass
class Neighborhood:
    """The anchor's selected members, stretched onto its tangent hyperplane.

    Members are ordered by nondecreasing weight (ties broken by original
    index), ``stretched[:, j]`` is the j-th member after stretching, and
    ``weights[j]`` its inverse-absolute-cosine dissimilarity to the anchor.
    """

    anchor: int
    members: np.ndarray
    weights: np.ndarray
    stretched: np.ndarray

    @property
    def size(self):
        return self.members.size


def normalize(points):
    """Scale each row of ``points`` to the unit sphere.

    Parameters
    ----------
    points : (N, P) array_like

    Returns
    -------
    PointCloud

    Raises
    ------
    ZeroNormPoint
        If some row has norm below 1e-14 (its direction is undefined).
    """
    data = np.ascontiguousarray(points, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("expected a 2-d array of row points")
    norms = np.linalg.norm(data, axis=1)
    bad = np.nonzero(norms < ZERO_NORM_TOL)[0]
    if bad.size:
        raise ZeroNormPoint(int(bad[0]))
    return PointCloud(data=data, norms=norms, normalized=data / norms[:, None])


def dissimilarity(a, b):
    """Inverse absolute cosine between two unit vectors.

    Equals 1 for (anti)parallel vectors and grows without bound as the
    pair approaches orthogonality.

    Raises
    ------
    OrthogonalPoint
        When the absolute cosine falls below 1e-12.
    """
    c = abs(float(np.dot(a, b)))
    if c < ORTHO_TOL:
        raise OrthogonalPoint("points are orthogonal; dissimilarity undefined")
    return 1.0 / c


def stretch(point, anchor):
    """Rescale a unit vector so its inner product with the anchor is one.

    The factor t = 1 / <point, anchor> keeps its sign, so points on the
    far hemisphere flip through the origin onto the anchor's tangent
    hyperplane.

    Returns
    -------
    (t, stretched) : (float, ndarray)

    Raises
    ------
    OrthogonalPoint
        When the inner product is within 1e-12 of zero.
    """
    c = float(np.dot(point, anchor))
    if abs(c) < ORTHO_TOL:
        raise OrthogonalPoint("cannot stretch a point orthogonal to the anchor")
    t = 1.0 / c
    return t, t * np.asarray(point)


def build_neighborhood(cloud, anchor, k, gram_row=None):
    """Select the anchor's k nearest members and stretch them.

    Nearness is inverse absolute cosine; ties are broken by lower point
    index.  Points orthogonal to the anchor (absolute cosine below 1e-12)
    are excluded outright, and fewer than k survivors just shrink the
    neighborhood.

    Parameters
    ----------
    cloud : PointCloud
    anchor : int
        Index of the anchor point within the cloud.
    k : int
        Number of members requested (at least 1).
    gram_row : (N,) ndarray, optional
        Precomputed inner products of every normalized point with the
        anchor, to avoid recomputing them per call in batch runs.

    Returns
    -------
    Neighborhood

    Raises
    ------
    EmptyNeighborhood
        If every other point is orthogonal to the anchor.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    unit = cloud.normalized
    if gram_row is None:
        gram_row = unit @ unit[anchor]
    cos = np.abs(gram_row)
    usable = cos >= ORTHO_TOL
    usable[anchor] = False
    candidates = np.nonzero(usable)[0]
    if candidates.size == 0:
        raise EmptyNeighborhood(anchor)
    weights = 1.0 / cos[candidates]
    order = np.lexsort((candidates, weights))[: min(k, candidates.size)]
    members = candidates[order]
    t = 1.0 / gram_row[members]
    return Neighborhood(
        anchor=anchor,
        members=members,
        weights=weights[order],
        stretched=(unit[members] * t[:, None]).T.copy(),
    )


def build_all_neighborhoods(cloud, k):
    """Neighborhoods for every anchor, sharing one Gram matrix.

    Returns
    -------
    list of Neighborhood, indexed by anchor.
    """
    gram = cloud.normalized @ cloud.normalized.T
    return [
        build_neighborhood(cloud, i, k, gram_row=gram[i]) for i in range(len(cloud))
    ]
