"""Synthetic subspace data, dataset file loaders, and PCA projection.

Generators return ambient-space points with ground-truth labels.  Clean
subspace points are scaled to unit norm before noise is added, so the
noise standard deviation is directly comparable across settings; the
noisy points are returned as-is, the pipeline's geometry stage owns any
further normalization.
"""

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError, MalformedIdx

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class LabelledData:
    """Points with ground-truth class values.

    ``labels`` keeps whatever class values the source uses (1-based ids
    for the generators, stored digit values for file loaders); metrics
    match partitions, so the values themselves never need remapping.
    """

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.points.shape[0] != self.labels.size:
            raise ValueError("one label per point is required")

    def __len__(self):
        return self.labels.size

    @property
    def ambient_dim(self):
        return self.points.shape[1]


def _sample_cluster(rng, frame, n, sigma, ambient):
    coeffs = rng.uniform(-1.0, 1.0, size=(n, frame.shape[1]))
    pts = coeffs @ frame.T
    # unit signal: coefficient vectors too close to the origin would
    # otherwise produce points that are pure noise
    norms = np.linalg.norm(pts, axis=1, keepdims=True)
    tiny = norms[:, 0] < 1e-12
    while tiny.any():
        coeffs[tiny] = rng.uniform(-1.0, 1.0, size=(tiny.sum(), frame.shape[1]))
        pts[tiny] = coeffs[tiny] @ frame.T
        norms = np.linalg.norm(pts, axis=1, keepdims=True)
        tiny = norms[:, 0] < 1e-12
    pts = pts / norms
    if sigma > 0.0:
        pts = pts + sigma * rng.normal(size=(n, ambient))
    return pts


def generate_two_subspaces(
    theta, sigma, n_per_cluster, dims=(1, 1), ambient=3, seed=None
):
    """Two linear subspaces meeting at a prescribed angle.

    The first subspace gets a random orthonormal frame.  The second
    shares no direction with it: its leading direction is the first
    subspace's leading direction rotated by ``theta`` degrees inside a
    plane spanned with a fresh orthogonal direction, and any remaining
    directions are orthogonal to the first subspace entirely.  The
    smallest principal angle between the two spans is then exactly
    ``theta``.

    Parameters
    ----------
    theta : float
        Angle in degrees, inside (0, 90].
    sigma : float
        Ambient Gaussian noise standard deviation, nonnegative.
    n_per_cluster : int
    dims : (int, int)
        Subspace dimensions, e.g. (1, 1) or (1, 2).
    ambient : int
        Ambient dimension P; needs dims[0] + dims[1] <= P.
    seed : int or Generator, optional

    Returns
    -------
    LabelledData
        Labels are 1 and 2.
    """
    if not 0.0 < theta <= 90.0:
        raise ValueError("theta must lie in (0, 90] degrees")
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    q1, q2 = dims
    if q1 < 1 or q2 < 1 or q1 + q2 > ambient:
        raise ValueError("need dims >= 1 with dims[0] + dims[1] <= ambient")
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.normal(size=(ambient, q1 + q2)))
    frame1 = basis[:, :q1]
    angle = np.radians(theta)
    lead = np.cos(angle) * basis[:, 0] + np.sin(angle) * basis[:, q1]
    frame2 = np.column_stack([lead, basis[:, q1 + 1 : q1 + q2]])
    pts = np.vstack(
        [
            _sample_cluster(rng, frame1, n_per_cluster, sigma, ambient),
            _sample_cluster(rng, frame2, n_per_cluster, sigma, ambient),
        ]
    )
    labels = np.repeat([1, 2], n_per_cluster)
    return LabelledData(points=pts, labels=labels)


def generate_k_subspaces(
    n_clusters, dim, ambient, n_per_cluster, sigma, seed=None
):
    """Equal-dimension random subspaces with ambient Gaussian noise.

    Each cluster's frame is an orthonormalized Gaussian matrix, drawn
    independently, so subspace pairs meet at random angles.

    Returns
    -------
    LabelledData
        Labels are 1..n_clusters.
    """
    if not 1 <= dim < ambient:
        raise ValueError("need 1 <= dim < ambient")
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    blocks = []
    for _ in range(n_clusters):
        frame, _ = np.linalg.qr(rng.normal(size=(ambient, dim)))
        blocks.append(_sample_cluster(rng, frame, n_per_cluster, sigma, ambient))
    labels = np.repeat(np.arange(1, n_clusters + 1), n_per_cluster)
    return LabelledData(points=np.vstack(blocks), labels=labels)


def _read_idx_header(blob, magic_wanted, path):
    if len(blob) < 4:
        raise MalformedIdx(0, f"{path}: file shorter than a magic number")
    (magic,) = struct.unpack(">i", blob[:4])
    if magic != magic_wanted:
        raise MalformedIdx(
            0, f"{path}: magic 0x{magic:08x}, expected 0x{magic_wanted:08x}"
        )
    ndim = magic & 0xFF
    header_len = 4 + 4 * ndim
    if len(blob) < header_len:
        raise MalformedIdx(4, f"{path}: truncated dimension header")
    shape = struct.unpack(f">{ndim}i", blob[4:header_len])
    if any(d < 0 for d in shape):
        raise MalformedIdx(4, f"{path}: negative dimension {shape}")
    return shape, header_len


def load_idx(images_path, labels_path):
    """Load an image/label pair of IDX files.

    Pixels are scaled to [0, 1]; each image row is flattened.

    Raises
    ------
    MalformedIdx
        Wrong magic numbers, truncated payloads, or an image/label count
        mismatch.
    """
    with open(images_path, "rb") as fh:
        img_blob = fh.read()
    with open(labels_path, "rb") as fh:
        lab_blob = fh.read()
    shape, offset = _read_idx_header(img_blob, IDX_IMAGES_MAGIC, images_path)
    n_images, rows, cols = shape
    expected = n_images * rows * cols
    if len(img_blob) - offset != expected:
        raise MalformedIdx(
            offset,
            f"{images_path}: payload holds {len(img_blob) - offset} bytes, "
            f"expected {expected}",
        )
    (n_labels,), lab_offset = _read_idx_header(
        lab_blob, IDX_LABELS_MAGIC, labels_path
    )
    if len(lab_blob) - lab_offset != n_labels:
        raise MalformedIdx(
            lab_offset,
            f"{labels_path}: payload holds {len(lab_blob) - lab_offset} "
            f"bytes, expected {n_labels}",
        )
    if n_images != n_labels:
        raise MalformedIdx(
            offset, f"{images_path}: {n_images} images vs {n_labels} labels"
        )
    pixels = np.frombuffer(img_blob, dtype=np.uint8, offset=offset)
    points = pixels.reshape(n_images, rows * cols).astype(np.float64) / 255.0
    labels = np.frombuffer(lab_blob, dtype=np.uint8, offset=lab_offset)
    return LabelledData(points=points, labels=labels.astype(np.int64))


def load_csv(path, label_column):
    """Load a CSV with one labelled point per row.

    ``label_column`` is a header name or a 0-based column index.  The
    label column may hold arbitrary strings; distinct values are mapped
    to integer classes in sorted order.  All other columns must parse as
    floats.

    Raises
    ------
    DataError
        Missing column, ragged rows, or non-numeric features.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = rows[0]
    if isinstance(label_column, str):
        if label_column not in header:
            raise DataError(f"{path}: no column named {label_column!r}")
        label_idx = header.index(label_column)
        rows = rows[1:]
    else:
        label_idx = int(label_column)
        # a header line is optional; skip it when it does not parse
        probe = [c for i, c in enumerate(rows[0]) if i != label_idx]
        try:
            [float(c) for c in probe]
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    if not 0 <= label_idx < width:
        raise DataError(f"{path}: label column {label_idx} out of range")
    features = []
    raw_labels = []
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(
                f"{path}: row {lineno} has {len(row)} fields, expected {width}"
            )
        raw_labels.append(row[label_idx])
        try:
            features.append(
                [float(c) for i, c in enumerate(row) if i != label_idx]
            )
        except ValueError as err:
            raise DataError(f"{path}: row {lineno}: {err}") from None
    classes = sorted(set(raw_labels))
    mapping = {cls: i + 1 for i, cls in enumerate(classes)}
    labels = np.array([mapping[v] for v in raw_labels], dtype=np.int64)
    return LabelledData(points=np.array(features), labels=labels)


def pca_project(data, target_dim):
    """Project points onto their top principal directions.

    Uncentered, like the subspace fits: directions are the top right
    singular vectors of the raw data matrix, so rank-``target_dim`` data
    is reproduced exactly.  Accepts a LabelledData (labels pass through)
    or a plain array.
    """
    if isinstance(data, LabelledData):
        return LabelledData(
            points=pca_project(data.points, target_dim), labels=data.labels
        )
    points = np.asarray(data, dtype=np.float64)
    if not 1 <= target_dim <= points.shape[1]:
        raise ValueError("target_dim must lie in [1, ambient dimension]")
    _, _, vt = np.linalg.svd(points, full_matrices=False)
    return points @ vt[:target_dim].T


def sample_per_class(data, per_class, seed=None):
    """Uniformly subsample a fixed number of points from every class.

    Classes with fewer points than requested contribute everything they
    have.  Selection order follows ascending class value, then the
    original index order within the class.
    """
    rng = np.random.default_rng(seed)
    keep = []
    for cls in np.unique(data.labels):
        idx = np.nonzero(data.labels == cls)[0]
        if idx.size > per_class:
            idx = np.sort(rng.choice(idx, size=per_class, replace=False))
        keep.append(idx)
    keep = np.concatenate(keep)
    return LabelledData(points=data.points[keep], labels=data.labels[keep])
