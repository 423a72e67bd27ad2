import numpy as np
import pytest

from simplexsc import geometry
from simplexsc.errors import EmptyNeighborhood, OrthogonalPoint, ZeroNormPoint

from oracles import brute_neighborhood


def random_sphere_points(n, p, seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, p))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def test_normalize_reconstructs_data():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(40, 5)) * rng.uniform(0.1, 50, size=(40, 1))
    cloud = geometry.normalize(pts)
    assert np.allclose(np.linalg.norm(cloud.normalized, axis=1), 1.0, atol=1e-12)
    assert np.allclose(cloud.norms[:, None] * cloud.normalized, pts, atol=1e-12)


def test_normalize_zero_row_raises_with_index():
    pts = np.ones((4, 3))
    pts[2] = 0.0
    with pytest.raises(ZeroNormPoint) as err:
        geometry.normalize(pts)
    assert err.value.index == 2


def test_dissimilarity_examples():
    e1 = np.array([1.0, 0.0, 0.0])
    assert geometry.dissimilarity(e1, e1) == 1.0
    assert geometry.dissimilarity(e1, -e1) == 1.0
    v60 = np.array([0.5, np.sqrt(3) / 2, 0.0])
    assert geometry.dissimilarity(e1, v60) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(OrthogonalPoint):
        geometry.dissimilarity(e1, np.array([0.0, 1.0, 0.0]))


def test_dissimilarity_symmetric_and_at_least_one():
    pts = random_sphere_points(30, 4, seed=11)
    for i in range(0, 30, 3):
        for j in range(1, 30, 4):
            if i == j:
                continue
            d = geometry.dissimilarity(pts[i], pts[j])
            assert d == geometry.dissimilarity(pts[j], pts[i])
            assert d >= 1.0


def test_stretch_hits_tangent_hyperplane():
    pts = random_sphere_points(50, 6, seed=7)
    anchor = pts[0]
    for j in range(1, 50):
        t, xhat = geometry.stretch(pts[j], anchor)
        assert float(xhat @ anchor) == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(xhat, t * pts[j])


def test_stretch_of_anchor_and_antipode():
    anchor = np.array([0.0, 1.0, 0.0])
    t, xhat = geometry.stretch(anchor, anchor)
    assert t == pytest.approx(1.0) and np.allclose(xhat, anchor)
    t, xhat = geometry.stretch(-anchor, anchor)
    assert t == pytest.approx(-1.0) and np.allclose(xhat, anchor, atol=1e-15)


def test_stretch_orthogonal_raises():
    with pytest.raises(OrthogonalPoint):
        geometry.stretch(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))


def test_monotone_link_between_weight_and_distance():
    """On the tangent hyperplane, squared distance to the anchor equals
    squared dissimilarity minus one, so weight order is distance order."""
    pts = random_sphere_points(60, 5, seed=23)
    cloud = geometry.normalize(pts)
    nb = geometry.build_neighborhood(cloud, 4, 20)
    dist2 = np.sum((nb.stretched - cloud.normalized[4][:, None]) ** 2, axis=0)
    assert np.allclose(dist2, nb.weights**2 - 1.0, atol=1e-9)
    assert np.all(np.diff(dist2) >= -1e-12)


@pytest.mark.parametrize("k", [1, 3, 5, 9])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_build_neighborhood_matches_brute_force(k, seed):
    pts = random_sphere_points(10, 3, seed=seed)
    cloud = geometry.normalize(pts)
    for anchor in range(10):
        nb = geometry.build_neighborhood(cloud, anchor, k)
        members, weights, stretched = brute_neighborhood(pts, anchor, k)
        assert nb.members.tolist() == members
        assert np.allclose(nb.weights, weights, atol=1e-12)
        assert np.allclose(nb.stretched, np.array(stretched).T, atol=1e-12)


def test_neighborhood_invariants_random():
    pts = random_sphere_points(80, 8, seed=5)
    cloud = geometry.normalize(pts)
    for nb in geometry.build_all_neighborhoods(cloud, 12):
        assert nb.size == 12
        assert nb.anchor not in nb.members
        assert np.all(np.diff(nb.weights) >= 0)
        assert np.all(nb.weights >= 1.0)
        assert np.allclose(nb.stretched.T @ cloud.normalized[nb.anchor], 1.0,
                           atol=1e-10)


def test_ties_broken_by_lower_index():
    # two points at exactly the same angle from the anchor
    anchor = np.array([1.0, 0.0])
    a = np.array([np.cos(0.4), np.sin(0.4)])
    b = np.array([np.cos(0.4), -np.sin(0.4)])
    cloud = geometry.normalize(np.vstack([anchor, a, b]))
    nb = geometry.build_neighborhood(cloud, 0, 1)
    assert nb.members.tolist() == [1]


def test_orthogonal_members_excluded():
    pts = np.array([[1.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0],
                    [0.0, 0.0, 1.0],
                    [1.0, 1.0, 0.0]])
    cloud = geometry.normalize(pts)
    nb = geometry.build_neighborhood(cloud, 0, 3)
    assert nb.members.tolist() == [3]  # k capped at the single usable point


def test_empty_neighborhood_raises():
    pts = np.eye(3)
    cloud = geometry.normalize(pts)
    with pytest.raises(EmptyNeighborhood):
        geometry.build_neighborhood(cloud, 0, 2)


def test_duplicate_of_anchor_kept_with_weight_one():
    pts = np.array([[2.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    cloud = geometry.normalize(pts)
    nb = geometry.build_neighborhood(cloud, 0, 2)
    assert nb.members.tolist() == [1, 2]
    assert nb.weights[0] == pytest.approx(1.0)
    assert np.allclose(nb.stretched[:, 0], cloud.normalized[0])


def test_antipodal_duplicate_stretches_onto_anchor():
    pts = np.array([[1.0, 0.0], [-3.0, 0.0], [1.0, 0.5]])
    cloud = geometry.normalize(pts)
    nb = geometry.build_neighborhood(cloud, 0, 1)
    assert nb.members.tolist() == [1]
    assert np.allclose(nb.stretched[:, 0], cloud.normalized[0], atol=1e-15)
