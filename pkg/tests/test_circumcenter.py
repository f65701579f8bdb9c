import numpy as np
import pytest

from bwcrm import (
    Block,
    DegeneracyError,
    DimensionError,
    Hyperplane,
    circumcenter_block,
    circumcenter_points,
    oracle_intersection_projection,
    reflection_chain,
)

from instances import random_family

X_AXIS = Hyperplane([0.0, 1.0], 0.0)
Y_AXIS = Hyperplane([1.0, 0.0], 0.0)
COORD_PLANES = [Hyperplane(e, 0.0) for e in np.eye(3)]


def test_reflection_chain_coordinate_axes():
    chain = reflection_chain(Block([X_AXIS, Y_AXIS]), [1.0, 1.0])
    np.testing.assert_array_equal(chain.points, [[1, 1], [1, -1], [-1, -1]])
    assert chain.hit_flags == (False, False)
    assert chain.first_hit is None


def test_reflection_chain_at_solution():
    chain = reflection_chain([X_AXIS, Y_AXIS], [0.0, 0.0])
    np.testing.assert_array_equal(chain.points, np.zeros((3, 2)))
    assert chain.hit_flags == (True, True)
    assert chain.first_hit == 0


def test_reflection_chain_coordinate_planes():
    chain = reflection_chain(COORD_PLANES, [1.0, 1.0, 1.0])
    np.testing.assert_array_equal(
        chain.points, [[1, 1, 1], [-1, 1, 1], [-1, -1, 1], [-1, -1, -1]])


def test_circumcenter_points_examples():
    np.testing.assert_allclose(circumcenter_points([[1, 1], [1, -1], [-1, -1]]), [0, 0],
                               atol=1e-15)
    np.testing.assert_array_equal(circumcenter_points([[3.0, 4.0]]), [3.0, 4.0])
    np.testing.assert_array_equal(circumcenter_points([[0, 0], [4, 0]]), [2, 0])


def test_circumcenter_with_duplicate_point():
    # hand check: the center must sit on the segment's perpendicular bisector
    c = circumcenter_points([[0, 0], [2, 0], [2, 0]])
    np.testing.assert_allclose(c, [1.0, 0.0], atol=1e-15)


def test_circumcenter_triangle_3d():
    P = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
    np.testing.assert_allclose(circumcenter_points(P), [1.0, 1.0, 0.0], atol=1e-15)


def test_collinear_points_are_degenerate():
    with pytest.raises(DegeneracyError):
        circumcenter_points([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])


def test_circumcenter_points_input_errors():
    with pytest.raises(ValueError):
        circumcenter_points(np.zeros((0, 2)))
    with pytest.raises(DimensionError):
        circumcenter_points([1.0, 2.0])


def test_block_validation():
    with pytest.raises(ValueError):
        Block([])
    with pytest.raises(DimensionError):
        Block([X_AXIS, COORD_PLANES[0]])


def test_circumcenter_block_examples():
    np.testing.assert_allclose(circumcenter_block([X_AXIS, Y_AXIS], [1.0, 1.0]), [0, 0],
                               atol=1e-15)
    np.testing.assert_array_equal(circumcenter_block([X_AXIS, Y_AXIS], [0.0, 0.0]), [0, 0])
    np.testing.assert_allclose(circumcenter_block(COORD_PLANES, [1.0, 1.0, 1.0]), np.zeros(3),
                               atol=1e-14)


def _random_block(rng):
    n = int(rng.integers(2, 21))
    q = int(rng.integers(1, 7))
    sizes = [int(c) for c in rng.integers(1, max(2, n // q) + 1, size=q)]
    return Block(random_family(rng, n, sizes)), n


@pytest.mark.parametrize("seed", range(40))
def test_equidistance_and_bam_on_random_chains(seed):
    rng = np.random.default_rng(seed)
    block, n = _random_block(rng)
    z = 3 * rng.standard_normal(n)
    pts = reflection_chain(block, z).points
    c = circumcenter_points(pts)
    d = np.linalg.norm(pts - c, axis=1)
    diam = max(np.linalg.norm(a - b) for a in pts for b in pts)
    assert np.ptp(d) <= 1e-9 * (1 + diam)

    # the center solves V x = w/2 with V the differences from z
    V = pts[1:] - pts[0]
    w = np.sum(V * V, axis=1)
    assert np.linalg.norm(V @ (c - pts[0]) - 0.5 * w) <= 1e-10 * max(np.linalg.norm(w), 1)

    c2 = circumcenter_block(block, z)
    np.testing.assert_allclose(c2, c, atol=1e-12 * (1 + np.linalg.norm(c)))

    target = oracle_intersection_projection(block.members, z)
    assert np.linalg.norm(oracle_intersection_projection(block.members, c2) - target) \
        <= 1e-9 * (1 + np.linalg.norm(z))
    assert np.linalg.norm(c2 - target) < np.linalg.norm(z - target)


@pytest.mark.parametrize("seed", range(20))
def test_two_point_circumcenter_is_projection(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 15))
    (U,) = random_family(rng, n, [int(rng.integers(1, n + 1))])
    z = 5 * rng.standard_normal(n)
    c = circumcenter_points([z, U.reflect(z)])
    assert np.linalg.norm(c - U.project(z)) <= 1e-10


def test_fixed_point_on_intersection():
    rng = np.random.default_rng(3)
    fam = random_family(rng, 6, [1, 2, 1])
    s = oracle_intersection_projection(fam, rng.standard_normal(6))
    np.testing.assert_allclose(circumcenter_block(fam, s), s, atol=1e-12)


def test_center_is_anchor_invariant():
    rng = np.random.default_rng(11)
    block, n = _random_block(rng)
    pts = reflection_chain(block, rng.standard_normal(n)).points
    c1 = circumcenter_points(pts)
    c2 = circumcenter_points(pts[::-1])
    np.testing.assert_allclose(c1, c2, atol=1e-9 * (1 + np.linalg.norm(c1)))
