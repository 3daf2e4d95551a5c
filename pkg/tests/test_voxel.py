import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riesz_stability import corpus
from riesz_stability.errors import EmptySetError, GridError
from riesz_stability.kernel import BallSpec, Kernel
from riesz_stability.radial import RadialSet
from riesz_stability.voxel import (
    CoverageField,
    Grid,
    PotentialField,
    VoxelSet,
    ball_coverage,
    binarize,
    bisecting_plane,
    distance_order,
    rasterize_ball,
    rasterize_implicit,
    rasterize_radial,
    rearrange_decreasing,
    symmetrize_halfspace,
)

W3 = 4 * math.pi / 3


def random_set(seed, shape=(9, 8, 7), p=0.3):
    rng = np.random.default_rng(seed)
    occ = rng.random(shape) < p
    occ[0, 0, 0] = True
    return VoxelSet(occ, 0.1, (0.3, -0.2, 0.05))


def test_grid_cube_layout():
    g = Grid.cube((0, 0, 0), 2.0, 8)
    assert g.spacing == 0.5
    assert g.origin == (-1.75,) * 3
    lo, hi = g.bounds()
    np.testing.assert_allclose(lo, -2.0)
    np.testing.assert_allclose(hi, 2.0)
    np.testing.assert_allclose(g.midpoint(), 0.0, atol=1e-15)


@pytest.mark.parametrize("kw", [dict(shape=(0, 3), spacing=1.0, origin=(0, 0)),
                                dict(shape=(3, 3), spacing=0.0, origin=(0, 0)),
                                dict(shape=(3, 3), spacing=1.0, origin=(0,))])
def test_grid_validation(kw):
    with pytest.raises(GridError):
        Grid(**kw)


def test_voxelset_is_immutable():
    A = random_set(0)
    with pytest.raises(ValueError):
        A.occupancy[0, 0, 0] = False


def test_empty_set_operations_raise():
    E = VoxelSet(np.zeros((4, 4, 4)), 0.1)
    assert E.empty and E.volume == 0
    for op in (E.barycenter, E.cropped, E.require_nonempty):
        with pytest.raises(EmptySetError):
            op()


@pytest.mark.parametrize("seed", range(4))
def test_json_roundtrip(seed):
    A = random_set(seed)
    B = VoxelSet.from_dict(json.loads(json.dumps(A.to_dict())))
    assert B.grid == A.grid
    assert np.array_equal(A.occupancy, B.occupancy)


def test_json_cells_form():
    d = {"n": 2, "shape": [3, 3], "spacing": 0.5, "origin": [0, 0], "cells": [[0, 1], [2, 2]]}
    A = VoxelSet.from_dict(d)
    assert A.count == 2 and A.occupancy[0, 1] and A.occupancy[2, 2]


@pytest.mark.parametrize("d", [
    {"n": 2, "shape": [3, 3], "spacing": 0.5, "origin": [0, 0], "cells": [[3, 0]]},
    {"n": 3, "shape": [3, 3], "spacing": 0.5, "origin": [0, 0], "cells": []},
    {"n": 2, "shape": [3, 3], "spacing": 0.5, "origin": [0, 0]},
])
def test_json_rejects_malformed(d):
    with pytest.raises(ValueError):
        VoxelSet.from_dict(d)


def test_crop_and_pad_preserve_cells():
    A = random_set(1)
    C = A.cropped(pad=2)
    assert C.same_cells(A)
    assert C.padded(3).same_cells(A)
    assert C.count == A.count


def test_reflection_is_involution_and_symmetry_detection():
    A = random_set(2)
    assert A.reflected(1).reflected(1).same_cells(A)
    assert not A.is_origin_symmetric()
    B = corpus.ball(1.0, resolution=16)
    assert B.is_origin_symmetric() and B.is_grid_symmetric()
    assert not B.translated((0.3, 0, 0)).is_origin_symmetric()


def test_set_algebra():
    A, B = random_set(3), random_set(4)
    assert A.union(B).count + A.intersection(B).count == A.count + B.count
    assert A.symmetric_difference_volume(B) == pytest.approx(
        (A.union(B).count - A.intersection(B).count) * A.grid.cell_volume)
    with pytest.raises(GridError):
        A.union(B.translated((1, 0, 0)))


def sample_fraction(pt, h, c, R, m=40):
    o = ((np.arange(m) + 0.5) / m - 0.5) * h
    g = np.stack(np.meshgrid(o, o, o, indexing="ij"), -1).reshape(-1, 3) + pt
    return np.mean(np.sum((g - c) ** 2, axis=1) < R * R)


def test_ball_coverage_matches_fine_sampling():
    rng = np.random.default_rng(5)
    h, R, c = 0.1, 1.0, np.zeros(3)
    dirs = rng.normal(size=(40, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = dirs * rng.uniform(0.9, 1.1, size=(40, 1))
    cov = ball_coverage(pts, h, c, R, subsamples=8)
    ref = np.array([sample_fraction(p, h, c, R) for p in pts])
    assert np.max(np.abs(cov - ref)) < 0.05
    # far inside and far outside are exact
    assert ball_coverage(np.array([[0.0, 0, 0], [2.0, 0, 0]]), h, c, R).tolist() == [1.0, 0.0]


@pytest.mark.parametrize("resolution, tol", [(32, 3e-3), (64, 1e-3)])
def test_rasterized_ball_volume(resolution, tol):
    g = Grid.cube((0, 0, 0), 1.5, resolution)
    cov = rasterize_ball(BallSpec(1.0, (0, 0, 0)), g)
    assert cov.volume == pytest.approx(W3, rel=tol)
    A = binarize(cov)
    assert A.volume == pytest.approx(W3, rel=5 * tol)


def test_rasterize_rejects_shapes_touching_the_box():
    g = Grid.cube((0, 0, 0), 1.0, 16)
    with pytest.raises(GridError):
        rasterize_ball(BallSpec(1.0, (0, 0, 0)), g)
    with pytest.raises(GridError):
        rasterize_radial(RadialSet(3, [(0, 1.0)]), g)


def test_rasterize_radial_shell_volume():
    g = Grid.cube((0, 0, 0), 1.6, 64)
    cov = rasterize_radial(RadialSet(3, [(1.0, 1.5)]), g)
    assert cov.volume == pytest.approx(W3 * (1.5**3 - 1), rel=2e-3)


def test_rasterize_implicit_agrees_with_ball():
    g = Grid.cube((0.1, 0, 0), 1.5, 32)
    a = rasterize_implicit(lambda p: np.sum((p - [0.1, 0, 0]) ** 2, axis=1) < 1.0, g).values
    b = rasterize_ball(BallSpec(1.0, (0.1, 0, 0)), g).values
    assert np.max(np.abs(a - b)) < 0.2
    assert a.sum() == pytest.approx(b.sum(), rel=2e-3)


def test_binarize_threshold_validation():
    c = CoverageField(np.full((2, 2), 0.5), Grid((2, 2), 1.0, (0, 0)))
    assert binarize(c).count == 4
    with pytest.raises(ValueError):
        binarize(c, 1.0)


def test_bisecting_plane_tie_breaks_to_middle():
    occ = np.zeros((8, 3, 3), bool)
    occ[2, 1, 1] = occ[5, 1, 1] = True
    k, imb = bisecting_plane(VoxelSet(occ, 1.0), 0)
    assert imb == 0 and k == 4  # faces 3, 4, 5 all bisect


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), axis=st.integers(0, 2), recenter=st.booleans())
def test_halfspace_symmetrization_properties(seed, axis, recenter):
    A = random_set(seed, p=0.4)
    s = symmetrize_halfspace(A, axis, recenter)
    for S in (s.plus, s.minus):
        assert np.array_equal(S.occupancy, np.flip(S.occupancy, axis))
    # each half-space part is counted twice, and the two halves sum to A
    assert s.plus.count + s.minus.count == 2 * A.count
    assert abs(s.plus.count - s.minus.count) * A.grid.cell_volume == pytest.approx(2 * s.imbalance)
    mid = s.plus.grid.midpoint()[axis]
    assert mid == pytest.approx(s.plane, abs=1e-12)
    if recenter:
        assert s.plane == 0.0


def test_halfspace_symmetrization_reproduces_the_halves():
    A = random_set(7)
    s = symmetrize_halfspace(A, 0)
    below = A.occupied_centers()[:, 0] < s.plane
    lower_cells = s.plus.occupied_centers()
    assert np.count_nonzero(lower_cells[:, 0] < s.plane) == np.count_nonzero(below)


def test_distance_order_is_sorted_and_deterministic():
    g = Grid((5, 6, 4), 0.3, (0, 0, 0))
    order, dist = distance_order(g)
    assert np.all(np.diff(dist[order]) >= 0)
    assert np.array_equal(order, distance_order(g)[0])
    assert sorted(order.tolist()) == list(range(g.shape[0] * g.shape[1] * g.shape[2]))


def test_rearrangement_preserves_distribution_and_decreases():
    rng = np.random.default_rng(0)
    g = Grid((9, 9, 9), 0.2, (-0.8,) * 3)
    f = PotentialField(rng.random(g.shape), g)
    r = rearrange_decreasing(f)
    np.testing.assert_array_equal(np.sort(r.values.ravel()), np.sort(f.values.ravel()))
    order, dist = distance_order(g)
    assert np.all(np.diff(r.values.ravel()[order]) <= 0)
    with pytest.raises(ValueError):
        rearrange_decreasing(PotentialField(-f.values, g))


def test_potential_field_roundtrip():
    g = Grid((3, 4), 0.5, (1.0, -1.0))
    f = PotentialField(np.arange(12.0).reshape(3, 4), g, Kernel(3, 1.0))
    f2 = PotentialField.from_dict(json.loads(json.dumps(f.to_dict())))
    np.testing.assert_array_equal(f2.values, f.values)
    assert f2.grid == g and f2.kernel == f.kernel
