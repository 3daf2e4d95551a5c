import numpy as np
import pytest

from riesz_stability import corpus
from riesz_stability.asymmetry import fraenkel_asymmetry
from riesz_stability.errors import EmptySetError, GridError
from riesz_stability.kernel import Kernel
from riesz_stability.symmetrize import fmp_branches, fmp_symmetrize, frame_around_origin, truncate_tail
from riesz_stability.voxel import VoxelSet

K = Kernel(3, 1.0)
RES = 32


def test_branches_of_shifted_ball_all_recover_the_centered_ball():
    B = corpus.ball(1.0, resolution=RES)
    shifted = B.translated((0.37, -0.21, 0.11))
    for S, choices, imb in fmp_branches(shifted):
        assert S.count == B.count
        assert S.is_origin_symmetric()
        assert len(choices) == 3


def test_symmetric_input_has_a_single_branch():
    E = corpus.ellipsoid(resolution=RES)
    branches = fmp_branches(E)
    assert len(branches) == 1
    assert branches[0][0].same_cells(E)


def test_branch_count_bounded_by_two_to_the_n():
    A = corpus.blob(seed=3, resolution=RES)
    branches = fmp_branches(A)
    assert 1 <= len(branches) <= 8
    for S, _, imbalances in branches:
        assert S.is_origin_symmetric()
        # volume changes only by the bisection imbalances
        assert abs(S.volume - A.volume) <= 2 * sum(imbalances) + 1e-12


def test_fmp_symmetrize_picks_the_most_asymmetric_branch():
    A = corpus.two_balls(separation=2.6, R2=0.8, resolution=RES)
    res = fmp_symmetrize(A)
    alphas = [fraenkel_asymmetry(S) for S, _, _ in fmp_branches(A)]
    assert res.alpha_after == pytest.approx(max(alphas))
    assert res.ratio == pytest.approx(res.alpha_after / res.alpha_before)
    assert res.candidates == len(alphas)
    assert res.set.is_origin_symmetric()


def test_fmp_symmetrize_deterministic():
    A = corpus.blob(seed=11, resolution=RES)
    a, b = fmp_symmetrize(A), fmp_symmetrize(A)
    assert a.choices == b.choices and np.array_equal(a.set.occupancy, b.set.occupancy)


def test_fmp_empty_raises():
    with pytest.raises(EmptySetError):
        fmp_symmetrize(VoxelSet(np.zeros((4, 4, 4)), 0.1))


def test_frame_around_origin_covers_reach_and_keeps_symmetry():
    B = corpus.ball(1.0, resolution=RES)
    W = frame_around_origin(B, 2.5)
    lo, hi = W.grid.bounds()
    assert np.all(lo <= -2.5) and np.all(hi >= 2.5)
    assert W.is_grid_symmetric() and W.same_cells(B)



def test_truncation_preserves_volume_and_removes_the_tail():
    A = corpus.ball_with_satellite(resolution=48)
    A = A.translated(-fraenkel_asymmetry(A, return_center=True)[1])
    t = truncate_tail(A, alpha0=0.05, c=1.0, kernel=K)
    T = t.set
    assert t.moved_cells > 0
    assert T.count == A.count
    d = np.linalg.norm(T.occupied_centers(), axis=1)
    assert d.max() < t.outer_radius
    assert A.volume_radius <= t.shell_radius < t.outer_radius


def test_truncation_radius_formula():
    A = corpus.ball_with_satellite(resolution=48)
    A = A.translated(-fraenkel_asymmetry(A, return_center=True)[1])
    for alpha0, c in [(0.05, 1.0), (0.1, 0.5)]:
        t = truncate_tail(A, alpha0, c, K)
        assert t.outer_radius == pytest.approx(A.volume_radius * (1 + c * alpha0 ** (1 - 1 / 3)))


def test_truncation_keeps_origin_symmetry():
    A = corpus.two_balls(separation=5.0, resolution=48)
    assert A.is_origin_symmetric()
    t = truncate_tail(A, alpha0=0.5, c=1.0, kernel=K)
    assert t.moved_cells > 0
    assert t.set.is_origin_symmetric()
    assert t.set.count == A.count


def test_truncation_noop_when_nothing_is_outside():
    B = corpus.ball(1.0, resolution=RES)
    t = truncate_tail(B, alpha0=0.01, c=1.0, kernel=K)
    assert t.moved_cells == 0 and t.set is B


def test_truncation_fails_when_radius_is_too_small():
    A = corpus.two_balls(separation=5.0, resolution=32)
    with pytest.raises(GridError):
        truncate_tail(A, alpha0=1e-6, c=1e-3, kernel=K)


def test_truncation_rejects_nonpositive_constant():
    with pytest.raises(ValueError):
        truncate_tail(corpus.ball(resolution=16), 0.1, 0.0, K)
