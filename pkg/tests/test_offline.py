import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from onmf.errors import ShapeError
from onmf.offline import fit_nmf, multiplicative_step
from onmf.synthetic import candle_frames
from onmf.video import frames_to_matrix


def sq_resid(X, W, H):
    return float(np.sum((X - W @ H) ** 2))


def test_exact_factorization_is_fixed_point_identity():
    W, H = multiplicative_step(np.eye(2), np.eye(2), np.eye(2))
    assert_allclose(W, np.eye(2), atol=1e-12)
    assert_allclose(H, np.eye(2), atol=1e-12)


def test_hand_applied_updates():
    # X=2, W=1, H=1: code moves to 2 first, then the dictionary stays at 1
    W, H = multiplicative_step([[2.0]], [[1.0]], [[1.0]])
    assert H[0, 0] == pytest.approx(2.0, abs=1e-9)
    assert W[0, 0] == pytest.approx(1.0, abs=1e-9)
    assert sq_resid(np.array([[2.0]]), W, H) < 1e-12


def test_zero_data_annihilates_both_factors():
    W, H = multiplicative_step(np.zeros((3, 2)), np.full((3, 2), 0.4),
                               np.full((2, 2), 0.7))
    assert_array_equal(H, np.zeros((2, 2)))
    assert_array_equal(W, np.zeros((3, 2)))
    assert sq_resid(np.zeros((3, 2)), W, H) == 0.0


def test_general_fixed_point_within_tolerance():
    rng = np.random.default_rng(1)
    W0 = rng.random((4, 2)) + 0.5
    H0 = rng.random((2, 3)) + 0.5
    W1, H1 = multiplicative_step(W0 @ H0, W0, H0)
    assert np.abs(W1 - W0).max() <= 1e-12
    assert np.abs(H1 - H0).max() <= 1e-12


def test_step_preserves_nonnegativity_exactly():
    rng = np.random.default_rng(2)
    X = rng.random((6, 5))
    W = rng.random((6, 3))
    H = rng.random((3, 5))
    for _ in range(20):
        W, H = multiplicative_step(X, W, H)
        assert (W >= 0).all() and (H >= 0).all()


def test_step_shape_mismatch():
    with pytest.raises(ShapeError):
        multiplicative_step(np.ones((3, 3)), np.ones((3, 2)), np.ones((3, 3)))


def test_objective_never_increases():
    for seed in range(3):
        rng = np.random.default_rng(seed)
        X = rng.random((50, 40))
        W = rng.random((50, 8))
        H = rng.random((8, 40))
        prev = sq_resid(X, W, H)
        for _ in range(200):
            W, H = multiplicative_step(X, W, H)
            cur = sq_resid(X, W, H)
            assert cur <= prev * (1.0 + 1e-10)
            prev = cur


def test_rank_one_data_fits_exactly():
    X = np.outer([1.0, 2.0], [3.0, 1.0])
    fit = fit_nmf(X, r=1, iters=500, seed=0)
    rel = np.linalg.norm(X - fit.W @ fit.H) / np.linalg.norm(X)
    assert rel <= 1e-6
    assert not fit.overcomplete


def test_identity_fits_with_full_rank():
    fit = fit_nmf(np.eye(3), r=3, iters=500, seed=0)
    assert np.linalg.norm(np.eye(3) - fit.W @ fit.H) <= 1e-4


def test_trace_matches_iterations_and_decreases():
    rng = np.random.default_rng(3)
    fit = fit_nmf(rng.random((10, 8)), r=2, iters=50, seed=1)
    assert fit.objective_trace.shape == (50,)
    assert (np.diff(fit.objective_trace) <= 1e-10).all()


def test_overcomplete_rank_flagged_not_rejected():
    rng = np.random.default_rng(4)
    fit = fit_nmf(rng.random((3, 4)), r=5, iters=5, seed=0)
    assert fit.overcomplete
    assert fit.W.shape == (3, 5)


def test_same_seed_reproduces_fit():
    rng = np.random.default_rng(5)
    X = rng.random((8, 6))
    a = fit_nmf(X, r=2, iters=30, seed=42)
    b = fit_nmf(X, r=2, iters=30, seed=42)
    assert_array_equal(a.W, b.W)
    assert_array_equal(a.H, b.H)


def test_rejects_negative_data_and_bad_rank():
    with pytest.raises(ValueError):
        fit_nmf(np.array([[-1.0]]), r=1)
    with pytest.raises(ValueError):
        fit_nmf(np.ones((2, 2)), r=0)


def test_candle_video_dictionary_shape():
    # 80x30 frames stack to a 2400 x 75 matrix; four atoms learned from it
    X = frames_to_matrix(candle_frames(80, 30, 75), "space_major")
    assert X.shape == (2400, 75)
    fit = fit_nmf(X, r=4, iters=30, seed=0)
    assert fit.W.shape == (2400, 4)
