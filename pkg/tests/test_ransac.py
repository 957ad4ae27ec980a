import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from piste.errors import AllDegenerate, InsufficientData, NoConsensus
from piste.geometry import Correspondence, Homography, Point2, transfer_errors
from piste.ransac import RansacConfig, estimate, estimate_arrays

from .helpers import apply_matrix, random_homography_matrix


def outlier_scene(seed, n_in=120, n_out=80, noise=0.0):
    rng = np.random.default_rng(seed)
    m = random_homography_matrix(rng)
    src = rng.uniform([0, 0], [1280, 720], (n_in, 2))
    dst = apply_matrix(m, src)
    obs = dst + rng.normal(0, noise, dst.shape) if noise else dst
    s = np.vstack([src, rng.uniform([0, 0], [1280, 720], (n_out, 2))])
    d = np.vstack([obs, rng.uniform([0, 0], [1280, 720], (n_out, 2))])
    return m, src, dst, s, d


def test_exact_translation_recovered():
    rng = np.random.default_rng(0)
    src = rng.uniform(0, 500, (100, 2))
    corrs = [Correspondence(Point2(*p), Point2(p[0] + 7, p[1] - 3)) for p in src]
    res = estimate(corrs, RansacConfig(seed=1))
    assert np.abs(res.h.m - Homography.translation(7, -3).m).max() < 1e-6
    assert res.inlier_flags.all()
    assert res.iterations_used <= 3


def test_too_few_correspondences():
    corrs = [Correspondence(Point2(i, i * i), Point2(i, i)) for i in range(3)]
    with pytest.raises(InsufficientData):
        estimate(corrs)


def test_all_collinear_is_all_degenerate():
    x = np.linspace(0, 500, 40)
    src = np.c_[x, 2 * x + 1]
    with pytest.raises(AllDegenerate):
        estimate_arrays(src, src + 3.0, RansacConfig(max_iterations=200))


def test_pure_noise_has_no_consensus():
    rng = np.random.default_rng(4)
    src = rng.uniform(0, 1000, (60, 2))
    dst = rng.uniform(0, 1000, (60, 2))
    with pytest.raises(NoConsensus):
        estimate_arrays(src, dst, RansacConfig(max_iterations=300, min_inliers=20))


def test_config_validation():
    for bad in ({"confidence": 1.0}, {"max_iterations": 0}, {"min_inliers": 3}):
        with pytest.raises(ValueError):
            RansacConfig(**bad)


def test_exact_inliers_with_outliers_every_seed():
    for seed in range(50):
        m, src, dst, s, d = outlier_scene(500 + seed)
        res = estimate_arrays(s, d, RansacConfig(seed=seed))
        assert transfer_errors(res.h, src, dst).max() < 1.0, seed


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0), st.integers(0, 120))
def test_result_contract(seed, noise, n_out):
    m, src, dst, s, d = outlier_scene(seed, 80, n_out, noise)
    cfg = RansacConfig(seed=seed, max_iterations=400)
    res = estimate_arrays(s, d, cfg)
    err = transfer_errors(res.h, s, d)
    assert (err[res.inlier_flags] <= cfg.inlier_threshold).all()
    assert res.n_inliers >= cfg.min_inliers
    assert res.mean_inlier_error <= cfg.inlier_threshold
    assert res.mean_inlier_error == pytest.approx(err[res.inlier_flags].mean(), rel=1e-12)
    again = estimate_arrays(s, d, cfg)
    assert np.array_equal(again.h.m, res.h.m)
    assert np.array_equal(again.inlier_flags, res.inlier_flags)
    assert again.iterations_used == res.iterations_used


@given(st.integers(0, 2**32 - 1))
def test_noise_free_needs_few_iterations(seed):
    m, src, dst, s, d = outlier_scene(seed, 60, 0)
    res = estimate_arrays(s, d, RansacConfig(seed=seed))
    assert res.inlier_flags.all()
    assert res.iterations_used <= 3
