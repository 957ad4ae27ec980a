"""Degeneracy-aware RANSAC for homographies with local-optimization refits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AllDegenerate,
    DegenerateConfiguration,
    InsufficientData,
    NoConsensus,
    SingularMatrix,
)
from .geometry import (
    Correspondence,
    Homography,
    dlt_homography,
    has_collinear_triple,
    invert,
    transfer_errors,
)

_MAX_SETTLE_ROUNDS = 10


@dataclass(frozen=True)
class RansacConfig:
    inlier_threshold: float = 3.0
    confidence: float = 0.995
    max_iterations: int = 5000
    min_inliers: int = 12
    lo_refit_rounds: int = 3
    lo_threshold_multiplier: float = 2.0
    seed: int = 0
    min_triangle_area: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.min_inliers < 4:
            raise ValueError("min_inliers must be >= 4")
        if self.lo_refit_rounds < 0:
            raise ValueError("lo_refit_rounds must be >= 0")
        if self.lo_threshold_multiplier < 1.0:
            raise ValueError("lo_threshold_multiplier must be >= 1")


@dataclass(frozen=True)
class RansacResult:
    h: Homography
    inlier_flags: np.ndarray
    iterations_used: int
    mean_inlier_error: float

    @property
    def n_inliers(self) -> int:
        return int(self.inlier_flags.sum())


def _score(h: Homography, src, dst, thr):
    try:
        err = transfer_errors(h, src, dst, invert(h))
    except SingularMatrix:
        return None
    flags = err <= thr
    n = int(flags.sum())
    mean = float(err[flags].mean()) if n else math.inf
    return flags, n, mean


def _better(n, mean, best_n, best_mean) -> bool:
    return n > best_n or (n == best_n and mean < best_mean)


def _refit(h, src, dst, thr):
    err = transfer_errors(h, src, dst, invert(h))
    fit_set = err <= thr
    if fit_set.sum() < 4:
        return None, fit_set
    return dlt_homography(src=src[fit_set], dst=dst[fit_set]), fit_set


def _local_optimize(h, flags, n, mean, src, dst, cfg):
    """Refit on the inlier set.

    The first ``lo_refit_rounds`` rounds select the fitting set with a
    threshold shrinking from ``lo_threshold_multiplier * inlier_threshold``
    to ``inlier_threshold``; further rounds at ``inlier_threshold`` continue
    until the inlier set is a fixed point (at most ``_MAX_SETTLE_ROUNDS``).
    A refit is kept whenever it does not lose inliers, so the inlier count
    is monotone across rounds.
    """
    rounds = cfg.lo_refit_rounds
    if rounds == 0:
        return h, flags, n, mean
    schedule = [
        cfg.inlier_threshold * (1.0 + (cfg.lo_threshold_multiplier - 1.0) * (rounds - 1 - k) / max(rounds - 1, 1))
        for k in range(rounds)
    ] + [cfg.inlier_threshold] * _MAX_SETTLE_ROUNDS
    for k, thr in enumerate(schedule):
        try:
            h_new, fit_set = _refit(h, src, dst, thr)
            scored = None if h_new is None else _score(h_new, src, dst, cfg.inlier_threshold)
        except (DegenerateConfiguration, SingularMatrix):
            scored = None
        if scored is None or scored[1] < n:
            # schedule rounds are skipped on failure; settling stops
            if k < rounds:
                continue
            break
        settled = k >= rounds - 1 and np.array_equal(scored[0], fit_set)
        h, (flags, n, mean) = h_new, scored
        if settled:
            break
    return h, flags, n, mean


def _iteration_bound(inlier_ratio: float, confidence: float, cap: int) -> int:
    w4 = inlier_ratio ** 4
    if w4 >= 1.0:
        return 0
    if w4 <= 0.0:
        return cap
    return min(cap, int(math.ceil(math.log(1.0 - confidence) / math.log(1.0 - w4))))


def estimate_arrays(src: np.ndarray, dst: np.ndarray, cfg: RansacConfig = RansacConfig()) -> RansacResult:
    src = np.asarray(src, dtype=np.float64).reshape(-1, 2)
    dst = np.asarray(dst, dtype=np.float64).reshape(-1, 2)
    n_total = len(src)
    if n_total < 4:
        raise InsufficientData(f"need at least 4 correspondences, got {n_total}")
    rng = np.random.default_rng(cfg.seed)

    best = None  # (h, flags, n, mean)
    best_n, best_mean = -1, math.inf
    bound = cfg.max_iterations
    iterations = 0
    any_valid = False
    while iterations < bound:
        iterations += 1
        idx = rng.choice(n_total, size=4, replace=False)
        if (has_collinear_triple(src[idx], cfg.min_triangle_area)
                or has_collinear_triple(dst[idx], cfg.min_triangle_area)):
            continue
        try:
            h = dlt_homography(src=src[idx], dst=dst[idx])
        except (DegenerateConfiguration, SingularMatrix):
            continue
        any_valid = True
        scored = _score(h, src, dst, cfg.inlier_threshold)
        if scored is None:
            continue
        flags, n, mean = scored
        if not _better(n, mean, best_n, best_mean):
            continue
        n_sample = n
        h, flags, n, mean = _local_optimize(h, flags, n, mean, src, dst, cfg)
        assert n >= n_sample, "local optimization lost inliers"
        best = (h, flags, n, mean)
        best_n, best_mean = n, mean
        bound = min(bound, _iteration_bound(n / n_total, cfg.confidence, cfg.max_iterations))

    if not any_valid:
        raise AllDegenerate(f"all {iterations} sampled quadruples were degenerate")
    if best is None or best_n < cfg.min_inliers:
        raise NoConsensus(
            f"best consensus {max(best_n, 0)} < min_inliers {cfg.min_inliers} after {iterations} iterations"
        )
    h, flags, n, mean = best
    return RansacResult(h=h, inlier_flags=flags, iterations_used=iterations, mean_inlier_error=mean)


def estimate(corrs: Sequence[Correspondence], cfg: RansacConfig = RansacConfig()) -> RansacResult:
    """Robust homography (frame t-1 -> frame t) from outlier-contaminated correspondences.

    Deterministic for a fixed ``cfg.seed``.
    """
    if len(corrs) < 4:
        raise InsufficientData(f"need at least 4 correspondences, got {len(corrs)}")
    src = np.array([c.src for c in corrs], dtype=np.float64)
    dst = np.array([c.dst for c in corrs], dtype=np.float64)
    return estimate_arrays(src, dst, cfg)
