"""Mutual-nearest-neighbour descriptor matching with a ratio test."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .features import hamming_matrix

DEFAULT_MAX_DISTANCE = 64
DEFAULT_RATIO = 0.8


class Match(NamedTuple):
    idx_prev: int
    idx_curr: int
    distance: int


def mutual_nearest(dist: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, j) where j is i's nearest column and i is j's nearest row.

    Ties resolve to the lowest index.
    """
    if dist.size == 0:
        return np.zeros(0, np.intp), np.zeros(0, np.intp)
    nn12 = np.argmin(dist, axis=1)
    nn21 = np.argmin(dist, axis=0)
    rows = np.arange(dist.shape[0])
    mutual = nn21[nn12] == rows
    return rows[mutual], nn12[mutual]


def match(desc_prev: np.ndarray, desc_curr: np.ndarray,
          max_distance: int = DEFAULT_MAX_DISTANCE,
          ratio: float = DEFAULT_RATIO) -> list[Match]:
    """Match frame t-1 descriptors to frame t descriptors.

    A pair survives when it is mutually nearest, its distance is at most
    ``max_distance`` and nearest / second-nearest (over the frame-t
    candidates of the frame t-1 descriptor) is below ``ratio``. With a
    single candidate the ratio test passes. Output is sorted by distance,
    then by (idx_prev, idx_curr).
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    if not 0 <= max_distance <= 256:
        raise ValueError(f"max_distance must be in [0, 256], got {max_distance}")
    dist = hamming_matrix(np.asarray(desc_prev, np.uint8).reshape(-1, 32),
                          np.asarray(desc_curr, np.uint8).reshape(-1, 32))
    if dist.size == 0:
        return []
    rows, cols = mutual_nearest(dist)
    d1 = dist[rows, cols]
    keep = d1 <= max_distance
    if dist.shape[1] > 1:
        two = np.partition(dist[rows], 1, axis=1)[:, :2]
        d2 = two[:, 1]
        # d1 == d2 == 0 is an ambiguous duplicate: reject
        passes = np.where(d2 > 0, d1 < ratio * d2, False)
        keep &= passes
    rows, cols, d1 = rows[keep], cols[keep], d1[keep]
    order = np.lexsort((cols, rows, d1))
    return [Match(int(rows[k]), int(cols[k]), int(d1[k])) for k in order]
