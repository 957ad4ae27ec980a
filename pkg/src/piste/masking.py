"""Keypoint filters: athlete box, static overlay mask, whitish snow texture.

Each filter is a pointwise predicate, so results are order-preserving
subsequences and filters commute.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch
from .features import Frame, Keypoint, keypoint_array, round_half_away


@dataclass(frozen=True)
class StaticMask:
    """Boolean bitmap, (height, width); True marks excluded pixels."""

    bitmap: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bitmap, dtype=bool)
        if b.ndim != 2:
            raise ValueError("mask bitmap must be 2-D")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "bitmap", b)

    @property
    def width(self) -> int:
        return self.bitmap.shape[1]

    @property
    def height(self) -> int:
        return self.bitmap.shape[0]


@dataclass(frozen=True)
class SnowFilterConfig:
    min_channel: int = 200
    max_spread: int = 30
    enabled: bool = True

    def __post_init__(self):
        if not 0 <= self.min_channel <= 255 or not 0 <= self.max_spread <= 255:
            raise ValueError("snow thresholds must lie in [0, 255]")


def _select(kps: Sequence[Keypoint], keep: np.ndarray) -> list[Keypoint]:
    return [k for k, ok in zip(kps, keep) if ok]


def filter_bbox(kps: Sequence[Keypoint], bbox, margin: float = 0.0) -> list[Keypoint]:
    """Drop keypoints inside ``bbox`` grown by ``margin`` (edges count as inside)."""
    if margin < 0:
        raise ValueError("margin must be >= 0")
    if len(kps) == 0:
        return []
    x, y, w, h = bbox
    p = keypoint_array(kps)
    inside = ((p[:, 0] >= x - margin) & (p[:, 0] <= x + w + margin)
              & (p[:, 1] >= y - margin) & (p[:, 1] <= y + h + margin))
    return _select(kps, ~inside)


def filter_static_mask(kps: Sequence[Keypoint], mask: StaticMask,
                       frame_size: tuple[int, int] | None = None) -> list[Keypoint]:
    """Drop keypoints whose rounded pixel is set in ``mask``."""
    if frame_size is not None and tuple(frame_size) != (mask.width, mask.height):
        raise DimensionMismatch(
            f"mask is {mask.width}x{mask.height}, frame is {frame_size[0]}x{frame_size[1]}"
        )
    if len(kps) == 0:
        return []
    pix = round_half_away(keypoint_array(kps))
    xs, ys = pix[:, 0], pix[:, 1]
    if np.any((xs < 0) | (ys < 0) | (xs >= mask.width) | (ys >= mask.height)):
        raise DimensionMismatch("keypoint lies outside the mask")
    return _select(kps, ~mask.bitmap[ys, xs])


def whitish_map(rgb: np.ndarray, cfg: SnowFilterConfig) -> np.ndarray:
    rgb = rgb.astype(np.int16)
    lo = rgb.min(axis=-1)
    hi = rgb.max(axis=-1)
    return (lo >= cfg.min_channel) & (hi - lo <= cfg.max_spread)


def filter_snow(kps: Sequence[Keypoint], frame: Frame,
                cfg: SnowFilterConfig = SnowFilterConfig()) -> list[Keypoint]:
    """Drop keypoints with >= 5 whitish pixels in their 3x3 neighbourhood."""
    if not cfg.enabled or len(kps) == 0:
        return list(kps)
    pix = round_half_away(keypoint_array(kps))
    offs = np.arange(-1, 2)
    xs = np.clip(pix[:, 0, None, None] + offs[None, None, :], 0, frame.width - 1)
    ys = np.clip(pix[:, 1, None, None] + offs[None, :, None], 0, frame.height - 1)
    count = whitish_map(frame.rgb[ys, xs], cfg).sum(axis=(1, 2))
    return _select(kps, count < 5)
