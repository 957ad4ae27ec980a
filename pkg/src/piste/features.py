"""Corner keypoints (Shi-Tomasi) and 256-bit binary descriptors."""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from ._brief_pairs import BRIEF_PAIRS
from .errors import BorderViolation
from .geometry import Point2

PATCH_HALF = 15
DESCRIPTOR_BYTES = 32
# Integer candidate positions keep one extra pixel so sub-pixel refinement
# (at most 0.5 px) cannot cross the descriptor margin.
_DETECT_MARGIN = PATCH_HALF + 1

DEFAULT_MAX_KEYPOINTS = 1024
DEFAULT_NMS_RADIUS = 8

_PAIRS = np.asarray(BRIEF_PAIRS, dtype=np.intp)


class Frame:
    """An RGB image, (height, width, 3) uint8, with a derived luma plane."""

    __slots__ = ("rgb", "_gray", "_box5")

    def __init__(self, rgb: np.ndarray):
        rgb = np.asarray(rgb)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise ValueError(f"expected an (H, W, 3) array, got shape {rgb.shape}")
        if rgb.dtype != np.uint8:
            raise ValueError(f"expected uint8 pixels, got {rgb.dtype}")
        if rgb.shape[0] < 16 or rgb.shape[1] < 16:
            raise ValueError(f"frame must be at least 16x16, got {rgb.shape[1]}x{rgb.shape[0]}")
        if rgb.flags.writeable or not rgb.flags.c_contiguous:
            rgb = np.array(rgb, order="C")  # never freeze the caller's buffer
        rgb.setflags(write=False)
        self.rgb = rgb
        self._gray = None
        self._box5 = None

    @classmethod
    def from_gray(cls, gray: np.ndarray) -> "Frame":
        g = np.clip(np.rint(gray), 0, 255).astype(np.uint8)
        return cls(np.repeat(g[:, :, None], 3, axis=2))

    @property
    def width(self) -> int:
        return self.rgb.shape[1]

    @property
    def height(self) -> int:
        return self.rgb.shape[0]

    @property
    def size(self) -> tuple[int, int]:
        return self.width, self.height

    @property
    def gray(self) -> np.ndarray:
        if self._gray is None:
            c = self.rgb.astype(np.int32)
            # round(0.299 R + 0.587 G + 0.114 B) in exact integer arithmetic
            g = (299 * c[..., 0] + 587 * c[..., 1] + 114 * c[..., 2] + 500) // 1000
            g = g.astype(np.uint8)
            g.setflags(write=False)
            self._gray = g
        return self._gray

    @property
    def box5(self) -> np.ndarray:
        """5x5 box sum of the luma plane (exact integers, edge-replicated)."""
        if self._box5 is None:
            p = np.pad(self.gray.astype(np.int32), 2, mode="edge")
            c = np.cumsum(np.cumsum(p, axis=0), axis=1)
            c = np.pad(c, ((1, 0), (1, 0)))
            s = c[5:, 5:] - c[:-5, 5:] - c[5:, :-5] + c[:-5, :-5]
            s.setflags(write=False)
            self._box5 = s
        return self._box5

    def __eq__(self, other) -> bool:
        return isinstance(other, Frame) and np.array_equal(self.rgb, other.rgb)

    def __repr__(self) -> str:
        return f"Frame({self.width}x{self.height})"


class Keypoint(NamedTuple):
    pos: Point2
    score: float


def keypoint_array(kps: Sequence[Keypoint]) -> np.ndarray:
    """(N, 2) float array of keypoint positions."""
    if len(kps) == 0:
        return np.zeros((0, 2))
    return np.array([k.pos for k in kps], dtype=np.float64)


def round_half_away(v):
    v = np.asarray(v, dtype=np.float64)
    return (np.sign(v) * np.floor(np.abs(v) + 0.5)).astype(np.intp)


def corner_response(gray: np.ndarray) -> np.ndarray:
    """Minimum eigenvalue of the 3x3-summed Sobel gradient covariance."""
    g = np.asarray(gray, dtype=np.float64)
    gx = ndimage.sobel(g, axis=1, mode="reflect")
    gy = ndimage.sobel(g, axis=0, mode="reflect")
    sxx = ndimage.uniform_filter(gx * gx, 3, mode="reflect")
    syy = ndimage.uniform_filter(gy * gy, 3, mode="reflect")
    sxy = ndimage.uniform_filter(gx * gy, 3, mode="reflect")
    half_tr = 0.5 * (sxx + syy)
    disc = np.sqrt(0.25 * (sxx - syy) ** 2 + sxy * sxy)
    # uniform_filter averages; scale back to a sum over the window
    return np.maximum(9.0 * (half_tr - disc), 0.0)


def _subpixel_offsets(resp: np.ndarray, ys: np.ndarray, xs: np.ndarray):
    def fit(lo, mid, hi):
        denom = lo - 2.0 * mid + hi
        off = np.where(denom < 0, 0.5 * (lo - hi) / np.where(denom < 0, denom, -1.0), 0.0)
        return np.clip(off, -0.5, 0.5)

    c = resp[ys, xs]
    dx = fit(resp[ys, xs - 1], c, resp[ys, xs + 1])
    dy = fit(resp[ys - 1, xs], c, resp[ys + 1, xs])
    return dx, dy


def detect(frame: Frame, max_keypoints: int = DEFAULT_MAX_KEYPOINTS,
           nms_radius: int = DEFAULT_NMS_RADIUS) -> list[Keypoint]:
    """Shi-Tomasi corners with non-maximum suppression and sub-pixel refinement.

    Returned keypoints are sorted by score (descending), lie at least
    ``PATCH_HALF`` px inside the frame, and are pairwise more than
    ``nms_radius`` apart in Chebyshev distance.
    """
    if max_keypoints < 1:
        raise ValueError("max_keypoints must be >= 1")
    if nms_radius < 1:
        raise ValueError("nms_radius must be >= 1")
    resp = corner_response(frame.gray)
    peak = resp.max()
    if peak <= 0.0:
        return []
    floor = 0.01 * peak

    local_max = ndimage.maximum_filter(resp, size=2 * nms_radius + 1, mode="constant", cval=0.0)
    cand = (resp == local_max) & (resp >= floor) & (resp > 0.0)
    m = _DETECT_MARGIN
    cand[:m, :] = False
    cand[-m:, :] = False
    cand[:, :m] = False
    cand[:, -m:] = False
    ys, xs = np.nonzero(cand)
    if len(ys) == 0:
        return []
    scores = resp[ys, xs]
    # score descending, then raster order
    order = np.lexsort((xs, ys, -scores))
    ys, xs, scores = ys[order], xs[order], scores[order]
    dx, dy = _subpixel_offsets(resp, ys, xs)
    px = xs + dx
    py = ys + dy

    # greedy suppression on refined positions, bucketed on a grid of cell size r
    r = float(nms_radius)
    cell = int(nms_radius)
    grid: dict[tuple[int, int], list[int]] = {}
    kept: list[int] = []
    for i in range(len(px)):
        x, y = px[i], py[i]
        cx, cy = int(x // cell), int(y // cell)
        clash = False
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                for j in grid.get((gx, gy), ()):
                    if max(abs(px[j] - x), abs(py[j] - y)) <= r:
                        clash = True
                        break
                if clash:
                    break
            if clash:
                break
        if clash:
            continue
        grid.setdefault((cx, cy), []).append(i)
        kept.append(i)
        if len(kept) >= max_keypoints:
            break
    return [Keypoint(Point2(float(px[i]), float(py[i])), float(scores[i])) for i in kept]


def describe(frame: Frame, kps: Sequence[Keypoint]) -> np.ndarray:
    """256-bit descriptors, one row of 32 packed bytes per keypoint."""
    if len(kps) == 0:
        return np.zeros((0, DESCRIPTOR_BYTES), dtype=np.uint8)
    pos = round_half_away(keypoint_array(kps))
    xs, ys = pos[:, 0], pos[:, 1]
    w, h = frame.width, frame.height
    bad = (xs < PATCH_HALF) | (ys < PATCH_HALF) | (xs > w - 1 - PATCH_HALF) | (ys > h - 1 - PATCH_HALF)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise BorderViolation(
            f"keypoint {i} at {tuple(kps[i].pos)} is closer than {PATCH_HALF} px to the border"
        )
    img = frame.box5
    a = img[ys[:, None] + _PAIRS[None, :, 1], xs[:, None] + _PAIRS[None, :, 0]]
    b = img[ys[:, None] + _PAIRS[None, :, 3], xs[:, None] + _PAIRS[None, :, 2]]
    return np.packbits(a < b, axis=1)


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.unpackbits(np.bitwise_xor(np.asarray(a, np.uint8), np.asarray(b, np.uint8))).sum())


def hamming_matrix(da: np.ndarray, db: np.ndarray) -> np.ndarray:
    """All-pairs Hamming distances, (N, M) int32."""
    if len(da) == 0 or len(db) == 0:
        return np.zeros((len(da), len(db)), dtype=np.int32)
    ba = np.unpackbits(da, axis=1).astype(np.float32)
    bb = np.unpackbits(db, axis=1).astype(np.float32)
    # |a xor b| = a.(1-b) + (1-a).b ; exact in float32 for counts <= 256
    d = ba @ (1.0 - bb).T + (1.0 - ba) @ bb.T
    return np.rint(d).astype(np.int32)
