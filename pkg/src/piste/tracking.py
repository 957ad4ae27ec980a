"""Athlete bounding boxes: a ZNCC template tracker, external track files, footpoints."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import signal

from .errors import InvalidBox, IoError, LostTarget, MissingFrame, NonMonotonicFrames, ParseError
from .features import Frame
from .geometry import Point2

MIN_INIT_SIZE = 8
SEARCH_SCALE = 2.5
LOST_THRESHOLD = 0.2
TEMPLATE_ALPHA = 0.1


class BBox(NamedTuple):
    """Axis-aligned box: top-left corner (x, y), width w, height h, in pixels."""

    x: float
    y: float
    w: float
    h: float

    def iou(self, other: "BBox") -> float:
        ix = max(0.0, min(self.x + self.w, other.x + other.w) - max(self.x, other.x))
        iy = max(0.0, min(self.y + self.h, other.y + other.h) - max(self.y, other.y))
        inter = ix * iy
        union = self.w * self.h + other.w * other.h - inter
        return inter / union if union > 0 else 0.0


def footpoint(b: BBox) -> Point2:
    """Bottom-centre of the box: the athlete's contact point with the ground."""
    return Point2(b.x + b.w / 2.0, b.y + b.h)


def validate_box(b: BBox, width: int, height: int) -> None:
    if not all(np.isfinite(v) for v in b):
        raise InvalidBox(f"non-finite box {tuple(b)}")
    if b.w <= 0 or b.h <= 0:
        raise InvalidBox(f"box must have positive size, got w={b.w}, h={b.h}")
    if b.x + b.w <= 0 or b.y + b.h <= 0 or b.x >= width or b.y >= height:
        raise InvalidBox(f"box {tuple(b)} does not intersect the {width}x{height} frame")


def _pixel_rect(b: BBox) -> tuple[int, int, int, int]:
    return int(round(b.x)), int(round(b.y)), int(round(b.w)), int(round(b.h))


@dataclass
class TrackerState:
    """Mutable state of one template-tracking sequence."""

    template: np.ndarray
    box: BBox
    frame_size: tuple[int, int]
    alpha: float = TEMPLATE_ALPHA
    lost_threshold: float = LOST_THRESHOLD
    last_score: float = 1.0


def init_tracker(frame0: Frame, b0: BBox, alpha: float = TEMPLATE_ALPHA,
                 lost_threshold: float = LOST_THRESHOLD) -> TrackerState:
    b0 = BBox(*map(float, b0))
    validate_box(b0, frame0.width, frame0.height)
    x, y, w, h = _pixel_rect(b0)
    if w < MIN_INIT_SIZE or h < MIN_INIT_SIZE:
        raise InvalidBox(f"initial box must be at least {MIN_INIT_SIZE}x{MIN_INIT_SIZE}, got {w}x{h}")
    if x < 0 or y < 0 or x + w > frame0.width or y + h > frame0.height:
        raise InvalidBox(f"initial box {tuple(b0)} is not fully inside the frame")
    template = frame0.gray[y:y + h, x:x + w].astype(np.float64)
    return TrackerState(template=template, box=b0, frame_size=frame0.size,
                        alpha=alpha, lost_threshold=lost_threshold)


def zncc_map(window: np.ndarray, template: np.ndarray) -> np.ndarray:
    """ZNCC of ``template`` at every fully-contained offset inside ``window``."""
    th, tw = template.shape
    t0 = template - template.mean()
    t_norm = np.sqrt(np.sum(t0 * t0))
    win = window.astype(np.float64)
    out_shape = (win.shape[0] - th + 1, win.shape[1] - tw + 1)
    if t_norm == 0.0 or out_shape[0] < 1 or out_shape[1] < 1:
        return np.zeros((max(out_shape[0], 0), max(out_shape[1], 0)))
    num = signal.correlate(win, t0, mode="valid", method="fft")

    def box_sum(a):
        c = np.pad(np.cumsum(np.cumsum(a, axis=0), axis=1), ((1, 0), (1, 0)))
        return c[th:, tw:] - c[:-th, tw:] - c[th:, :-tw] + c[:-th, :-tw]

    n = th * tw
    s1 = box_sum(win)
    s2 = box_sum(win * win)
    var = np.maximum(s2 - s1 * s1 / n, 0.0)
    denom = t_norm * np.sqrt(var)
    ok = denom > 1e-6 * t_norm
    return np.where(ok, num / np.where(ok, denom, 1.0), 0.0)


def track_step(state: TrackerState, frame: Frame) -> BBox:
    """Advance the tracker by one frame.

    Raises :class:`LostTarget` (state untouched) when the best ZNCC score is
    below the lost threshold.
    """
    if frame.size != state.frame_size:
        raise ValueError(f"frame size {frame.size} differs from {state.frame_size}")
    th, tw = state.template.shape
    ox, oy = int(round(state.box.x)), int(round(state.box.y))
    pad_x = int(np.ceil((SEARCH_SCALE - 1.0) / 2.0 * tw))
    pad_y = int(np.ceil((SEARCH_SCALE - 1.0) / 2.0 * th))
    wx0, wy0 = max(0, ox - pad_x), max(0, oy - pad_y)
    wx1 = min(frame.width, ox + tw + pad_x)
    wy1 = min(frame.height, oy + th + pad_y)
    scores = zncc_map(frame.gray[wy0:wy1, wx0:wx1], state.template)
    if scores.size == 0:
        raise LostTarget("search window smaller than the template", previous=state.box)
    iy, ix = np.unravel_index(int(np.argmax(scores)), scores.shape)
    best = float(scores[iy, ix])
    if best < state.lost_threshold:
        raise LostTarget(f"best ZNCC {best:.3f} < {state.lost_threshold}", score=best,
                         previous=state.box)
    bx, by = wx0 + int(ix), wy0 + int(iy)
    b = state.box
    nx = min(max(b.x + (bx - ox), 0.0), frame.width - b.w)
    ny = min(max(b.y + (by - oy), 0.0), frame.height - b.h)
    crop = frame.gray[by:by + th, bx:bx + tw].astype(np.float64)
    state.template = (1.0 - state.alpha) * state.template + state.alpha * crop
    state.box = BBox(nx, ny, b.w, b.h)
    state.last_score = best
    return state.box


@dataclass
class TrackSource:
    """Per-frame boxes from an external tracker; ``None`` marks a declared gap."""

    boxes: dict[int, BBox | None] = field(default_factory=dict)
    variant: str = "external_file"

    def __len__(self) -> int:
        return len(self.boxes)

    def box(self, frame_index: int) -> BBox | None:
        try:
            return self.boxes[frame_index]
        except KeyError:
            raise MissingFrame(f"track file has no entry for frame {frame_index}") from None

    def first(self) -> tuple[int, BBox]:
        for k in sorted(self.boxes):
            if self.boxes[k] is not None:
                return k, self.boxes[k]
        raise MissingFrame("track file contains no boxes")


TRACK_HEADER = ("frame", "x", "y", "w", "h")


def parse_track_csv(text: str) -> TrackSource:
    boxes: dict[int, BBox | None] = {}
    last = None
    seen_data = False
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if not seen_data and cells[0].lower() == "frame":
            if tuple(c.lower() for c in cells) != TRACK_HEADER:
                raise ParseError(f"expected header {','.join(TRACK_HEADER)}", line=lineno)
            seen_data = True
            continue
        seen_data = True
        if len(cells) != 5:
            raise ParseError(f"expected 5 fields, got {len(cells)}", line=lineno)
        try:
            idx = int(cells[0])
        except ValueError:
            raise ParseError(f"bad frame index {cells[0]!r}", line=lineno, column=1) from None
        if last is not None and idx <= last:
            raise NonMonotonicFrames(f"frame {idx} after frame {last} (line {lineno})")
        last = idx
        if all(c == "" for c in cells[1:]):
            boxes[idx] = None
            continue
        vals = []
        for col, c in enumerate(cells[1:], start=2):
            try:
                v = float(c)
            except ValueError:
                raise ParseError(f"bad number {c!r}", line=lineno, column=col) from None
            if not np.isfinite(v):
                raise ParseError(f"non-finite number {c!r}", line=lineno, column=col)
            vals.append(v)
        if vals[2] <= 0 or vals[3] <= 0:
            raise ParseError("box width and height must be positive", line=lineno,
                             column=4 if vals[2] <= 0 else 5)
        boxes[idx] = BBox(*vals)
    return TrackSource(boxes)


def load_track_file(path) -> TrackSource:
    """Read a ``frame,x,y,w,h`` CSV (header optional, ``#`` comments, empty box = gap)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from None
    return parse_track_csv(text)


def format_track_csv(boxes: dict[int, BBox | None]) -> str:
    lines = [",".join(TRACK_HEADER)]
    for k in sorted(boxes):
        b = boxes[k]
        lines.append(f"{k},,,," if b is None else ",".join([str(k)] + [repr(float(v)) for v in b]))
    return "\n".join(lines) + "\n"
