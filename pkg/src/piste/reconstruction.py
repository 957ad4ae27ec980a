"""Online trajectory reconstruction by chaining inter-frame homographies.

At every frame the engine tracks the athlete, matches static-background
keypoints against the previous frame, estimates the frame-to-frame
homography, re-maps the accumulated trajectory into the new frame and
appends the new footpoint. The trajectory therefore always lives in the
coordinate system of the most recent frame.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AllDegenerate, InsufficientData, LostTarget, NoConsensus
from .features import (
    DEFAULT_MAX_KEYPOINTS,
    DEFAULT_NMS_RADIUS,
    Frame,
    Keypoint,
    describe,
    detect,
    keypoint_array,
)
from .geometry import Homography, Point2, compose, invert, transform_points
from .masking import SnowFilterConfig, StaticMask, filter_bbox, filter_snow, filter_static_mask
from .matching import DEFAULT_MAX_DISTANCE, DEFAULT_RATIO, match
from .ransac import RansacConfig, estimate_arrays
from .smoothing import catmull_rom
from .tracking import (
    TEMPLATE_ALPHA,
    BBox,
    TrackerState,
    TrackSource,
    footpoint,
    init_tracker,
    track_step,
    validate_box,
)

log = logging.getLogger(__name__)

MEASURED = "measured"
INTERPOLATED = "interpolated"
OFF_HORIZON = "off_horizon"


@dataclass(frozen=True)
class EngineConfig:
    max_keypoints: int = DEFAULT_MAX_KEYPOINTS
    nms_radius: int = DEFAULT_NMS_RADIUS
    max_distance: int = DEFAULT_MAX_DISTANCE
    ratio: float = DEFAULT_RATIO
    ransac: RansacConfig = field(default_factory=RansacConfig)
    snow: SnowFilterConfig = field(default_factory=SnowFilterConfig)
    static_mask: StaticMask | None = None
    bbox_margin: float = 4.0
    min_matches: int = 8
    seed: int = 0
    tracker_alpha: float = TEMPLATE_ALPHA
    keep_history: bool = False


@dataclass
class Trajectory:
    """Athlete positions for frames 0..frame_index, in frame ``frame_index`` pixels."""

    points: np.ndarray
    flags: list[str]
    frame_index: int

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        if len(self.flags) != len(self.points):
            raise ValueError("one flag per point required")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def visible(self) -> np.ndarray:
        return np.array([f != OFF_HORIZON for f in self.flags], dtype=bool)

    def visible_points(self) -> np.ndarray:
        return self.points[self.visible]

    def as_points(self) -> list[Point2]:
        return [Point2(float(x), float(y)) for x, y in self.points]

    def copy(self) -> "Trajectory":
        return Trajectory(self.points.copy(), list(self.flags), self.frame_index)

    def mapped(self, h: Homography, frame_index: int | None = None) -> "Trajectory":
        """Points re-expressed through ``h``; horizon crossings keep their last
        finite position and become ``off_horizon``."""
        out, ok = transform_points(h, self.points)
        flags = list(self.flags)
        for i in np.flatnonzero(~ok):
            out[i] = self.points[i]
            flags[i] = OFF_HORIZON
        return Trajectory(out, flags, self.frame_index if frame_index is None else frame_index)

    def appended(self, p: Point2, flag: str) -> "Trajectory":
        pts = np.vstack([self.points, np.asarray([p], dtype=np.float64)])
        return Trajectory(pts, self.flags + [flag], self.frame_index)


@dataclass
class FrameFeatures:
    keypoints: list[Keypoint]
    positions: np.ndarray
    descriptors: np.ndarray

    def __len__(self) -> int:
        return len(self.keypoints)


@dataclass
class FrameRecord:
    """Per-frame diagnostics; ``homography`` maps frame t-1 to frame t."""

    frame: int
    box: BBox
    tracker: str
    keypoints: int
    matches: int = 0
    inliers: int = 0
    homography: Homography | None = None
    bridged: bool = False
    reason: str | None = None

    def as_dict(self) -> dict:
        return {
            "frame": self.frame,
            "box": [float(v) for v in self.box],
            "tracker": self.tracker,
            "keypoints": self.keypoints,
            "matches": self.matches,
            "inliers": self.inliers,
            "homography": None if self.homography is None else self.homography.as_list(),
            "bridged": self.bridged,
            "reason": self.reason,
        }


@dataclass
class EngineState:
    trajectory: Trajectory
    tracker: TrackerState | TrackSource
    prev_features: FrameFeatures
    box: BBox
    config: EngineConfig
    diagnostics: list[FrameRecord] = field(default_factory=list)
    features_history: list[FrameFeatures] = field(default_factory=list)
    trajectory_history: list[Trajectory] = field(default_factory=list)

    @property
    def frame_index(self) -> int:
        return self.trajectory.frame_index

    def homography_chain(self) -> list[Homography]:
        """H_1..H_t (frame k-1 -> frame k); bridged pairs contribute identity."""
        return [r.homography for r in self.diagnostics[1:]]


def frame_seed(seed: int, frame_index: int) -> int:
    """Independent, reproducible RANSAC seed for one frame pair."""
    return int(np.random.SeedSequence([seed, frame_index]).generate_state(1, dtype=np.uint64)[0])


def extract_features(frame: Frame, box: BBox | None, config: EngineConfig) -> FrameFeatures:
    """Detect, mask (athlete box, static overlay, snow) and describe."""
    kps = detect(frame, config.max_keypoints, config.nms_radius)
    if box is not None:
        kps = filter_bbox(kps, box, config.bbox_margin)
    if config.static_mask is not None:
        kps = filter_static_mask(kps, config.static_mask, frame.size)
    kps = filter_snow(kps, frame, config.snow)
    return FrameFeatures(kps, keypoint_array(kps), describe(frame, kps))


@dataclass
class PairEstimate:
    h: Homography | None
    matches: int
    inliers: int
    reason: str | None


def estimate_pair(prev: FrameFeatures, curr: FrameFeatures, config: EngineConfig,
                  seed: int) -> PairEstimate:
    """Homography mapping ``prev`` keypoint coordinates to ``curr``; ``h`` is None on failure."""
    ms = match(prev.descriptors, curr.descriptors, config.max_distance, config.ratio)
    if len(ms) < config.min_matches:
        return PairEstimate(None, len(ms), 0, "too_few_matches")
    ip = np.fromiter((m.idx_prev for m in ms), dtype=np.intp, count=len(ms))
    ic = np.fromiter((m.idx_curr for m in ms), dtype=np.intp, count=len(ms))
    cfg = replace(config.ransac, seed=seed)
    try:
        res = estimate_arrays(prev.positions[ip], curr.positions[ic], cfg)
    except NoConsensus:
        return PairEstimate(None, len(ms), 0, "no_consensus")
    except AllDegenerate:
        return PairEstimate(None, len(ms), 0, "all_degenerate")
    except InsufficientData:
        return PairEstimate(None, len(ms), 0, "insufficient_data")
    return PairEstimate(res.h, len(ms), res.n_inliers, None)


def start(frame0: Frame, b0: BBox | None, config: EngineConfig = EngineConfig(),
          track_source: TrackSource | None = None) -> EngineState:
    """Seed the trajectory with the footpoint of the initial box."""
    if track_source is not None:
        if b0 is None:
            b0 = track_source.box(0)
            if b0 is None:
                raise ValueError("track file declares a gap at frame 0; an initial box is required")
        b0 = BBox(*map(float, b0))
        validate_box(b0, frame0.width, frame0.height)
        tracker: TrackerState | TrackSource = track_source
    else:
        if b0 is None:
            raise ValueError("an initial box or a track source is required")
        tracker = init_tracker(frame0, BBox(*map(float, b0)), alpha=config.tracker_alpha)
        b0 = tracker.box
    feats = extract_features(frame0, b0, config)
    traj = Trajectory(np.asarray([footpoint(b0)]), [MEASURED], 0)
    state = EngineState(traj, tracker, feats, b0, config)
    state.diagnostics.append(FrameRecord(0, b0, MEASURED, len(feats)))
    if config.keep_history:
        state.features_history.append(feats)
        state.trajectory_history.append(traj.copy())
    return state


def _next_box(state: EngineState, frame: Frame, t: int) -> tuple[BBox, str]:
    if isinstance(state.tracker, TrackSource):
        b = state.tracker.box(t)
        if b is None:
            return state.box, INTERPOLATED
        return BBox(*map(float, b)), MEASURED
    try:
        return track_step(state.tracker, frame), MEASURED
    except LostTarget as exc:
        log.info("frame %d: target lost (%s); reusing previous box", t, exc)
        return state.box, INTERPOLATED


def step(state: EngineState, frame: Frame) -> Trajectory:
    """Process the next frame; returns the trajectory in that frame's coordinates."""
    t = state.frame_index + 1
    box, track_flag = _next_box(state, frame, t)
    feats = extract_features(frame, box, state.config)
    est = estimate_pair(state.prev_features, feats, state.config, frame_seed(state.config.seed, t))
    bridged = est.h is None
    h = Homography.identity() if bridged else est.h
    if bridged:
        log.info("frame %d: bridged with identity (%s)", t, est.reason)

    traj = state.trajectory.mapped(h, frame_index=t).appended(footpoint(box), track_flag)
    state.trajectory = traj
    state.prev_features = feats
    state.box = box
    state.diagnostics.append(FrameRecord(
        frame=t, box=box, tracker=track_flag, keypoints=len(feats), matches=est.matches,
        inliers=est.inliers, homography=h, bridged=bridged, reason=est.reason,
    ))
    if state.config.keep_history:
        state.features_history.append(feats)
        state.trajectory_history.append(traj.copy())
    return traj


def run(frames: Iterable[Frame], b0: BBox | None = None, config: EngineConfig = EngineConfig(),
        track_source: TrackSource | None = None) -> EngineState:
    it = iter(frames)
    state = start(next(it), b0, config, track_source)
    for frame in it:
        step(state, frame)
    return state


def smooth(traj: Trajectory, samples_per_segment: int = 8) -> np.ndarray:
    """Render-time spline through the usable (non off-horizon) points."""
    return catmull_rom(traj.visible_points(), samples_per_segment)


def trajectory_at(final: Trajectory, chain: Sequence[Homography], frame: int) -> Trajectory:
    """Re-express the first ``frame + 1`` points of ``final`` in frame ``frame``.

    ``chain[k-1]`` maps frame k-1 to frame k.
    """
    if not 0 <= frame <= final.frame_index:
        raise IndexError(f"frame {frame} outside 0..{final.frame_index}")
    back = Homography.identity()
    for k in range(final.frame_index, frame, -1):
        back = compose(back, chain[k - 1])
    back = invert(back)
    part = Trajectory(final.points[:frame + 1], final.flags[:frame + 1], final.frame_index)
    return part.mapped(back, frame_index=frame)


@dataclass
class RunRecord:
    """What a comparison needs from one processed video."""

    features: Sequence[FrameFeatures]
    trajectories: Mapping[int, Trajectory]

    @classmethod
    def from_state(cls, state: EngineState) -> "RunRecord":
        if not state.config.keep_history:
            raise ValueError("engine must run with keep_history=True to be compared")
        return cls(state.features_history, dict(enumerate(state.trajectory_history)))


@dataclass
class Comparison:
    overlays: dict[int, Trajectory]
    homographies: dict[int, Homography]
    omitted: dict[int, str]


def compare_runs(ref: RunRecord, other: RunRecord, pairing: Mapping[int, int],
                 config: EngineConfig = EngineConfig()) -> Comparison:
    """Map the other athlete's trajectory into each time-paired reference frame."""
    overlays: dict[int, Trajectory] = {}
    homs: dict[int, Homography] = {}
    omitted: dict[int, str] = {}
    for t in range(len(ref.features)):
        s = pairing.get(t)
        if s is None:
            omitted[t] = "unpaired"
            continue
        if s not in other.trajectories or not 0 <= s < len(other.features):
            omitted[t] = "other_frame_missing"
            continue
        est = estimate_pair(other.features[s], ref.features[t], config, frame_seed(config.seed, t))
        if est.h is None:
            omitted[t] = est.reason or "no_consensus"
            continue
        homs[t] = est.h
        overlays[t] = other.trajectories[s].mapped(est.h, frame_index=t)
    return Comparison(overlays, homs, omitted)


@dataclass(frozen=True)
class SpeedSeries:
    """Per-frame speeds (m/s) over a contiguous frame range."""

    first_frame: int
    speeds: tuple[float, ...]

    def __post_init__(self):
        if any(not np.isfinite(v) or v < 0 for v in self.speeds):
            raise ValueError("speeds must be finite and non-negative")

    @classmethod
    def from_mapping(cls, by_frame: Mapping[int, float]) -> "SpeedSeries":
        if not by_frame:
            return cls(0, ())
        keys = sorted(by_frame)
        if keys != list(range(keys[0], keys[-1] + 1)):
            raise ValueError("speed series must cover a contiguous frame range")
        return cls(keys[0], tuple(float(by_frame[k]) for k in keys))

    def get(self, frame: int) -> float | None:
        i = frame - self.first_frame
        return self.speeds[i] if 0 <= i < len(self.speeds) else None


def annotate_speed(traj: Trajectory, speeds: SpeedSeries) -> list[tuple[Point2, float]]:
    """Pair each visible trajectory point (point i = frame i) with its frame's speed."""
    out = []
    for i, (p, flag) in enumerate(zip(traj.points, traj.flags)):
        v = speeds.get(i)
        if v is None or flag == OFF_HORIZON:
            continue
        out.append((Point2(float(p[0]), float(p[1])), v))
    return out
