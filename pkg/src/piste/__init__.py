"""Athlete trajectory reconstruction by chaining inter-frame homographies."""

from .errors import PisteError
from .features import Frame, Keypoint, describe, detect
from .geometry import Correspondence, Homography, Point2, compose, dlt_homography, invert
from .masking import SnowFilterConfig, StaticMask
from .matching import Match, match
from .ransac import RansacConfig, RansacResult, estimate
from .reconstruction import (
    EngineConfig,
    EngineState,
    SpeedSeries,
    Trajectory,
    annotate_speed,
    compare_runs,
    run,
    smooth,
    start,
    step,
)
from .render import OverlayStyle, render_overlay
from .synthetic import GroundTruth, SceneConfig, SyntheticScene, generate, measure_error
from .tracking import BBox, TrackSource, footpoint, init_tracker, track_step

__version__ = "0.1.0"
