"""Synthetic planar scenes with exact ground truth.

A textured world plane is rendered through a scripted camera. By default
world coordinates coincide with frame 0 pixel coordinates, so the cumulative
camera map ``C_t`` (world -> frame t) starts at the identity and the
inter-frame homography is ``H_t = C_t C_{t-1}^-1``. A ``view`` script
displaces the starting camera (``C_0 = V^-1``), which gives a second
viewpoint of the same world when combined with a fixed ``world`` rectangle.

Camera scripts describe how the *camera* moves per frame, expressed as a
homography ``D`` in image coordinates; the scene content then moves by
``H_t = D^-1``. Panning right (``translate 2 0``) makes the world slide
left (``H_t = translate(-2, 0)``); ``zoom 1.01`` widens the field of view so
content shrinks by 1/1.01 about the frame centre.

Whitish "snow" bands can cover a fraction of the world. Their optional
speckle is a glare pattern fixed to the camera rather than to the ground,
which is what makes keypoints on snow misleading for motion estimation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ConfigError, LengthMismatch, SingularMatrix
from .features import Frame
from .geometry import Homography, compose, invert, transform_points
from .reconstruction import OFF_HORIZON, Trajectory
from .tracking import BBox, footpoint

CANVAS_MARGIN = 48
MAX_CANVAS_SIDE = 8000
CAMERA_PRIMITIVES = {"translate": 2, "rotate": 1, "zoom": 1, "tilt": 2}


@dataclass(frozen=True)
class SceneConfig:
    width: int = 1280
    height: int = 720
    frames: int = 100
    seed: int = 0
    markers: int = 120
    texture_contrast: float = 40.0
    texture_scale: float = 3.0
    snow_fraction: float = 0.0
    snow_speckle: float = 0.0
    snow_level: int = 236
    camera: tuple[tuple[str, tuple[float, ...]], ...] = ()
    view: tuple[tuple[str, tuple[float, ...]], ...] = ()
    world: tuple[int, int, int, int] | None = None
    athlete_start: tuple[float, float] = (400.0, 300.0)
    athlete_velocity: tuple[float, float] = (3.0, 1.5)
    athlete_sway: tuple[float, float] = (0.0, 50.0)
    athlete_size: tuple[float, float] = (40.0, 90.0)

    def __post_init__(self):
        if self.width < 64 or self.height < 64:
            raise ConfigError("frames must be at least 64x64")
        if self.frames < 1:
            raise ConfigError("frames must be >= 1")
        if not 0.0 <= self.snow_fraction <= 0.7:
            raise ConfigError("snow_fraction must lie in [0, 0.7]")
        if self.athlete_size[0] <= 0 or self.athlete_size[1] <= 0:
            raise ConfigError("athlete_size must be positive")
        if self.athlete_sway[0] != 0 and self.athlete_sway[1] <= 0:
            raise ConfigError("athlete_sway period must be positive")
        if self.world is not None and (self.world[2] <= self.world[0] or self.world[3] <= self.world[1]):
            raise ConfigError("world rectangle must be x0 y0 x1 y1 with x1 > x0, y1 > y0")
        for kind, args in self.camera + self.view:
            if kind not in CAMERA_PRIMITIVES:
                raise ConfigError(f"unknown camera primitive {kind!r}")
            if len(args) != CAMERA_PRIMITIVES[kind]:
                raise ConfigError(f"{kind} takes {CAMERA_PRIMITIVES[kind]} argument(s)")


# --- config file -----------------------------------------------------------

_PAIR_KEYS = ("athlete_start", "athlete_velocity", "athlete_sway", "athlete_size")
_INT_KEYS = ("width", "height", "frames", "seed", "markers", "snow_level")
_FLOAT_KEYS = ("texture_contrast", "texture_scale", "snow_fraction", "snow_speckle")


def parse_camera(text: str) -> tuple[tuple[str, tuple[float, ...]], ...]:
    prims = []
    for part in text.split(";"):
        tokens = part.split()
        if not tokens:
            continue
        try:
            prims.append((tokens[0].lower(), tuple(float(v) for v in tokens[1:])))
        except ValueError:
            raise ConfigError(f"bad camera primitive {part.strip()!r}") from None
    return tuple(prims)


def parse_scene(text: str) -> SceneConfig:
    """Parse ``key = value`` lines (``#`` comments). See :func:`format_scene`."""
    kw: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _INT_KEYS:
                kw[key] = int(value)
            elif key in _FLOAT_KEYS:
                kw[key] = float(value)
            elif key in _PAIR_KEYS:
                a, b = (float(v) for v in value.split())
                kw[key] = (a, b)
            elif key in ("camera", "view"):
                kw[key] = parse_camera(value)
            elif key == "world":
                kw[key] = None if value.lower() == "auto" else tuple(int(v) for v in value.split())
                if kw[key] is not None and len(kw[key]) != 4:
                    raise ValueError
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from None
    return SceneConfig(**kw)


def load_scene(path) -> SceneConfig:
    return parse_scene(Path(path).read_text(encoding="utf-8"))


def format_scene(cfg: SceneConfig) -> str:
    lines = ["# piste synthetic scene"]
    for key, value in asdict(cfg).items():
        if key in ("camera", "view"):
            value = "; ".join(" ".join([k] + [repr(float(a)) for a in args]) for k, args in value)
        elif key == "world":
            value = "auto" if value is None else " ".join(str(int(v)) for v in value)
        elif key in _PAIR_KEYS:
            value = f"{float(value[0])!r} {float(value[1])!r}"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


# --- camera ----------------------------------------------------------------

def camera_motion(cfg: SceneConfig, script=None) -> Homography:
    """Per-frame camera motion D (primitives applied in script order)."""
    cx, cy = (cfg.width - 1) / 2.0, (cfg.height - 1) / 2.0
    d = Homography.identity()
    for kind, args in (cfg.camera if script is None else script):
        if kind == "translate":
            p = Homography.translation(*args)
        elif kind == "rotate":
            p = Homography.rotation(args[0], cx, cy)
        elif kind == "zoom":
            if args[0] <= 0:
                raise ConfigError("zoom factor must be positive")
            p = Homography.scaling(args[0], cx, cy)
        else:
            t = Homography.translation(cx, cy)
            p = compose(t, compose(Homography(np.array([[1, 0, 0], [0, 1, 0], [args[0], args[1], 1.0]])),
                                   invert(t)))
        d = compose(p, d)
    return d


def inter_frame_homography(cfg: SceneConfig) -> Homography:
    try:
        return invert(camera_motion(cfg))
    except SingularMatrix:
        raise ConfigError("camera script step is singular") from None


def initial_camera(cfg: SceneConfig) -> Homography:
    """World -> frame 0 map; the identity unless a ``view`` script is set."""
    try:
        return invert(camera_motion(cfg, cfg.view))
    except SingularMatrix:
        raise ConfigError("view script is singular") from None


# --- ground truth ----------------------------------------------------------

@dataclass
class GroundTruth:
    """``homographies[t]`` maps frame t-1 to frame t (index 0 is the identity)."""

    width: int
    height: int
    homographies: list[Homography]
    boxes: list[BBox]
    footpoints: np.ndarray
    cameras: list[Homography] = field(repr=False, default_factory=list)

    @property
    def frames(self) -> int:
        return len(self.boxes)

    def camera(self, t: int) -> Homography:
        if self.cameras:
            return self.cameras[t]
        c = Homography.identity()
        for k in range(1, t + 1):
            c = compose(self.homographies[k], c)
        return c

    def chained_footpoints(self, frame: int | None = None) -> np.ndarray:
        """Footpoints of frames 0..frame expressed in frame ``frame``."""
        T = self.frames - 1 if frame is None else frame
        out = np.empty((T + 1, 2))
        c_t = self.camera(T)
        for i in range(T + 1):
            rel = compose(c_t, invert(self.camera(i)))
            out[i] = transform_points(rel, self.footpoints[i:i + 1])[0][0]
        return out

    def to_json(self) -> str:
        doc = {
            "schema": "piste-truth/1",
            "width": self.width,
            "height": self.height,
            "frames": self.frames,
            "homographies": [h.as_list() for h in self.homographies],
            "boxes": [[float(v) for v in b] for b in self.boxes],
            "footpoints": [[float(x), float(y)] for x, y in self.footpoints],
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        doc = json.loads(text)
        if doc.get("schema") != "piste-truth/1":
            raise ConfigError(f"unsupported ground-truth schema {doc.get('schema')!r}")
        homs = [Homography(np.array(m).reshape(3, 3)) for m in doc["homographies"]]
        gt = cls(doc["width"], doc["height"], homs, [BBox(*b) for b in doc["boxes"]],
                 np.array(doc["footpoints"], dtype=np.float64).reshape(-1, 2))
        gt.cameras = [gt.camera(t) for t in range(gt.frames)]
        return gt


# --- rendering -------------------------------------------------------------

def athlete_world_path(cfg: SceneConfig) -> np.ndarray:
    t = np.arange(cfg.frames, dtype=np.float64)
    amp, period = cfg.athlete_sway
    x = cfg.athlete_start[0] + cfg.athlete_velocity[0] * t
    if amp:
        x = x + amp * np.sin(2 * np.pi * t / period)
    y = cfg.athlete_start[1] + cfg.athlete_velocity[1] * t
    return np.stack([x, y], axis=1)


def _canvas_extent(cfg: SceneConfig, cameras: list[Homography]):
    corners = np.array([[0, 0], [cfg.width - 1, 0], [cfg.width - 1, cfg.height - 1], [0, cfg.height - 1]],
                       dtype=np.float64)
    pts = []
    for c in cameras:
        w, ok = transform_points(invert(c), corners)
        if not ok.all():
            raise ConfigError("a frame sees the horizon of the world plane")
        pts.append(w)
    pts = np.vstack(pts)
    if cfg.world is not None:
        x0, y0, x1, y1 = cfg.world
        if pts[:, 0].min() < x0 or pts[:, 1].min() < y0 or pts[:, 0].max() > x1 or pts[:, 1].max() > y1:
            raise ConfigError("camera path looks outside the configured world rectangle")
        return x0, y0, x1 - x0 + 1, y1 - y0 + 1
    x0 = int(np.floor(pts[:, 0].min())) - CANVAS_MARGIN
    y0 = int(np.floor(pts[:, 1].min())) - CANVAS_MARGIN
    x1 = int(np.ceil(pts[:, 0].max())) + CANVAS_MARGIN
    y1 = int(np.ceil(pts[:, 1].max())) + CANVAS_MARGIN
    if x1 - x0 > MAX_CANVAS_SIDE or y1 - y0 > MAX_CANVAS_SIDE:
        raise ConfigError(f"camera path needs a {x1 - x0}x{y1 - y0} world canvas; too large")
    return x0, y0, x1 - x0 + 1, y1 - y0 + 1


def _snow_bands(cw: int, ch: int, x0: int, y0: int, fraction: float, rng) -> np.ndarray:
    """Vertical snow lanes with wavy edges covering ``fraction`` of the plane."""
    if fraction <= 0:
        return np.zeros((ch, cw), dtype=bool)
    period = 240.0
    phase = rng.uniform(0, period)
    ys = np.arange(ch)[:, None] + y0
    xs = np.arange(cw)[None, :] + x0
    wave = 18.0 * np.sin(2 * np.pi * ys / 310.0 + rng.uniform(0, 2 * np.pi))
    return np.mod(xs + wave + phase, period) < fraction * period


def _draw_markers(canvas: np.ndarray, n: int, rng) -> None:
    ch, cw = canvas.shape[:2]
    palette = np.array([
        [20, 20, 20], [235, 30, 35], [25, 60, 220], [250, 200, 0],
        [0, 150, 60], [250, 120, 0], [140, 30, 160], [245, 245, 245],
    ], dtype=np.uint8)
    for _ in range(n):
        kind = rng.integers(0, 3)
        color = palette[rng.integers(0, len(palette))]
        cx, cy = rng.uniform(0, cw), rng.uniform(0, ch)
        if kind == 0:  # rectangle / banner
            w, h = rng.uniform(24, 110), rng.uniform(14, 60)
            rects = [(cx - w / 2, cy - h / 2, w, h)]
        elif kind == 1:  # cross
            s, t = rng.uniform(20, 60), rng.uniform(5, 12)
            rects = [(cx - s / 2, cy - t / 2, s, t), (cx - t / 2, cy - s / 2, t, s)]
        else:  # gate pole with a flag
            h, t = rng.uniform(50, 110), rng.uniform(5, 9)
            rects = [(cx - t / 2, cy - h / 2, t, h), (cx + t / 2, cy - h / 2, rng.uniform(18, 36), h * 0.35)]
        for x, y, w, h in rects:
            xa, ya = max(int(round(x)), 0), max(int(round(y)), 0)
            xb, yb = min(int(round(x + w)), cw), min(int(round(y + h)), ch)
            if xb > xa and yb > ya:
                canvas[ya:yb, xa:xb] = color


def render_world(cfg: SceneConfig, extent, rng) -> tuple[np.ndarray, np.ndarray]:
    x0, y0, cw, ch = extent
    noise = ndimage.gaussian_filter(rng.standard_normal((ch, cw)), cfg.texture_scale, mode="wrap")
    noise /= noise.std() + 1e-12
    base = 118.0 + cfg.texture_contrast * noise
    tint = np.array([0.82, 0.95, 0.78])
    canvas = np.clip(base[..., None] * tint, 0, 255)
    snow = _snow_bands(cw, ch, x0, y0, cfg.snow_fraction, rng)
    canvas[snow] = [cfg.snow_level - 2, cfg.snow_level, cfg.snow_level + 3]
    canvas = np.rint(canvas).astype(np.uint8)
    _draw_markers(canvas, cfg.markers, rng)
    return canvas, snow


def _bilinear(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear lookup of an (H, W, C) image at float coordinates (clamped to the edge)."""
    h, w = img.shape[:2]
    xs = np.clip(xs, 0, w - 1.000001)
    ys = np.clip(ys, 0, h - 1.000001)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    fx = (xs - x0).astype(np.float32)[..., None]
    fy = (ys - y0).astype(np.float32)[..., None]
    flat = img.reshape(h * w, -1).astype(np.float32)
    i = y0 * w + x0
    top = flat[i] * (1 - fx) + flat[i + 1] * fx
    bot = flat[i + w] * (1 - fx) + flat[i + w + 1] * fx
    return top * (1 - fy) + bot * fy


def _athlete_texture(w: int, h: int, rng) -> np.ndarray:
    suit = np.array([[220, 20, 40], [255, 215, 0], [20, 40, 200], [10, 10, 10]], dtype=np.float32)
    band = (np.arange(h) // max(h // 7, 2)) % len(suit)
    tex = suit[band][:, None, :].repeat(w, axis=1)
    stripe = (np.arange(w) // max(w // 4, 2)) % 2 == 1
    tex[:, stripe] = tex[:, stripe] * 0.55
    tex += rng.normal(0, 12, tex.shape).astype(np.float32)
    return np.clip(tex, 0, 255)


def _stamp_athlete(img: np.ndarray, box: BBox, tex: np.ndarray) -> None:
    h_img, w_img = img.shape[:2]
    x, y, w, h = box
    cx, cy = x + w / 2, y + h / 2
    u0, u1 = max(int(np.floor(x)), 0), min(int(np.ceil(x + w)) + 1, w_img)
    v0, v1 = max(int(np.floor(y)), 0), min(int(np.ceil(y + h)) + 1, h_img)
    vs, us = np.mgrid[v0:v1, u0:u1]
    inside = ((us - cx) / (w / 2)) ** 2 + ((vs - cy) / (h / 2)) ** 2 <= 1.0
    tu = np.clip(np.floor(us - x).astype(np.intp), 0, tex.shape[1] - 1)
    tv = np.clip(np.floor(vs - y).astype(np.intp), 0, tex.shape[0] - 1)
    region = img[v0:v1, u0:u1]
    region[inside] = tex[tv[inside], tu[inside]]


class SyntheticScene:
    """Lazily renders frames of a configured scene; ground truth is eager."""

    def __init__(self, cfg: SceneConfig):
        self.cfg = cfg
        step_h = inter_frame_homography(cfg)
        cams = [initial_camera(cfg)]
        for _ in range(1, cfg.frames):
            cams.append(compose(step_h, cams[-1]))
        self.cameras = cams
        self.extent = _canvas_extent(cfg, cams)

        rng = np.random.default_rng(cfg.seed)
        self.canvas, self.snow = render_world(cfg, self.extent, rng)
        self._canvas_f = self.canvas.astype(np.float32)
        self._snow_f = self.snow.astype(np.float32)[..., None]
        aw, ah = cfg.athlete_size
        self.athlete_tex = _athlete_texture(int(np.ceil(aw)) + 1, int(np.ceil(ah)) + 1, rng)
        speckle = ndimage.gaussian_filter(rng.standard_normal((cfg.height, cfg.width)), 0.8)
        speckle /= speckle.std() + 1e-12
        self.speckle = (cfg.snow_speckle * speckle).astype(np.float32)

        world_fp = athlete_world_path(cfg)
        boxes, fps = [], []
        for t, c in enumerate(cams):
            fx, fy = transform_points(c, world_fp[t:t + 1])[0][0]
            box = BBox(float(fx - aw / 2), float(fy - ah), float(aw), float(ah))
            if box.x < 0 or box.y < 0 or box.x + box.w > cfg.width - 1 or box.y + box.h > cfg.height - 1:
                raise ConfigError(f"athlete leaves the frame at t={t} (box {tuple(round(v, 1) for v in box)})")
            boxes.append(box)
            fps.append(footpoint(box))
        homs = [Homography.identity()] + [step_h] * (cfg.frames - 1)
        self.truth = GroundTruth(cfg.width, cfg.height, homs, boxes, np.array(fps, dtype=np.float64), cams)

        vs, us = np.mgrid[0:cfg.height, 0:cfg.width]
        self._pix = np.stack([us.ravel(), vs.ravel()], axis=1).astype(np.float64)

    def __len__(self) -> int:
        return self.cfg.frames

    def render(self, t: int) -> Frame:
        cfg = self.cfg
        x0, y0, _, _ = self.extent
        world, _ = transform_points(invert(self.cameras[t]), self._pix)
        wx = (world[:, 0] - x0).reshape(cfg.height, cfg.width)
        wy = (world[:, 1] - y0).reshape(cfg.height, cfg.width)
        img = _bilinear(self._canvas_f, wx, wy)
        if cfg.snow_speckle and cfg.snow_fraction > 0:
            on_snow = _bilinear(self._snow_f, wx, wy)[..., 0] > 0.5
            img[on_snow] += self.speckle[on_snow][:, None]
        img = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)
        _stamp_athlete(img, self.truth.boxes[t], self.athlete_tex)
        return Frame(img)

    def frames(self):
        for t in range(self.cfg.frames):
            yield self.render(t)


def generate(cfg: SceneConfig) -> tuple[list[Frame], GroundTruth]:
    """Render every frame of the scene together with its ground truth."""
    scene = SyntheticScene(cfg)
    return list(scene.frames()), scene.truth


@dataclass
class ErrorReport:
    mean: float
    max: float
    per_frame: np.ndarray
    evaluated: int

    def summary(self) -> str:
        return f"mean_px={self.mean:.4f} max_px={self.max:.4f} points={self.evaluated}"


def measure_error(reconstructed: Trajectory, truth: GroundTruth) -> ErrorReport:
    """Displacement of each reconstructed point from the ground-truth footpoint
    expressed in the last frame's coordinates."""
    if len(reconstructed) != truth.frames or reconstructed.frame_index != truth.frames - 1:
        raise LengthMismatch(
            f"trajectory has {len(reconstructed)} points at frame {reconstructed.frame_index}; "
            f"ground truth has {truth.frames} frames"
        )
    gt = truth.chained_footpoints()
    err = np.linalg.norm(reconstructed.points - gt, axis=1)
    err[np.array([f == OFF_HORIZON for f in reconstructed.flags])] = np.nan
    valid = err[np.isfinite(err)]
    if len(valid) == 0:
        return ErrorReport(float("nan"), float("nan"), err, 0)
    return ErrorReport(float(valid.mean()), float(valid.max()), err, len(valid))
