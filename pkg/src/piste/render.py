"""Trajectory overlays: anti-aliased polylines, a position marker, speed labels."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .features import Frame

RED = (255, 0, 0)
GREEN = (0, 200, 0)


@dataclass(frozen=True)
class OverlayStyle:
    color: tuple[int, int, int] = RED
    comparison_color: tuple[int, int, int] = GREEN
    line_width: float = 3.0
    point_radius: float = 5.0
    font_size: int = 14
    label_every: int = 10

    def __post_init__(self):
        if self.line_width < 1 or self.point_radius < 1 or self.font_size < 1:
            raise ValueError("line width, point radius and font size must be >= 1")
        if self.label_every < 1:
            raise ValueError("label_every must be >= 1")


def _segment_distance(px, py, a, b):
    d = b - a
    ll = float(d @ d)
    if ll == 0.0:
        return np.hypot(px - a[0], py - a[1])
    t = np.clip(((px - a[0]) * d[0] + (py - a[1]) * d[1]) / ll, 0.0, 1.0)
    return np.hypot(px - (a[0] + t * d[0]), py - (a[1] + t * d[1]))


def _stroke(cov: np.ndarray, a, b, half: float) -> None:
    """Max-accumulate the coverage of a thick segment into ``cov`` (clipped)."""
    h, w = cov.shape
    reach = half + 0.5
    x0 = max(int(np.floor(min(a[0], b[0]) - reach)), 0)
    x1 = min(int(np.ceil(max(a[0], b[0]) + reach)), w - 1)
    y0 = max(int(np.floor(min(a[1], b[1]) - reach)), 0)
    y1 = min(int(np.ceil(max(a[1], b[1]) + reach)), h - 1)
    if x1 < x0 or y1 < y0:
        return
    py, px = np.mgrid[y0:y1 + 1, x0:x1 + 1].astype(np.float64)
    c = np.clip(reach - _segment_distance(px, py, a, b), 0.0, 1.0)
    np.maximum(cov[y0:y1 + 1, x0:x1 + 1], c, out=cov[y0:y1 + 1, x0:x1 + 1])


def polyline_coverage(shape: tuple[int, int], points, width: float) -> np.ndarray:
    """Per-pixel coverage in [0, 1] of a polyline of the given width.

    Pixel centres sit at integer coordinates; coverage falls off linearly
    over the last half pixel of the stroke.
    """
    cov = np.zeros(shape, dtype=np.float64)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    if len(pts) == 1:
        _stroke(cov, pts[0], pts[0], width / 2.0)
    for a, b in zip(pts[:-1], pts[1:]):
        _stroke(cov, a, b, width / 2.0)
    return cov


def _blend(rgb: np.ndarray, cov: np.ndarray, color) -> np.ndarray:
    if not cov.any():
        return rgb
    c = cov[..., None]
    out = rgb.astype(np.float64) * (1.0 - c) + np.asarray(color, dtype=np.float64) * c
    return np.floor(out + 0.5).astype(np.uint8)


def _labels(rgb: np.ndarray, annotations, style: OverlayStyle, color) -> np.ndarray:
    h, w = rgb.shape[:2]
    picked = [(p, v) for i, (p, v) in enumerate(annotations) if i % style.label_every == 0]
    picked = [(p, v) for p, v in picked if 0 <= p[0] < w and 0 <= p[1] < h]
    if not picked:
        return rgb
    im = Image.fromarray(rgb)
    draw = ImageDraw.Draw(im)
    font = ImageFont.load_default(size=style.font_size)
    off = style.point_radius + 2
    for p, v in picked:
        draw.text((p[0] + off, p[1] - off), f"{v:.1f} m/s", fill=tuple(color), font=font,
                  anchor="lb", stroke_width=1, stroke_fill=(0, 0, 0))
    return np.asarray(im)


def render_overlay(frame: Frame, smoothed, style: OverlayStyle = OverlayStyle(),
                   annotations: Sequence | None = None, color=None) -> Frame:
    """New frame with the trajectory drawn on top; ``frame`` is left untouched.

    ``smoothed`` is the polyline to draw (typically a spline through the
    trajectory); its last point gets a disc. ``annotations`` are
    ``(point, speed)`` pairs, every ``style.label_every``-th one labelled.
    """
    color = style.color if color is None else color
    rgb = frame.rgb
    pts = np.asarray(smoothed, dtype=np.float64).reshape(-1, 2)
    if len(pts):
        cov = polyline_coverage(rgb.shape[:2], pts, style.line_width)
        _stroke(cov, pts[-1], pts[-1], style.point_radius)
        rgb = _blend(rgb, cov, color)
    if annotations:
        rgb = _labels(np.array(rgb), annotations, style, color)
    return Frame(np.array(rgb))
