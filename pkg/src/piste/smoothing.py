"""Centripetal Catmull-Rom interpolation of polylines."""

from __future__ import annotations

import numpy as np


def _drop_repeats(pts: np.ndarray) -> np.ndarray:
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    return pts[keep]


def catmull_rom(points, samples_per_segment: int = 8, alpha: float = 0.5) -> np.ndarray:
    """Interpolating spline through ``points`` (N, 2).

    Every input point appears verbatim in the output, followed by
    ``samples_per_segment`` interpolated points on the segment to the next
    one. Inputs with two or fewer distinct points come back unchanged.
    End segments use mirrored phantom control points.
    """
    if samples_per_segment < 1:
        raise ValueError("samples_per_segment must be >= 1")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    pts = _drop_repeats(pts)
    n = len(pts)
    if n <= 2:
        return pts.copy()

    ext = np.vstack([2 * pts[0] - pts[1], pts, 2 * pts[-1] - pts[-2]])
    p0, p1, p2, p3 = ext[:-3], ext[1:-2], ext[2:-1], ext[3:]

    def knot(a, b):
        return np.linalg.norm(b - a, axis=1) ** alpha

    t0 = np.zeros(n - 1)
    t1 = t0 + knot(p0, p1)
    t2 = t1 + knot(p1, p2)
    t3 = t2 + knot(p2, p3)

    frac = np.arange(1, samples_per_segment + 1) / (samples_per_segment + 1)
    # (segments, samples, 1) for broadcasting against (segments, 1, 2)
    t = (t1[:, None] + frac[None, :] * (t2 - t1)[:, None])[..., None]
    t0, t1, t2, t3 = (v[:, None, None] for v in (t0, t1, t2, t3))
    p0, p1, p2, p3 = (v[:, None, :] for v in (p0, p1, p2, p3))

    # Barry-Goldman pyramid
    a1 = (t1 - t) / (t1 - t0) * p0 + (t - t0) / (t1 - t0) * p1
    a2 = (t2 - t) / (t2 - t1) * p1 + (t - t1) / (t2 - t1) * p2
    a3 = (t3 - t) / (t3 - t2) * p2 + (t - t2) / (t3 - t2) * p3
    b1 = (t2 - t) / (t2 - t0) * a1 + (t - t0) / (t2 - t0) * a2
    b2 = (t3 - t) / (t3 - t1) * a2 + (t - t1) / (t3 - t1) * a3
    c = (t2 - t) / (t2 - t1) * b1 + (t - t1) / (t2 - t1) * b2

    out = np.empty((n - 1, samples_per_segment + 1, 2))
    out[:, 0, :] = pts[:-1]
    out[:, 1:, :] = c
    return np.vstack([out.reshape(-1, 2), pts[-1:]])
