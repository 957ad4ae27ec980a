"""Planar projective geometry: points, homographies, DLT fitting, transfer errors.

Convention: column vectors, ``p' = dehomogenize(M @ [x, y, 1])``.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DegenerateConfiguration,
    InsufficientData,
    PointAtInfinity,
    SingularMatrix,
)

HORIZON_EPS = 1e-9
SINGULAR_EPS = 1e-12
DEGENERACY_RATIO = 10.0
# Singular values below this fraction of the largest count as exact zeros.
_RANK_FLOOR = 1e-9


class Point2(NamedTuple):
    x: float
    y: float


class Correspondence(NamedTuple):
    src: Point2
    dst: Point2


def canonicalize(m: np.ndarray) -> np.ndarray:
    """Scale ``m`` so that m[2,2] == 1, or to unit Frobenius norm if m[2,2] ~ 0.

    Idempotent bit-for-bit.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3):
        raise ValueError(f"homography must be 3x3, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise SingularMatrix("homography has non-finite entries")
    if abs(m[2, 2]) > HORIZON_EPS:
        if m[2, 2] == 1.0:
            return m.copy()
        return m / m[2, 2]
    norm = np.linalg.norm(m)
    if norm == 0.0:
        raise SingularMatrix("zero matrix")
    out = m if abs(norm - 1.0) <= 4 * np.finfo(float).eps else m / norm
    # sign fix: first significant entry positive
    flat = out.ravel()
    first = flat[np.flatnonzero(np.abs(flat) > 1e-15)[0]]
    return -out if first < 0 else out.copy()


class Homography:
    """Immutable, canonically scaled 3x3 projective map."""

    __slots__ = ("_m",)

    def __init__(self, m):
        m = canonicalize(m)
        if abs(np.linalg.det(m)) <= SINGULAR_EPS:
            raise SingularMatrix(f"homography is singular (det={np.linalg.det(m):.3e})")
        m.setflags(write=False)
        self._m = m

    @property
    def m(self) -> np.ndarray:
        return self._m

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    @classmethod
    def translation(cls, tx: float, ty: float) -> "Homography":
        return cls(np.array([[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]]))

    @classmethod
    def scaling(cls, s: float, cx: float = 0.0, cy: float = 0.0) -> "Homography":
        return cls(np.array([[s, 0.0, cx * (1 - s)], [0.0, s, cy * (1 - s)], [0.0, 0.0, 1.0]]))

    @classmethod
    def rotation(cls, degrees: float, cx: float = 0.0, cy: float = 0.0) -> "Homography":
        a = np.deg2rad(degrees)
        c, s = np.cos(a), np.sin(a)
        return cls(np.array([
            [c, -s, cx - c * cx + s * cy],
            [s, c, cy - s * cx - c * cy],
            [0.0, 0.0, 1.0],
        ]))

    def __matmul__(self, other: "Homography") -> "Homography":
        return compose(self, other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Homography) and np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash(self._m.tobytes())

    def __repr__(self) -> str:
        rows = ", ".join("[" + ", ".join(f"{v:.6g}" for v in r) + "]" for r in self._m)
        return f"Homography([{rows}])"

    def as_list(self) -> list[float]:
        return [float(v) for v in self._m.ravel()]


def _as_matrix(h) -> np.ndarray:
    return h.m if isinstance(h, Homography) else np.asarray(h, dtype=np.float64)


def apply_homography(h: Homography, p: Point2) -> Point2:
    m = h.m
    x, y = float(p[0]), float(p[1])
    w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    if abs(w) <= HORIZON_EPS:
        raise PointAtInfinity(f"point ({x}, {y}) maps to the line at infinity")
    return Point2(
        (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / w,
        (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / w,
    )


def transform_points(h, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized mapping of an (N, 2) array.

    Returns ``(mapped, valid)``; rows that hit the horizon are NaN and
    ``valid`` is False there.
    """
    m = _as_matrix(h)
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    valid = np.abs(w) > HORIZON_EPS
    safe_w = np.where(valid, w, 1.0)
    out = np.empty_like(pts)
    out[:, 0] = (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / safe_w
    out[:, 1] = (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / safe_w
    out[~valid] = np.nan
    return out, valid


def compose(h2: Homography, h1: Homography) -> Homography:
    """Map that applies ``h1`` first, then ``h2``."""
    return Homography(h2.m @ h1.m)


def invert(h: Homography) -> Homography:
    try:
        inv = np.linalg.inv(h.m)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from None
    return Homography(inv)


def hartley_normalization(pts: np.ndarray) -> np.ndarray:
    """Similarity moving the centroid to the origin with mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    mean_dist = np.mean(np.linalg.norm(pts - centroid, axis=1))
    if mean_dist < 1e-12:
        raise DegenerateConfiguration("all points coincide")
    s = np.sqrt(2.0) / mean_dist
    return np.array([
        [s, 0.0, -s * centroid[0]],
        [0.0, s, -s * centroid[1]],
        [0.0, 0.0, 1.0],
    ])


def _dlt_arrays(src: np.ndarray, dst: np.ndarray, degeneracy_ratio: float) -> np.ndarray:
    n = len(src)
    if n < 4:
        raise InsufficientData(f"need at least 4 correspondences, got {n}")
    t_src = hartley_normalization(src)
    t_dst = hartley_normalization(dst)
    a, _ = transform_points(t_src, src)
    b, _ = transform_points(t_dst, dst)

    x, y = a[:, 0], a[:, 1]
    u, v = b[:, 0], b[:, 1]
    zeros, ones = np.zeros(n), np.ones(n)
    rows_u = np.stack([x, y, ones, zeros, zeros, zeros, -u * x, -u * y, -u], axis=1)
    rows_v = np.stack([zeros, zeros, zeros, x, y, ones, -v * x, -v * y, -v], axis=1)
    system = np.empty((2 * n, 9))
    system[0::2] = rows_u
    system[1::2] = rows_v

    if len(system) < 9:
        system = np.vstack([system, np.zeros((9 - len(system), 9))])
    _, sv, vt = np.linalg.svd(system, full_matrices=False)
    sv = np.concatenate([sv, np.zeros(9 - len(sv))])
    floor = _RANK_FLOOR * sv[0]
    if sv[7] <= floor or sv[7] < degeneracy_ratio * sv[8]:
        raise DegenerateConfiguration(
            f"DLT null space is not one-dimensional (s7={sv[7]:.3e}, s8={sv[8]:.3e})"
        )
    hn = vt[-1].reshape(3, 3)
    m = np.linalg.inv(t_dst) @ hn @ t_src
    return m


def dlt_homography(
    corrs: Sequence[Correspondence] | None = None,
    *,
    src: np.ndarray | None = None,
    dst: np.ndarray | None = None,
    degeneracy_ratio: float = DEGENERACY_RATIO,
) -> Homography:
    """Least-squares homography from >= 4 correspondences (normalized DLT).

    Either pass a sequence of :class:`Correspondence` or ``src``/``dst``
    arrays of shape (N, 2).
    """
    if corrs is not None:
        src = np.array([c.src for c in corrs], dtype=np.float64).reshape(-1, 2)
        dst = np.array([c.dst for c in corrs], dtype=np.float64).reshape(-1, 2)
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    m = _dlt_arrays(src, dst, degeneracy_ratio)
    try:
        return Homography(m)
    except SingularMatrix:
        raise DegenerateConfiguration("DLT solution is singular") from None


def transfer_errors(h: Homography, src: np.ndarray, dst: np.ndarray,
                    h_inv: Homography | None = None) -> np.ndarray:
    """Symmetric transfer errors for arrays of correspondences (+inf at the horizon)."""
    if h_inv is None:
        h_inv = invert(h)
    fwd, ok_f = transform_points(h, src)
    bwd, ok_b = transform_points(h_inv, dst)
    err = np.linalg.norm(fwd - dst, axis=1) + np.linalg.norm(bwd - src, axis=1)
    err[~(ok_f & ok_b)] = np.inf
    return err


def symmetric_transfer_error(h: Homography, c: Correspondence) -> float:
    src = np.asarray([c.src], dtype=np.float64)
    dst = np.asarray([c.dst], dtype=np.float64)
    return float(transfer_errors(h, src, dst)[0])


def triangle_area(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return 0.5 * np.abs((b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1])
                        - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0]))


def has_collinear_triple(quad: np.ndarray, min_area: float = 1.0) -> bool:
    """True if any 3 of the 4 points span a triangle smaller than ``min_area`` px^2."""
    for i, j, k in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        if triangle_area(quad[i], quad[j], quad[k]) < min_area:
            return True
    return False
