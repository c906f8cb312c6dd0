"""Rigid transforms, pinhole camera math and a little planar geometry.

Conventions: meters and radians. Camera frame has +z along the optical
axis into the scene, image origin at the top-left pixel, u to the right
and v downward. Pixel (u, v) refers to the pixel *center*.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BehindCameraError, InvalidDepthError

_ORTHO_DRIFT = 1e-12


def _orthonormalize(rotation):
    u, _, vt = np.linalg.svd(rotation)
    r = u @ vt
    if np.linalg.det(r) < 0:
        u[:, -1] *= -1
        r = u @ vt
    return r


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Proper rigid transform ``p -> rotation @ p + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = np.array(self.translation, dtype=float).reshape(3)
        drift = np.abs(r.T @ r - np.eye(3)).max()
        if drift > 1e-6 or np.linalg.det(r) < 0:
            raise ValueError("rotation must be orthonormal with det +1")
        if drift > _ORTHO_DRIFT:
            r = _orthonormalize(r)
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix) -> "RigidTransform":
        m = np.asarray(matrix, dtype=float)
        return cls(m[:3, :3], m[:3, 3])

    @classmethod
    def from_xyz_yaw(cls, x, y, z, yaw=0.0) -> "RigidTransform":
        return cls(rot_z(yaw), [x, y, z])

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, points) -> np.ndarray:
        """Transform a single 3-vector or an (N, 3) array of points."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def inverse(self) -> "RigidTransform":
        return invert(self)

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, RigidTransform):
            return NotImplemented
        return bool(
            np.array_equal(self.rotation, other.rotation)
            and np.array_equal(self.translation, other.translation)
        )

    def __hash__(self):
        return hash((self.rotation.tobytes(), self.translation.tobytes()))

    def allclose(self, other: "RigidTransform", atol=1e-9) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, rtol=0, atol=atol)
            and np.allclose(self.translation, other.translation, rtol=0, atol=atol)
        )

    @property
    def yaw(self) -> float:
        """Heading of the rotated x axis in the xy plane."""
        return math.atan2(self.rotation[1, 0], self.rotation[0, 0])

    def to_dict(self) -> dict:
        return {
            "rotation": [float(x) for x in self.rotation.ravel()],
            "translation": [float(x) for x in self.translation],
        }

    @classmethod
    def from_dict(cls, d) -> "RigidTransform":
        return cls(np.reshape(d["rotation"], (3, 3)), d["translation"])


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Return the transform that applies ``b`` first, then ``a``."""
    return RigidTransform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def invert(t: RigidTransform) -> RigidTransform:
    rt = t.rotation.T
    return RigidTransform(rt, -rt @ t.translation)


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def random_transform(rng: np.random.Generator, translation_scale=1.0) -> RigidTransform:
    """Uniformly distributed rotation (via a unit quaternion) plus a Gaussian translation."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    r = np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])
    return RigidTransform(r, rng.normal(scale=translation_scale, size=3))


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def to_dict(self) -> dict:
        return {
            "fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
            "width": self.width, "height": self.height,
        }

    @classmethod
    def from_dict(cls, d) -> "CameraIntrinsics":
        return cls(
            float(d["fx"]), float(d["fy"]), float(d["cx"]), float(d["cy"]),
            int(d["width"]), int(d["height"]),
        )


class PixelCoord(NamedTuple):
    u: float
    v: float

    def in_image(self, k: CameraIntrinsics) -> bool:
        return 0 <= self.u < k.width and 0 <= self.v < k.height


def deproject(p: PixelCoord, depth: float, k: CameraIntrinsics) -> np.ndarray:
    """Back-project pixel ``p`` at z-depth ``depth`` into the camera frame."""
    if not depth > 0:
        raise InvalidDepthError(f"depth must be positive, got {depth!r}")
    u, v = p
    return np.array([depth * (u - k.cx) / k.fx, depth * (v - k.cy) / k.fy, float(depth)])


def project(point, k: CameraIntrinsics) -> tuple[PixelCoord, float]:
    x, y, z = (float(c) for c in point)
    if not z > 0:
        raise BehindCameraError(f"point is behind the camera (z={z!r})")
    return PixelCoord(k.fx * x / z + k.cx, k.fy * y / z + k.cy), z


def pixel_rays(k: CameraIntrinsics, us, vs) -> np.ndarray:
    """Camera-frame ray directions with unit z for arrays of pixel coordinates."""
    us = np.asarray(us, dtype=float)
    vs = np.asarray(vs, dtype=float)
    return np.stack([(us - k.cx) / k.fx, (vs - k.cy) / k.fy, np.ones(np.broadcast(us, vs).shape)], axis=-1)


# --- planar helpers -------------------------------------------------------


def polygon_area(poly) -> float:
    """Unsigned shoelace area of a simple polygon given as (N, 2) vertices."""
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def convex_hull(points) -> np.ndarray:
    """Counter-clockwise convex hull by Andrew's monotone chain.

    Collinear points are dropped; degenerate inputs return fewer than three
    vertices rather than raising.
    """
    pts = sorted(set(map(tuple, np.asarray(points, dtype=float).reshape(-1, 2))))
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=float)


class BoundingRect(NamedTuple):
    area: float
    center: tuple[float, float]
    size: tuple[float, float]
    angle: float
    corners: np.ndarray


def min_area_rect(points) -> BoundingRect:
    """Minimum-area enclosing rectangle by rotating calipers over the hull.

    One side of the optimal rectangle is collinear with a hull edge, so each
    edge direction is tried in turn. ``angle`` is the direction of the first
    side, reduced to [0, pi/2).
    """
    hull = convex_hull(points)
    if len(hull) == 0:
        raise ValueError("no points")
    if len(hull) < 3:
        # segment or point: zero-area rectangle along the segment
        a, b = hull[0], hull[-1]
        d = b - a
        angle = math.atan2(d[1], d[0]) % (math.pi / 2) if np.any(d) else 0.0
        c = (a + b) / 2
        return BoundingRect(0.0, (float(c[0]), float(c[1])), (float(np.hypot(*d)), 0.0), angle, np.array([a, b, b, a]))

    edges = np.roll(hull, -1, axis=0) - hull
    angles = np.unique(np.mod(np.arctan2(edges[:, 1], edges[:, 0]), math.pi / 2))
    best = None
    for theta in angles:
        c, s = math.cos(theta), math.sin(theta)
        # rotate hull by -theta so the candidate edge is axis aligned
        rx = hull[:, 0] * c + hull[:, 1] * s
        ry = -hull[:, 0] * s + hull[:, 1] * c
        w, h = rx.max() - rx.min(), ry.max() - ry.min()
        area = w * h
        if best is None or area < best[0] - 1e-15:
            best = (area, theta, rx.min(), rx.max(), ry.min(), ry.max())
    area, theta, x0, x1, y0, y1 = best
    c, s = math.cos(theta), math.sin(theta)
    local = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    corners = np.stack([local[:, 0] * c - local[:, 1] * s, local[:, 0] * s + local[:, 1] * c], axis=1)
    center = corners.mean(axis=0)
    return BoundingRect(float(area), (float(center[0]), float(center[1])), (float(x1 - x0), float(y1 - y0)), float(theta), corners)


def wrap_angle(angle: float, period: float = 2 * math.pi) -> float:
    """Reduce ``angle`` to [0, period)."""
    a = math.fmod(angle, period)
    if a < 0:
        a += period
    return 0.0 if a >= period else a


def angle_diff(a: float, b: float, period: float = 2 * math.pi) -> float:
    """Signed smallest difference ``a - b`` modulo ``period``, in [-period/2, period/2)."""
    return wrap_angle(a - b + period / 2, period) - period / 2


def image_to_base_angle(angle: float, hand_eye: RigidTransform) -> float:
    """Map an in-image direction angle (from +u toward +v) to a base-frame yaw.

    Assumes a roughly downward-looking camera; the direction is pushed
    through the camera rotation and read back in the base xy plane.
    """
    r = hand_eye.rotation
    d = r @ np.array([math.cos(angle), math.sin(angle), 0.0])
    return math.atan2(d[1], d[0])


def image_to_base_rotation(rotation: float, hand_eye: RigidTransform) -> float:
    """Convert an in-image rotation amount to the equivalent base-frame yaw change."""
    return angle_diff(image_to_base_angle(rotation, hand_eye), image_to_base_angle(0.0, hand_eye))


def points_in_polygon(xs, ys, poly) -> np.ndarray:
    """Vectorized even-odd test for a simple polygon."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    poly = np.asarray(poly, dtype=float)
    inside = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        cond = (y1 > ys) != (y2 > ys)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = (x2 - x1) * (ys - y1) / (y2 - y1) + x1
        inside ^= cond & (xs < xint)
    return inside

