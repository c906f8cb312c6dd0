"""Flat-shaded synthetic color + depth rendering from the cell camera."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..geometry import CameraIntrinsics, RigidTransform, pixel_rays, project
from .config import CellConfig
from .scene import Scene, SceneObject

TABLE_COLOR = (240, 240, 240)
PIECE_SIDE = 0.051


@dataclass(eq=False)
class Frame:
    """One synthetic RGB-D observation.

    ``labels`` is a ground-truth instance map (object id, -1 for table) that
    the simulator provides for metric computation; pipeline stages must not
    read it.
    """

    color: np.ndarray  # (H, W, 3) uint8
    depth: np.ndarray  # (H, W) float64, meters along optical axis
    labels: np.ndarray  # (H, W) int32
    timestamp: float = 0.0

    @property
    def height(self) -> int:
        return self.color.shape[0]

    @property
    def width(self) -> int:
        return self.color.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return (np.array_equal(self.color, other.color) and np.array_equal(self.depth, other.depth)
                and np.array_equal(self.labels, other.labels) and self.timestamp == other.timestamp)


@lru_cache(maxsize=8)
def _camera_rays(intrinsics: CameraIntrinsics, rotation_bytes: bytes):
    r = np.frombuffer(rotation_bytes, dtype=float).reshape(3, 3)
    vs, us = np.mgrid[0:intrinsics.height, 0:intrinsics.width]
    rays = pixel_rays(intrinsics, us, vs) @ r.T
    rays.setflags(write=False)
    return rays


def base_rays(cell: CellConfig) -> np.ndarray:
    """Per-pixel ray directions in the base frame, scaled to unit camera-z."""
    return _camera_rays(cell.camera.intrinsics, cell.camera.pose.rotation.tobytes())


@lru_cache(maxsize=8)
def _background(intrinsics, rotation_bytes, translation_bytes, surface_z):
    rays = _camera_rays(intrinsics, rotation_bytes)
    t = np.frombuffer(translation_bytes, dtype=float)
    depth = (surface_z - t[2]) / rays[..., 2]
    depth.setflags(write=False)
    return depth


def _table_depth(cell: CellConfig) -> np.ndarray:
    pose = cell.camera.pose
    return _background(cell.camera.intrinsics, pose.rotation.tobytes(), pose.translation.tobytes(),
                       cell.table.surface_z)


# The assembled jigsaw picture: Gaussian color bumps over a gradient, placed
# asymmetrically so each quadrant is distinguishable under rotation.
_BUMPS = (
    # (x, y, sigma, rgb weight) in meters relative to the assembled center
    (-0.034, 0.018, 0.011, (1.0, 0.15, 0.1)),
    (-0.012, 0.040, 0.008, (0.1, 0.2, 1.0)),
    (0.020, 0.032, 0.012, (0.1, 1.0, 0.2)),
    (0.040, 0.012, 0.007, (1.0, 1.0, 0.1)),
    (-0.036, -0.036, 0.010, (0.2, 0.9, 0.9)),
    (-0.014, -0.016, 0.009, (1.0, 0.3, 0.9)),
    (0.016, -0.040, 0.011, (0.9, 0.5, 0.1)),
    (0.036, -0.022, 0.008, (0.3, 0.1, 0.8)),
)

# quadrant centers of pieces 0..3 (top-left, top-right, bottom-left, bottom-right)
PIECE_OFFSETS = (
    (-PIECE_SIDE / 2, PIECE_SIDE / 2),
    (PIECE_SIDE / 2, PIECE_SIDE / 2),
    (-PIECE_SIDE / 2, -PIECE_SIDE / 2),
    (PIECE_SIDE / 2, -PIECE_SIDE / 2),
)


def picture_color(xs, ys) -> np.ndarray:
    """RGB of the assembled jigsaw picture at picture coordinates (meters)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    half = PIECE_SIDE
    rgb = np.empty(xs.shape + (3,))
    rgb[..., 0] = 25 + 30 * (xs + half) / (2 * half)
    rgb[..., 1] = 25 + 30 * (ys + half) / (2 * half)
    rgb[..., 2] = 40.0
    for bx, by, sigma, weight in _BUMPS:
        g = np.exp(-((xs - bx) ** 2 + (ys - by) ** 2) / (2 * sigma * sigma))
        rgb += 125 * g[..., None] * np.asarray(weight)
    return np.clip(rgb, 0, 180).astype(np.uint8)


def texture_color(texture_id: int, lx, ly) -> np.ndarray:
    ox, oy = PIECE_OFFSETS[texture_id]
    return picture_color(np.asarray(lx) + ox, np.asarray(ly) + oy)


def _pixel_window(obj: SceneObject, top_z: float, cell: CellConfig):
    """Inclusive pixel bounding box of the object's top face, or None if off-image."""
    k = cell.camera.intrinsics
    cam_from_base = cell.camera.pose.inverse()
    fp = obj.footprint()
    pts = np.column_stack([fp, np.full(len(fp), top_z)])
    cam = cam_from_base.apply(pts)
    if np.any(cam[:, 2] <= 0):
        return 0, 0, k.width - 1, k.height - 1
    uv = np.column_stack([k.fx * cam[:, 0] / cam[:, 2] + k.cx, k.fy * cam[:, 1] / cam[:, 2] + k.cy])
    u0 = max(int(math.floor(uv[:, 0].min())) - 1, 0)
    v0 = max(int(math.floor(uv[:, 1].min())) - 1, 0)
    u1 = min(int(math.ceil(uv[:, 0].max())) + 1, k.width - 1)
    v1 = min(int(math.ceil(uv[:, 1].max())) + 1, k.height - 1)
    if u0 > u1 or v0 > v1:
        return None
    return u0, v0, u1, v1


def render(scene: Scene, cell: CellConfig, timestamp: float = 0.0) -> Frame:
    """Rasterize object top faces over the table plane (painter's order by height)."""
    k = cell.camera.intrinsics
    rays = base_rays(cell)
    origin = cell.camera.pose.translation
    depth = np.array(_table_depth(cell))
    color = np.empty((k.height, k.width, 3), dtype=np.uint8)
    color[...] = TABLE_COLOR
    labels = np.full((k.height, k.width), -1, dtype=np.int32)

    for obj in sorted(scene.objects, key=lambda o: (o.pose.translation[2] + o.height, o.id)):
        top = float(obj.pose.translation[2] + obj.height)
        win = _pixel_window(obj, top, cell)
        if win is None:
            continue
        u0, v0, u1, v1 = win
        r = rays[v0:v1 + 1, u0:u1 + 1]
        s = (top - origin[2]) / r[..., 2]
        xs = origin[0] + s * r[..., 0]
        ys = origin[1] + s * r[..., 1]
        inside = obj.contains(xs, ys) & (s > 0)
        if not inside.any():
            continue
        sub_c = color[v0:v1 + 1, u0:u1 + 1]
        if obj.texture_id is not None:
            lx, ly = obj.to_local(xs[inside], ys[inside])
            sub_c[inside] = texture_color(obj.texture_id, lx, ly)
        else:
            sub_c[inside] = obj.color
        depth[v0:v1 + 1, u0:u1 + 1][inside] = s[inside]
        labels[v0:v1 + 1, u0:u1 + 1][inside] = obj.id
    return Frame(color, depth, labels, float(timestamp))


def ground_truth_mask(frame: Frame, object_id: int) -> np.ndarray:
    return frame.labels == object_id


def base_point_to_pixel(point, cell: CellConfig, pose: RigidTransform | None = None):
    """Project a base-frame point into the image using ``pose`` (default: ground truth)."""
    pose = cell.camera.pose if pose is None else pose
    return project(pose.inverse().apply(point), cell.camera.intrinsics)
