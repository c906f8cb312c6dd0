"""Dense grasp-success maps over 18 orientation bins and best-grasp selection."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import NoGraspError
from ..geometry import PixelCoord, RigidTransform, deproject, image_to_base_angle

N_BINS = 18
BIN_WIDTH = math.pi / N_BINS
FLOOR = 0.01
PEAK = 0.9


def bin_angle(k: int) -> float:
    return k * BIN_WIDTH


class GraspMap:
    """Success probabilities indexed ``[v, u, bin]``; bin k is the closing direction k*10 deg.

    Stored as the floor value plus dense patches over object boxes, so that
    selection does not have to touch the whole (H, W, 18) field.
    ``probabilities`` materializes the full array on first access.
    """

    def __init__(self, probabilities=None, *, shape=None, patches=()):
        if probabilities is not None:
            p = np.asarray(probabilities, dtype=np.float32)
            if p.ndim != 3 or p.shape[2] != N_BINS:
                raise ValueError(f"grasp map must have shape (H, W, {N_BINS})")
            shape, patches = p.shape[:2], [(0, 0, p)]
        if shape is None:
            raise ValueError("need probabilities or shape")
        self.shape = (int(shape[0]), int(shape[1]), N_BINS)
        self.patches = list(patches)  # (v0, u0, array (h, w, N_BINS))
        self._dense = probabilities if probabilities is not None else None

    @property
    def probabilities(self) -> np.ndarray:
        if self._dense is None:
            dense = np.full(self.shape, FLOOR, dtype=np.float32)
            for v0, u0, patch in self.patches:
                sub = dense[v0:v0 + patch.shape[0], u0:u0 + patch.shape[1]]
                np.maximum(sub, patch, out=sub)
            self._dense = dense
        return self._dense

    @property
    def height(self) -> int:
        return self.shape[0]

    @property
    def width(self) -> int:
        return self.shape[1]

    def value(self, v: int, u: int, k: int) -> float:
        if self._dense is not None:
            return float(self._dense[v, u, k])
        out = FLOOR
        for v0, u0, patch in self.patches:
            if v0 <= v < v0 + patch.shape[0] and u0 <= u < u0 + patch.shape[1]:
                out = max(out, float(patch[v - v0, u - u0, k]))
        return out

    def argmax(self, valid=None):
        """(v, u, bin) of the maximum, first in C order, skipping pixels where ``valid`` is False."""
        best = None
        for v0, u0, patch in self.patches:
            if valid is not None:
                ok = valid[v0:v0 + patch.shape[0], u0:u0 + patch.shape[1]]
                if not ok.any():
                    continue
                patch = np.where(ok[..., None], patch, -np.inf)
            v, u, k = np.unravel_index(int(np.argmax(patch)), patch.shape)
            cand = (float(patch[v, u, k]), (v0 + int(v), u0 + int(u), int(k)))
            if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
                best = cand
        if best is not None and best[0] > FLOOR:
            return best[1]
        # nothing above the floor inside the patches: fall back to the full field
        probs = self.probabilities
        if valid is not None and not valid.all():
            probs = np.where(valid[..., None], probs, -np.inf)
        v, u, k = np.unravel_index(int(np.argmax(probs)), probs.shape)
        return int(v), int(u), int(k)


@dataclass(frozen=True)
class GraspDecision:
    pixel: PixelCoord
    bin: int
    angle: float  # image frame, bin * pi / 18
    base_point: np.ndarray
    base_angle: float  # closing direction yaw in the base frame
    probability: float


def plan_grasp(seg, frame) -> GraspMap:
    """Analytic stand-in for a learned per-pixel grasp network.

    Inside each mask the probability is ``0.9 * cos^2(bin - minor axis)``
    scaled by a radial term that is 1 at the centroid and falls linearly to
    0 at the mask edge, ``1 - r / (r + d)`` with ``r`` the distance to the
    centroid and ``d`` the distance to the nearest non-mask pixel. Every
    entry is at least 0.01.
    """
    h, w = frame.color.shape[:2]
    bins = np.arange(N_BINS) * BIN_WIDTH
    patches = []
    for mask, box, centroid, minor in zip(seg.masks, seg.boxes, seg.centroids, seg.principal_angles):
        u0, v0, u1, v1 = box
        inside = mask[v0:v1 + 1, u0:u1 + 1]
        # pad so the distance transform sees the boundary
        d = ndimage.distance_transform_edt(np.pad(inside, 1))[1:-1, 1:-1]
        vs, us = np.mgrid[v0:v1 + 1, u0:u1 + 1]
        r = np.hypot(us - centroid.u, vs - centroid.v)
        radial = np.where(inside, 1.0 - r / (r + d + 1e-12), 0.0)
        orient = PEAK * np.cos(bins - minor) ** 2
        vals = np.where(inside[..., None], radial[..., None] * orient, FLOOR)
        patches.append((v0, u0, np.maximum(vals, FLOOR).astype(np.float32)))
    return GraspMap(shape=(h, w), patches=patches)


def select_grasp(gmap: GraspMap, frame, hand_eye: RigidTransform, cell) -> GraspDecision:
    """Global argmax over pixels and bins, lifted to the robot base.

    Ties resolve to the lowest v, then u, then bin (C-order argmax). Pixels
    without valid depth are skipped. The base z is replaced by the table
    surface plus the gripper's grasp-depth offset.
    """
    depth = frame.depth
    valid = np.isfinite(depth) & (depth > 0)
    if not valid.any():
        raise NoGraspError("no pixel with valid depth")
    v, u, k = gmap.argmax(None if valid.all() else valid)
    pixel = PixelCoord(int(u), int(v))
    p_cam = deproject(pixel, float(depth[v, u]), cell.camera.intrinsics)
    base = hand_eye.apply(p_cam)
    base[2] = cell.table.surface_z + cell.gripper.grasp_depth_offset
    angle = bin_angle(int(k))
    return GraspDecision(pixel, int(k), angle, base, image_to_base_angle(angle, hand_eye),
                         gmap.value(v, u, k))
