"""Background-difference segmentation with connected components and image moments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..geometry import PixelCoord

DEFAULT_THRESHOLD = 50.0
MIN_AREA = 25

# 4-connectivity
_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass
class SegmentationResult:
    masks: list = field(default_factory=list)
    boxes: list = field(default_factory=list)  # (u0, v0, u1, v1), inclusive
    centroids: list = field(default_factory=list)
    principal_angles: list = field(default_factory=list)  # minor axis, image frame, [0, pi)

    def __len__(self):
        return len(self.masks)

    def subset(self, keep) -> "SegmentationResult":
        keep = list(keep)
        return SegmentationResult(
            [self.masks[i] for i in keep], [self.boxes[i] for i in keep],
            [self.centroids[i] for i in keep], [self.principal_angles[i] for i in keep],
        )


def mask_moments(mask: np.ndarray, offset=(0, 0)):
    """Centroid (u, v) and minor-axis angle of a binary mask.

    The angle is measured in the image plane from +u toward +v and reduced
    to [0, pi). For an isotropic mask (a square) it is 0 by convention of
    ``atan2(0, 0)``.
    """
    vs, us = np.nonzero(mask)
    cu, cv = us.mean(), vs.mean()
    du, dv = us - cu, vs - cv
    cu, cv = cu + offset[0], cv + offset[1]
    mu20, mu02, mu11 = (du * du).mean(), (dv * dv).mean(), (du * dv).mean()
    major = 0.5 * math.atan2(2 * mu11, mu20 - mu02)
    minor = (major + math.pi / 2) % math.pi
    if minor >= math.pi - 1e-12:
        minor = 0.0
    return PixelCoord(float(cu), float(cv)), minor


def foreground(color: np.ndarray, background, threshold: float) -> np.ndarray:
    # channel by channel in int32: much faster than a float64 (H, W, 3) temporary
    total = np.zeros(color.shape[:2], dtype=np.int32)
    for ch in range(3):
        d = color[..., ch].astype(np.int32) - int(background[ch])
        total += d * d
    return total > threshold * threshold


def segment_contour(frame, background=(240, 240, 240), threshold: float = DEFAULT_THRESHOLD,
                    min_area: int = MIN_AREA) -> SegmentationResult:
    """Label 4-connected blobs that differ from ``background`` by more than ``threshold``.

    Components are reported in raster order of their first pixel.
    """
    fg = foreground(frame.color, background, threshold)
    labels, n = ndimage.label(fg, structure=_FOUR)
    result = SegmentationResult()
    if n == 0:
        return result
    slices = ndimage.find_objects(labels)
    for idx, sl in enumerate(slices, start=1):
        local = labels[sl] == idx
        area = int(local.sum())
        if area < min_area:
            continue
        mask = np.zeros(fg.shape, dtype=bool)
        mask[sl] = local
        centroid, angle = mask_moments(local, (sl[1].start, sl[0].start))
        v0, v1 = sl[0].start, sl[0].stop - 1
        u0, u1 = sl[1].start, sl[1].stop - 1
        result.masks.append(mask)
        result.boxes.append((u0, v0, u1, v1))
        result.centroids.append(centroid)
        result.principal_angles.append(angle)
    return result
