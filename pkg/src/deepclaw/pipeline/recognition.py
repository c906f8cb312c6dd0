"""Recognition stages: nearest palette color and rotated template matching."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .segmentation import SegmentationResult, mask_moments

UNKNOWN = None
MIN_CORRELATION = 0.2
ROTATION_STEP_DEG = 5
EDGE_MARGIN_PX = 2


@dataclass
class RecognitionResult:
    labels: list = field(default_factory=list)
    confidences: list = field(default_factory=list)
    rotations: list | None = None  # radians, image frame; template matching only

    def __len__(self):
        return len(self.labels)


def recognize_color(seg: SegmentationResult, frame, palette) -> RecognitionResult:
    """Label each mask by the palette color nearest to its mean RGB.

    Confidence is the normalized inverse distance over the palette; an exact
    color match gets confidence 1. Ties go to the lowest label id.
    """
    if not palette:
        raise ValueError("palette must not be empty")
    ids = sorted(palette)
    colors = np.array([palette[i] for i in ids], dtype=float)
    out = RecognitionResult()
    for mask in seg.masks:
        mean = frame.color[mask].astype(float).mean(axis=0)
        dist = np.linalg.norm(colors - mean, axis=1)
        best = int(np.argmin(dist))
        if dist[best] == 0:
            conf = 1.0
        else:
            inv = 1.0 / dist
            conf = float(inv[best] / inv.sum())
        out.labels.append(ids[best])
        out.confidences.append(conf)
    return out


@dataclass(frozen=True)
class Template:
    color: np.ndarray  # (h, w, 3)
    mask: np.ndarray  # (h, w) bool

    @classmethod
    def from_raster(cls, raster, mask=None) -> "Template":
        raster = np.asarray(raster)
        if mask is None:
            mask = np.ones(raster.shape[:2], dtype=bool)
        return cls(raster, np.asarray(mask, dtype=bool))


class TemplateBank:
    """Templates pre-rotated over a full turn at a fixed angular step."""

    def __init__(self, templates, step_deg: int = ROTATION_STEP_DEG):
        self.templates = [t if isinstance(t, Template) else Template.from_raster(t) for t in templates]
        self.angles = np.deg2rad(np.arange(0, 360, step_deg))
        radius = max(math.hypot(*t.mask.shape) / 2 for t in self.templates)
        self.half = int(math.ceil(radius)) + 1
        g = np.arange(-self.half, self.half + 1, dtype=float)
        self.dv, self.du = np.meshgrid(g, g, indexing="ij")
        self._colors = []  # per template: (A, N*3)
        self._supports = []  # per template: (A, N*3)
        for t in self.templates:
            center, _ = mask_moments(t.mask)
            cols, sups = [], []
            for a in self.angles:
                c, s = math.cos(a), math.sin(a)
                # inverse rotation: output offset -> template coordinates
                su = c * self.du + s * self.dv + center.u
                sv = -s * self.du + c * self.dv + center.v
                coords = np.array([sv.ravel(), su.ravel()])
                # keep only samples well inside the piece: edge pixels blend with the
                # background and would dominate the correlation
                sup = ndimage.map_coordinates(t.mask.astype(float), coords, order=1, cval=0.0) >= 0.999
                sup = ndimage.binary_erosion(sup.reshape(self.du.shape), iterations=EDGE_MARGIN_PX).ravel()
                chans = [ndimage.map_coordinates(t.color[..., ch].astype(float), coords, order=1, cval=0.0)
                         for ch in range(3)]
                cols.append(np.stack(chans, axis=1).ravel())
                sups.append(np.repeat(sup, 3))
            self._colors.append(np.array(cols))
            self._supports.append(np.array(sups, dtype=float))

    def patch(self, color: np.ndarray, center) -> np.ndarray:
        coords = np.array([(self.dv + center[1]).ravel(), (self.du + center[0]).ravel()])
        chans = [ndimage.map_coordinates(color[..., ch].astype(float), coords, order=1, mode="nearest")
                 for ch in range(3)]
        return np.stack(chans, axis=1).ravel()

    def correlate(self, patch: np.ndarray) -> np.ndarray:
        """Masked normalized cross-correlation, shape (n_templates, n_angles)."""
        scores = np.empty((len(self.templates), len(self.angles)))
        for i, (t, w) in enumerate(zip(self._colors, self._supports)):
            n = w.sum(axis=1)
            mt = (w * t).sum(axis=1) / n
            mp = (w * patch).sum(axis=1) / n
            dt = (t - mt[:, None]) * w
            dp = (patch[None, :] - mp[:, None]) * w
            num = (dt * dp).sum(axis=1)
            den = np.sqrt((dt * dt).sum(axis=1) * (dp * dp).sum(axis=1))
            with np.errstate(invalid="ignore", divide="ignore"):
                scores[i] = np.where(den > 0, num / den, 0.0)
        return scores


def recognize_template(seg: SegmentationResult, frame, templates, bank: TemplateBank | None = None,
                       min_correlation: float = MIN_CORRELATION) -> RecognitionResult:
    """Identify each mask by the best-correlating template over 5-degree rotations.

    ``rotations`` are image-frame angles (from +u toward +v) that rotate the
    template onto the observed piece. Masks whose best correlation falls
    below ``min_correlation`` get label ``None``.
    """
    bank = bank or TemplateBank(templates)
    out = RecognitionResult(rotations=[])
    for centroid in seg.centroids:
        scores = bank.correlate(bank.patch(frame.color, centroid))
        ti, ai = np.unravel_index(int(np.argmax(scores)), scores.shape)
        best = float(scores[ti, ai])
        if best < min_correlation:
            out.labels.append(UNKNOWN)
            out.confidences.append(max(best, 0.0))
            out.rotations.append(0.0)
            continue
        out.labels.append(int(ti))
        out.confidences.append(min(best, 1.0))
        out.rotations.append(float(bank.angles[ai]))
    return out
