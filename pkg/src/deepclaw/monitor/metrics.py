"""Function-wise and task-wise metrics."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidPathError, UndefinedScoreError
from ..geometry import min_area_rect

FUNCTION_WISE = "function-wise"
TASK_WISE = "task-wise"

# side of the assembled 2x2 jigsaw, meters
JIGSAW_SIDE = 0.102
JIGSAW_STANDARD_AREA = JIGSAW_SIDE**2


@dataclass(frozen=True)
class MetricValue:
    name: str
    value: float
    unit: str
    kind: str

    def __post_init__(self):
        if self.kind not in (FUNCTION_WISE, TASK_WISE):
            raise ValueError(f"metric kind must be {FUNCTION_WISE!r} or {TASK_WISE!r}")


def iou(a, b) -> float:
    """Intersection over union of two boolean masks; 1.0 when both are empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


@dataclass(frozen=True)
class Detection:
    label: object
    confidence: float
    iou: float
    truth_label: object
    truth_id: object = None


def average_precision(detections, truths: int, iou_threshold: float = 0.5) -> float:
    """All-points interpolated AP.

    Detections are ranked by confidence (stable for ties). A detection is a
    true positive when its label equals its truth's label, its IoU reaches
    the threshold, and that truth has not been matched yet.
    """
    dets = list(detections)
    if truths == 0:
        return 1.0 if not dets else 0.0
    if not dets:
        return 0.0
    order = sorted(range(len(dets)), key=lambda i: -dets[i].confidence)
    matched = set()
    tp = np.zeros(len(dets))
    for rank, i in enumerate(order):
        d = dets[i]
        key = d.truth_id if d.truth_id is not None else i
        if d.label == d.truth_label and d.iou >= iou_threshold and key not in matched:
            tp[rank] = 1
            matched.add(key)
    ctp = np.cumsum(tp)
    recall = ctp / truths
    precision = ctp / np.arange(1, len(dets) + 1)
    # precision envelope, then sum over recall steps
    mrec = np.concatenate([[0.0], recall, [recall[-1]]])
    mpre = np.concatenate([[1.0], precision, [0.0]])
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    steps = np.nonzero(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))


def jigsaw_score(final_pieces, standard_area: float = JIGSAW_STANDARD_AREA) -> float:
    """Ideal assembled area over the minimum-area rotated rectangle around all pieces.

    Values above 1 mean pieces overlap; the raw ratio is returned with a
    warning rather than clamped.
    """
    polys = [np.asarray(p, dtype=float).reshape(-1, 2) for p in final_pieces]
    if not polys:
        raise UndefinedScoreError("no placed pieces")
    rect = min_area_rect(np.concatenate(polys))
    if rect.area <= 0:
        raise UndefinedScoreError("placed pieces have zero bounding area")
    score = standard_area / rect.area
    if score > 1 + 1e-9:
        warnings.warn(f"jigsaw score {score:.4f} > 1: pieces overlap", RuntimeWarning, stacklevel=2)
    return float(score)


def path_length(waypoints) -> float:
    pts = np.asarray(waypoints, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise InvalidPathError("path length needs at least two waypoints")
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
