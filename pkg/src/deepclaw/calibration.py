"""Hand-eye calibration by rigid point-set registration.

The robot carries a small checkerboard at a known offset from its tool
center point; the camera reports the board corners in its own frame. The
camera-to-base transform is the least-squares rigid fit between the two
point sets (SVD with a reflection guard, scale fixed to one).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, NoObservationsError
from .geometry import RigidTransform, deproject, project, rot_x, rot_y, rot_z, PixelCoord
from .simcell.config import CellConfig

BOARD_SIDE = 0.06
BOARD_OFFSET = 0.08  # board plane below the TCP
# board corners in the TCP frame; tool z points down, so -z is toward the camera
BOARD_CORNERS_TCP = np.array([
    [-BOARD_SIDE / 2, -BOARD_SIDE / 2, -BOARD_OFFSET],
    [BOARD_SIDE / 2, -BOARD_SIDE / 2, -BOARD_OFFSET],
    [BOARD_SIDE / 2, BOARD_SIDE / 2, -BOARD_OFFSET],
    [-BOARD_SIDE / 2, BOARD_SIDE / 2, -BOARD_OFFSET],
])
DEGENERACY_RATIO = 1e-12
DEFAULT_POSES = 10


@dataclass(frozen=True)
class PointCorrespondences:
    robot_points: np.ndarray  # (N, 3) base frame
    camera_points: np.ndarray  # (N, 3) camera frame

    def __post_init__(self):
        r = np.asarray(self.robot_points, dtype=float).reshape(-1, 3)
        c = np.asarray(self.camera_points, dtype=float).reshape(-1, 3)
        if len(r) != len(c):
            raise ValueError("robot and camera point lists differ in length")
        object.__setattr__(self, "robot_points", r)
        object.__setattr__(self, "camera_points", c)

    def __len__(self):
        return len(self.robot_points)


@dataclass(frozen=True)
class CalibrationResult:
    hand_eye: RigidTransform  # camera -> base
    rms_residual: float
    per_point_residuals: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "rotation": [float(x) for x in self.hand_eye.rotation.ravel()],
            "translation": [float(x) for x in self.hand_eye.translation],
            "rms_residual": float(self.rms_residual),
        }


@dataclass(frozen=True)
class CalibrationReport:
    max_error: float
    mean_error: float
    n_probe: int


def register_rigid(c: PointCorrespondences) -> CalibrationResult:
    """Least-squares rigid transform mapping camera points onto robot points."""
    if len(c) < 3:
        raise DegenerateInputError(f"need at least 3 correspondences, got {len(c)}")
    a, b = c.camera_points, c.robot_points
    a_mean, b_mean = a.mean(axis=0), b.mean(axis=0)
    h = (a - a_mean).T @ (b - b_mean)
    u, s, vt = np.linalg.svd(h)
    if s[0] == 0 or s[1] < DEGENERACY_RATIO * s[0]:
        raise DegenerateInputError("point configuration is collinear or coincident")
    v = vt.T
    d = np.sign(np.linalg.det(v @ u.T)) or 1.0
    r = v @ np.diag([1.0, 1.0, d]) @ u.T
    t = b_mean - r @ a_mean
    hand_eye = RigidTransform(r, t)
    residuals = np.linalg.norm(b - hand_eye.apply(a), axis=1)
    return CalibrationResult(hand_eye, float(np.sqrt(np.mean(residuals**2))), residuals)


def _sample_tcp_pose(cell: CellConfig, rng: np.random.Generator) -> RigidTransform:
    # keep the board inside the view cone: 70% of the half-field at board depth
    k = cell.camera.intrinsics
    z = cell.table.surface_z + rng.uniform(0.15, 0.5)
    depth = cell.camera.pose.translation[2] - z + BOARD_OFFSET
    hx = max(0.7 * depth * min(k.cx, k.width - k.cx) / k.fx - BOARD_SIDE, 0.0)
    hy = max(0.7 * depth * min(k.cy, k.height - k.cy) / k.fy - BOARD_SIDE, 0.0)
    cx, cy = cell.camera.pose.translation[:2]
    x = cx + rng.uniform(-hx, hx)
    y = cy + rng.uniform(-hy, hy)
    tilt = np.clip(rng.normal(scale=math.radians(10), size=2), -math.radians(25), math.radians(25))
    r = rot_z(rng.uniform(-math.pi, math.pi)) @ rot_x(tilt[0]) @ rot_y(tilt[1]) @ np.diag([1.0, -1.0, -1.0])
    return RigidTransform(r, [x, y, z])


def collect_checkerboard_correspondences(cell: CellConfig, n_poses: int = DEFAULT_POSES, seed: int = 0,
                                         noise_sigma: float = 0.0) -> PointCorrespondences:
    """Simulate checkerboard observations at ``n_poses`` random TCP poses.

    Robot-side corners come from forward kinematics (exact); camera-side
    corners come from the cell's ground-truth camera pose plus isotropic
    Gaussian noise of ``noise_sigma`` meters. Poses whose board is not fully
    inside the image are skipped with a warning.
    """
    rng = np.random.default_rng(seed)
    k = cell.camera.intrinsics
    base_to_cam = cell.camera.pose.inverse()
    robot, camera = [], []
    skipped = 0
    for i in range(n_poses):
        tcp = _sample_tcp_pose(cell, rng)
        noise = rng.normal(scale=noise_sigma, size=(len(BOARD_CORNERS_TCP), 3)) if noise_sigma > 0 else 0.0
        corners_base = tcp.apply(BOARD_CORNERS_TCP)
        corners_cam = base_to_cam.apply(corners_base)
        if not all(p[2] > 0 and project(p, k)[0].in_image(k) for p in corners_cam):
            warnings.warn(f"calibration pose {i} outside camera frustum; skipped", RuntimeWarning, stacklevel=2)
            skipped += 1
            continue
        robot.append(corners_base)
        camera.append(corners_cam + noise)
    if not robot:
        raise NoObservationsError("no checkerboard observations collected")
    return PointCorrespondences(np.concatenate(robot), np.concatenate(camera))


def calibrate(cell: CellConfig, n_poses: int = DEFAULT_POSES, seed: int = 0,
              noise_sigma: float = 0.0) -> CalibrationResult:
    return register_rigid(collect_checkerboard_correspondences(cell, n_poses, seed, noise_sigma))


def verify_calibration(cell: CellConfig, result: CalibrationResult, n_probe: int = 100,
                       seed: int = 0) -> CalibrationReport:
    """Compare base-frame positions of random in-view probe points under both transforms."""
    rng = np.random.default_rng(seed)
    k = cell.camera.intrinsics
    truth = cell.camera.pose
    errors = np.empty(n_probe)
    for i in range(n_probe):
        pix = PixelCoord(rng.uniform(0, k.width - 1), rng.uniform(0, k.height - 1))
        # depth somewhere between the table plane and 30 cm above it
        depth = truth.translation[2] - cell.table.surface_z - rng.uniform(0.0, 0.3)
        p_cam = deproject(pix, depth, k)
        errors[i] = np.linalg.norm(truth.apply(p_cam) - result.hand_eye.apply(p_cam))
    return CalibrationReport(float(errors.max()), float(errors.mean()), n_probe)
