"""Arm timing and gripper/placement state transitions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidPathError, OutOfWorkspaceError
from ..geometry import angle_diff, rot_z
from .config import CellConfig
from .scene import Scene, SceneObject


def segment_time(distance: float, speed: float, accel: float) -> float:
    """Rest-to-rest duration of a trapezoidal (or triangular) velocity profile."""
    if distance <= 0:
        return 0.0
    if distance >= speed * speed / accel:
        return distance / speed + speed / accel
    return 2.0 * math.sqrt(distance / accel)


def move_time(waypoints, cell: CellConfig) -> float:
    """Execution time of a waypoint path, each segment starting and ending at rest."""
    pts = np.asarray(waypoints, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise InvalidPathError("a path needs at least two waypoints")
    v, a = cell.arm.joint_speed_limit, cell.arm.joint_accel_limit
    lengths = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    return cell.arm.arm_agility * sum(segment_time(float(d), v, a) for d in lengths)


@dataclass(frozen=True)
class Grasp:
    point: tuple[float, float, float]  # base frame
    angle: float  # closing direction yaw in the base frame


@dataclass(frozen=True)
class GraspOutcome:
    success: bool
    object_id: int | None
    probability: float = 0.0
    held: SceneObject | None = None


def grasp_probability(obj: SceneObject, cell: CellConfig, angle: float) -> float:
    """Closed-form success probability of a grasp landing on ``obj``."""
    g = cell.gripper
    if g.kind == "suction":
        return g.base_success
    width_margin = min(max((g.max_opening - obj.graspable_width) / g.max_opening, 0.0), 1.0)
    # square footprints present a graspable face every pi/2
    delta = angle_diff(angle, obj.minor_axis_angle, obj.grasp_symmetry)
    alignment = math.cos(delta) ** 2
    return g.base_success * width_margin * alignment


def _check_workspace(cell: CellConfig, x, y):
    if not cell.table.contains(x, y):
        raise OutOfWorkspaceError(f"({x:.3f}, {y:.3f}) is outside the table extents")


def execute_grasp(scene: Scene, cell: CellConfig, grasp: Grasp, rng: np.random.Generator) -> GraspOutcome:
    """Attempt a top-down grasp; on success the object leaves the scene and is returned as held.

    A grasp that lands on no object is a miss (``success=False``), not an
    error, and consumes no random draws.
    """
    x, y, z = (float(c) for c in grasp.point)
    _check_workspace(cell, x, y)
    if z < cell.table.surface_z:
        raise OutOfWorkspaceError("grasp point is below the table surface")
    obj = scene.object_at(x, y)
    if obj is None:
        return GraspOutcome(False, None, 0.0)
    p = grasp_probability(obj, cell, grasp.angle)
    if rng.random() < p:
        scene.remove(obj.id)
        return GraspOutcome(True, obj.id, p, obj)
    return GraspOutcome(False, obj.id, p)


def place(scene: Scene, held: SceneObject, target, angle: float, cell: CellConfig | None = None) -> Scene:
    """Put ``held`` down with its center at ``target`` (x, y) and yaw ``angle``."""
    x, y = float(target[0]), float(target[1])
    if cell is not None:
        _check_workspace(cell, x, y)
        z = cell.table.surface_z
    else:
        z = float(held.pose.translation[2])
    scene.add(held.moved(x, y, angle, z=z))
    return scene


def transported_pose(held: SceneObject, grasp_xy, target_xy, rotation: float):
    """Where the object's center and yaw end up when the gripper moves rigidly.

    The gripper picks at ``grasp_xy``, travels to ``target_xy`` and turns by
    ``rotation``; the object keeps its offset from the gripper axis.
    """
    offset = held.center - np.asarray(grasp_xy, dtype=float)[:2]
    moved = rot_z(rotation)[:2, :2] @ offset
    center = np.asarray(target_xy, dtype=float)[:2] + moved
    return center, held.yaw + rotation
