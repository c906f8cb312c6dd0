"""Robot cell configuration: arm, gripper, camera and table."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..geometry import CameraIntrinsics, RigidTransform

GRIPPER_KINDS = ("parallel", "suction")


@dataclass(frozen=True)
class ArmConfig:
    dof: int
    joint_speed_limit: float  # m/s
    joint_accel_limit: float  # m/s^2
    home_pose: RigidTransform
    arm_agility: float = 1.0
    model: str = ""


@dataclass(frozen=True)
class GripperConfig:
    kind: str
    closing_time: float
    base_success: float
    max_opening: float | None = None
    grasp_depth_offset: float = 0.005
    model: str = ""


@dataclass(frozen=True)
class CameraConfig:
    intrinsics: CameraIntrinsics
    pose: RigidTransform  # camera -> base, ground truth
    mount_height: float
    model: str = ""


@dataclass(frozen=True)
class TableConfig:
    x_extent: tuple[float, float]
    y_extent: tuple[float, float]
    surface_z: float = 0.0

    def contains(self, x, y) -> bool:
        return self.x_extent[0] <= x <= self.x_extent[1] and self.y_extent[0] <= y <= self.y_extent[1]


@dataclass(frozen=True)
class CellConfig:
    name: str
    arm: ArmConfig
    gripper: GripperConfig
    camera: CameraConfig
    table: TableConfig
    seed: int = 0
    notes: list = field(default_factory=list, compare=False)

    @classmethod
    def from_dict(cls, d: dict) -> "CellConfig":
        violations = validate_cell_dict(d)
        if violations:
            raise ConfigError(violations)
        a, g, c, t = d["arm"], d["gripper"], d["camera"], d["table"]
        return cls(
            name=d["name"],
            arm=ArmConfig(
                dof=int(a["dof"]),
                joint_speed_limit=float(a["joint_speed_limit"]),
                joint_accel_limit=float(a["joint_accel_limit"]),
                home_pose=RigidTransform.from_dict(a["home_pose"]),
                arm_agility=float(a.get("arm_agility", 1.0)),
                model=a.get("model", ""),
            ),
            gripper=GripperConfig(
                kind=g["kind"],
                closing_time=float(g["closing_time"]),
                base_success=float(g["base_success"]),
                max_opening=None if g.get("max_opening") is None else float(g["max_opening"]),
                grasp_depth_offset=float(g.get("grasp_depth_offset", 0.005)),
                model=g.get("model", ""),
            ),
            camera=CameraConfig(
                intrinsics=CameraIntrinsics.from_dict(c["intrinsics"]),
                pose=RigidTransform.from_dict(c["pose"]),
                mount_height=float(c["mount_height"]),
                model=c.get("model", ""),
            ),
            table=TableConfig(
                x_extent=tuple(map(float, t["x_extent"])),
                y_extent=tuple(map(float, t["y_extent"])),
                surface_z=float(t.get("surface_z", 0.0)),
            ),
            seed=int(d.get("seed", 0)),
            notes=list(d.get("notes", [])),
        )

    def to_dict(self) -> dict:
        g = self.gripper
        return {
            "name": self.name,
            "notes": list(self.notes),
            "seed": self.seed,
            "arm": {
                "model": self.arm.model,
                "dof": self.arm.dof,
                "joint_speed_limit": self.arm.joint_speed_limit,
                "joint_accel_limit": self.arm.joint_accel_limit,
                "arm_agility": self.arm.arm_agility,
                "home_pose": self.arm.home_pose.to_dict(),
            },
            "gripper": {
                "model": g.model,
                "kind": g.kind,
                "max_opening": g.max_opening,
                "closing_time": g.closing_time,
                "base_success": g.base_success,
                "grasp_depth_offset": g.grasp_depth_offset,
            },
            "camera": {
                "model": self.camera.model,
                "intrinsics": self.camera.intrinsics.to_dict(),
                "pose": self.camera.pose.to_dict(),
                "mount_height": self.camera.mount_height,
            },
            "table": {
                "x_extent": list(self.table.x_extent),
                "y_extent": list(self.table.y_extent),
                "surface_z": self.table.surface_z,
            },
        }

    def with_overrides(self, overrides: dict | None) -> "CellConfig":
        if not overrides:
            return self
        return CellConfig.from_dict(deep_merge(self.to_dict(), overrides))

    @property
    def home(self) -> np.ndarray:
        return np.array(self.arm.home_pose.translation)


def deep_merge(base: dict, overrides: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _num(d, path, violations, *, positive=False, nonneg=False, required=True):
    cur = d
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            if required:
                violations.append(f"{path}: missing")
            return None
        cur = cur[part]
    if isinstance(cur, bool) or not isinstance(cur, (int, float)):
        violations.append(f"{path}: expected a number, got {cur!r}")
        return None
    if positive and not cur > 0:
        violations.append(f"{path}: must be > 0 (got {cur})")
    if nonneg and not cur >= 0:
        violations.append(f"{path}: must be >= 0 (got {cur})")
    return float(cur)


def _pose(d, path, violations):
    cur = d
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            violations.append(f"{path}: missing")
            return None
        cur = cur[part]
    try:
        return RigidTransform.from_dict(cur)
    except (KeyError, TypeError, ValueError) as exc:
        violations.append(f"{path}: invalid rigid transform ({exc})")
        return None


def validate_cell_dict(d) -> list[str]:
    """Return a list of violations (empty when the cell config is valid)."""
    v: list[str] = []
    if not isinstance(d, dict):
        return ["<root>: expected a JSON object"]
    if not isinstance(d.get("name"), str) or not d.get("name"):
        v.append("name: missing or not a string")
    for section in ("arm", "gripper", "camera", "table"):
        if not isinstance(d.get(section), dict):
            v.append(f"{section}: missing section")
    if v:
        return v

    dof = d["arm"].get("dof")
    if not isinstance(dof, int) or dof < 1:
        v.append(f"arm.dof: must be a positive integer (got {dof!r})")
    _num(d, "arm.joint_speed_limit", v, positive=True)
    _num(d, "arm.joint_accel_limit", v, positive=True)
    _num(d, "arm.arm_agility", v, positive=True, required=False)
    _pose(d, "arm.home_pose", v)

    g = d["gripper"]
    kind = g.get("kind")
    if kind not in GRIPPER_KINDS:
        v.append(f"gripper.kind: must be one of {GRIPPER_KINDS} (got {kind!r})")
    _num(d, "gripper.closing_time", v, nonneg=True)
    bs = _num(d, "gripper.base_success", v)
    if bs is not None and not 0 < bs <= 1:
        v.append(f"gripper.base_success: must be in (0, 1] (got {bs})")
    _num(d, "gripper.grasp_depth_offset", v, nonneg=True, required=False)
    if kind == "parallel":
        _num(d, "gripper.max_opening", v, positive=True)

    c = d["camera"]
    intr = c.get("intrinsics")
    if not isinstance(intr, dict):
        v.append("camera.intrinsics: missing")
    else:
        try:
            CameraIntrinsics.from_dict(intr)
        except (KeyError, TypeError, ValueError) as exc:
            v.append(f"camera.intrinsics: invalid ({exc})")
    mh = _num(d, "camera.mount_height", v, positive=True)
    pose = _pose(d, "camera.pose", v)

    t = d["table"]
    for axis in ("x_extent", "y_extent"):
        ext = t.get(axis)
        if not (isinstance(ext, (list, tuple)) and len(ext) == 2 and ext[0] < ext[1]):
            v.append(f"table.{axis}: expected [min, max] with min < max")
    sz = _num(d, "table.surface_z", v, required=False)
    if pose is not None and mh is not None:
        height = pose.translation[2] - (sz or 0.0)
        if abs(height - mh) > 1e-3:
            v.append(f"camera.mount_height: {mh} disagrees with camera pose height above table ({height:.4f})")
    seed = d.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        v.append(f"seed: must be a non-negative integer (got {seed!r})")
    return v


PRESETS = ("franka", "ur5-rg6", "ur10e-hande")


def preset_path(name: str):
    return resources.files("deepclaw") / "data" / "cells" / f"cell-{name}.json"


def list_presets() -> list[str]:
    return list(PRESETS)


def load_cell(ref) -> CellConfig:
    """Load a cell from a JSON path or a shipped preset name (``franka``, ``cell-franka.json``...)."""
    return CellConfig.from_dict(load_cell_dict(ref))


def load_cell_dict(ref) -> dict:
    path = Path(ref)
    if path.is_file():
        return json.loads(path.read_text())
    name = str(ref)
    if path.parent != Path("."):
        # an explicit path that does not exist never falls back to a preset
        raise FileNotFoundError(f"cell config not found: {ref}")
    if name.startswith("cell-"):
        name = name[len("cell-"):]
    if name.endswith(".json"):
        name = name[: -len(".json")]
    if name in PRESETS:
        return json.loads(preset_path(name).read_text())
    raise FileNotFoundError(f"cell config not found: {ref}")
