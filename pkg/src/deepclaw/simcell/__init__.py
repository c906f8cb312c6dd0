"""Simulated robot cell: configuration, scene, rendering and actions."""
from .actions import (
    Grasp,
    GraspOutcome,
    execute_grasp,
    grasp_probability,
    move_time,
    place,
    segment_time,
    transported_pose,
)
from .config import (
    ArmConfig,
    CameraConfig,
    CellConfig,
    GripperConfig,
    TableConfig,
    list_presets,
    load_cell,
    load_cell_dict,
    validate_cell_dict,
)
from .render import TABLE_COLOR, Frame, render
from .scene import Region, Scene, SceneObject, scatter

__all__ = [
    "ArmConfig", "CameraConfig", "CellConfig", "Frame", "Grasp", "GraspOutcome", "GripperConfig",
    "Region", "Scene", "SceneObject", "TABLE_COLOR", "TableConfig", "execute_grasp", "grasp_probability",
    "list_presets", "load_cell", "load_cell_dict", "move_time", "place", "render", "scatter",
    "segment_time", "transported_pose", "validate_cell_dict",
]
