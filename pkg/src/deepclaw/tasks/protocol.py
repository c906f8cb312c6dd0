"""Task protocol: what to run, on which cell, how often, with which stages."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import ConfigError
from ..pipeline import STAGES
from ..simcell.config import CellConfig, deep_merge, load_cell_dict, validate_cell_dict

TASKS = ("tictactoe", "clawmachine", "jigsaw")

# Spatial vs temporal reasoning class of each game; the bin-clearing game
# is not classified either way.
REASONING = {"tictactoe": "temporal", "jigsaw": "spatial", "clawmachine": "unclassified"}

DEFAULT_STAGES = {
    "tictactoe": {"segmentation": "contour", "recognition": "color", "grasp": "analytic", "motion": "waypoint"},
    "clawmachine": {"segmentation": "contour", "recognition": "color", "grasp": "analytic", "motion": "waypoint"},
    "jigsaw": {"segmentation": "contour", "recognition": "template", "grasp": "analytic", "motion": "waypoint"},
}
REQUIRED_RECOGNITION = {"tictactoe": "color", "jigsaw": "template"}

_COMMON_PARAMS = {
    "calibration": {"poses": 10, "noise_mm": 0.5},
    "stage_latency_s": {"segmentation": 0.0, "recognition": 0.0, "grasp": 0.0, "motion": 0.0},
    "max_retries": 3,
    "cell_overrides": {},
}

DEFAULT_PARAMS = {
    "tictactoe": {
        "board_center": [0.0, 0.0],
        "board_cell": 0.065,
        "cube_side": 0.025,
        "piece_rows_y": [-0.12, -0.06, 0.0, 0.06, 0.12],
        "piece_columns_x": [-0.24, 0.24],
        "max_replans": 5,
    },
    "clawmachine": {
        "n_toys": 8,
        "source_bin": {"center": [-0.18, 0.0], "size": [0.6, 0.7]},
        "target_bin": {"center": [0.32, 0.0], "size": [0.3, 0.4]},
        "toy_major": [0.045, 0.065],
        "toy_minor": [0.02, 0.035],
        "toy_height": [0.04, 0.07],
        "attempt_cap": 50,
    },
    "jigsaw": {
        "assembly_origin": [0.28, 0.0],
        "scatter_region": {"center": [-0.15, 0.0], "size": [0.5, 0.5]},
    },
}


@dataclass
class TaskProtocol:
    task: str
    cell: str
    repeat: int = 1
    seed: int = 0
    depth: int = 3
    stages: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    reasoning: str = ""
    record: dict = field(default_factory=lambda: {"frames": "first"})
    base_dir: str | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.stages:
            self.stages = dict(DEFAULT_STAGES.get(self.task, {}))
        if not self.reasoning:
            self.reasoning = REASONING.get(self.task, "unclassified")

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "TaskProtocol":
        violations = validate_task_dict(d)
        if violations:
            raise ConfigError(violations)
        return cls(
            task=d["task"], cell=d["cell"], repeat=int(d.get("repeat", 1)), seed=int(d.get("seed", 0)),
            depth=int(d.get("depth", 3)), stages=dict(d.get("stages") or {}),
            params=copy.deepcopy(d.get("params") or {}), reasoning=d.get("reasoning", ""),
            record=dict(d.get("record") or {"frames": "first"}),
            base_dir=None if base_dir is None else str(base_dir),
        )

    def to_dict(self) -> dict:
        return {
            "task": self.task, "cell": self.cell, "repeat": self.repeat, "seed": self.seed,
            "depth": self.depth, "stages": dict(self.stages), "params": copy.deepcopy(self.params),
            "reasoning": self.reasoning, "record": dict(self.record),
        }

    def effective_params(self) -> dict:
        merged = deep_merge(_COMMON_PARAMS, DEFAULT_PARAMS[self.task])
        return deep_merge(merged, self.params)

    def cell_ref(self) -> str:
        ref = Path(self.cell)
        if not ref.is_absolute() and self.base_dir is not None and (Path(self.base_dir) / ref).is_file():
            return str(Path(self.base_dir) / ref)
        return self.cell

    def load_cell(self) -> CellConfig:
        return CellConfig.from_dict(self.effective_cell_dict())

    def effective_cell_dict(self) -> dict:
        base = load_cell_dict(self.cell_ref())
        return deep_merge(base, self.effective_params().get("cell_overrides") or {})


def validate_task_dict(d, cell_dict: dict | None = None) -> list[str]:
    """Schema and invariant check; ``cell_dict`` enables cross-checks against the cell."""
    v: list[str] = []
    if not isinstance(d, dict):
        return ["<root>: expected a JSON object"]
    task = d.get("task")
    if task not in TASKS:
        v.append(f"task: must be one of {TASKS} (got {task!r})")
    if not isinstance(d.get("cell"), str) or not d.get("cell"):
        v.append("cell: missing cell reference")
    repeat = d.get("repeat", 1)
    if not isinstance(repeat, int) or isinstance(repeat, bool) or repeat < 1:
        v.append(f"repeat: must be an integer >= 1 (got {repeat!r})")
    seed = d.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        v.append(f"seed: must be a non-negative integer (got {seed!r})")
    depth = d.get("depth", 3)
    if not isinstance(depth, int) or isinstance(depth, bool) or not 1 <= depth <= 9:
        v.append(f"depth: must be an integer in [1, 9] (got {depth!r})")
    stages = d.get("stages") or {}
    if not isinstance(stages, dict):
        v.append("stages: expected an object")
        stages = {}
    for kind, name in stages.items():
        if kind not in STAGES:
            v.append(f"stages.{kind}: unknown stage kind")
        elif name not in STAGES[kind]:
            v.append(f"stages.{kind}: unknown implementation {name!r} (available: {sorted(STAGES[kind])})")
    if task in REQUIRED_RECOGNITION and stages.get("recognition", REQUIRED_RECOGNITION[task]) != REQUIRED_RECOGNITION[task]:
        v.append(f"stages.recognition: {task} requires the {REQUIRED_RECOGNITION[task]!r} recognizer")
    frames = (d.get("record") or {}).get("frames", "first")
    if frames not in ("all", "first", "none"):
        v.append(f"record.frames: must be 'all', 'first' or 'none' (got {frames!r})")
    params = d.get("params") or {}
    if not isinstance(params, dict):
        v.append("params: expected an object")
        params = {}
    retries = params.get("max_retries", 3)
    if not isinstance(retries, int) or retries < 0:
        v.append(f"params.max_retries: must be a non-negative integer (got {retries!r})")
    if task == "clawmachine":
        cap = params.get("attempt_cap", 50)
        if not isinstance(cap, int) or cap < 1:
            v.append(f"params.attempt_cap: must be a positive integer (got {cap!r})")
    overrides = params.get("cell_overrides") or {}
    if cell_dict is not None:
        effective = deep_merge(cell_dict, overrides)
        v += [f"cell.{msg}" for msg in validate_cell_dict(effective)]
        if task == "jigsaw" and (effective.get("gripper") or {}).get("kind") != "suction":
            v.append("cell.gripper.kind: jigsaw requires a suction gripper; "
                     "the 5 mm thin pieces are too challenging for finger grippers")
    return v


def load_task(path) -> TaskProtocol:
    path = Path(path)
    return TaskProtocol.from_dict(json.loads(path.read_text()), base_dir=path.parent)


def shipped_task_path(name: str):
    return resources.files("deepclaw") / "data" / "tasks" / f"{name}.json"
