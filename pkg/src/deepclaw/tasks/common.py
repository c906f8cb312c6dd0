"""Plumbing shared by the three task runners."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..calibration import calibrate
from ..geometry import PixelCoord, RigidTransform, deproject
from ..simcell import CellConfig, Frame, Region, render
from .protocol import TaskProtocol


@dataclass
class TaskResult:
    records: list
    outcome: dict
    frames: dict = field(default_factory=dict)
    cell: CellConfig | None = None


@dataclass
class RunContext:
    """Per-repetition state: cell, seeded streams, calibrated hand-eye and a sim clock."""

    protocol: TaskProtocol
    cell: CellConfig
    repetition: int
    params: dict
    rng_scene: np.random.Generator
    rng_policy: np.random.Generator
    rng_grasp: np.random.Generator
    hand_eye: RigidTransform
    calibration_rms: float
    clock: float = 0.0
    frames: dict = field(default_factory=dict)
    _n_frames: int = 0

    @classmethod
    def create(cls, protocol: TaskProtocol, cell: CellConfig | None, repetition: int) -> "RunContext":
        cell = protocol.load_cell() if cell is None else cell
        params = protocol.effective_params()
        seed = protocol.seed + repetition
        scene_ss, policy_ss, grasp_ss, calib_ss = np.random.SeedSequence(seed).spawn(4)
        cal = params["calibration"]
        result = calibrate(cell, int(cal["poses"]), seed=int(calib_ss.generate_state(1)[0]),
                           noise_sigma=float(cal["noise_mm"]) / 1000.0)
        return cls(protocol, cell, repetition, params,
                   np.random.default_rng(scene_ss), np.random.default_rng(policy_ss),
                   np.random.default_rng(grasp_ss), result.hand_eye, result.rms_residual)

    def observe(self, scene) -> tuple[Frame, list]:
        """Render at the current sim time; keep the frame according to the record mode."""
        frame = render(scene, self.cell, self.clock)
        mode = self.protocol.record.get("frames", "first")
        refs = []
        if mode == "all" or (mode == "first" and self._n_frames == 0):
            ref = f"{self.repetition:02d}{self._n_frames:02d}"
            self.frames[ref] = frame
            refs.append(ref)
        self._n_frames += 1
        return frame, refs

    def latencies(self) -> dict:
        return {k: float(v) for k, v in self.params["stage_latency_s"].items()}

    def pixel_to_base(self, pixel: PixelCoord, frame: Frame) -> np.ndarray:
        """Lift an image point to the base frame through the calibrated hand-eye."""
        u = int(round(pixel.u))
        v = int(round(pixel.v))
        depth = float(frame.depth[v, u])
        return self.hand_eye.apply(deproject(PixelCoord(pixel.u, pixel.v), depth, self.cell.camera.intrinsics))

    def grasp_height(self) -> float:
        return self.cell.table.surface_z + self.cell.gripper.grasp_depth_offset


def region_from_params(name: str, spec: dict) -> Region:
    (cx, cy), (sx, sy) = spec["center"], spec["size"]
    return Region.centered(name, float(cx), float(cy), float(sx), float(sy))


def pylist(a) -> list:
    return [float(x) for x in np.asarray(a, dtype=float).ravel()]


def polygon_list(poly) -> list:
    return [[float(x), float(y)] for x, y in np.asarray(poly, dtype=float)]
