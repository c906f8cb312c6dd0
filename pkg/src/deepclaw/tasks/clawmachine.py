"""Claw machine: clear a bin of soft toys with dense grasp-map picking."""
from __future__ import annotations

import math

import numpy as np

from ..errors import SceneGenerationError
from ..geometry import RigidTransform
from ..monitor.metrics import path_length
from ..monitor.records import SubTaskRecord
from ..pipeline import plan_grasp, segment_contour, select_grasp
from ..pipeline.motion import pick_path
from ..simcell import Grasp, Scene, SceneObject, TABLE_COLOR, execute_grasp, move_time, place, scatter
from ..simcell.scene import MAX_PLACEMENT_ATTEMPTS
from .common import RunContext, TaskResult, pylist, region_from_params
from .protocol import TaskProtocol

TOY_COLORS = (
    (200, 60, 60), (220, 140, 40), (150, 90, 40), (120, 60, 160),
    (60, 140, 200), (200, 80, 150), (90, 160, 90), (60, 60, 60),
)


def build_scene(params, rng) -> Scene:
    source = region_from_params("source_bin", params["source_bin"])
    target = region_from_params("target_bin", params["target_bin"])
    scene = Scene([], {"source_bin": source, "target_bin": target})
    toys = []
    for i in range(int(params["n_toys"])):
        major = rng.uniform(*params["toy_major"])
        minor = min(rng.uniform(*params["toy_minor"]), major)
        height = rng.uniform(*params["toy_height"])
        toys.append(SceneObject(i, "blob", RigidTransform.identity(), TOY_COLORS[i % len(TOY_COLORS)],
                                height, (major, minor)))
    scatter(scene, toys, source, rng)
    return scene


def _drop_pose(scene, held, target, rng):
    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        r = held.radius
        x = rng.uniform(target.x_extent[0] + r, target.x_extent[1] - r)
        y = rng.uniform(target.y_extent[0] + r, target.y_extent[1] - r)
        yaw = rng.uniform(0, 2 * math.pi)
        cand = held.moved(x, y, yaw)
        if not scene.overlaps(cand, margin=0.005):
            return x, y, yaw
    raise SceneGenerationError("no free drop location in the target bin")


def run_clawmachine(protocol: TaskProtocol, cell=None, repetition: int = 0) -> TaskResult:
    """Pick toys from the source bin until it is empty or the attempt cap is hit.

    Every grasp attempt is one sub-task record. ``t_pick`` is the motion
    from home down to the grasp and back up, without gripper closing time.
    """
    ctx = RunContext.create(protocol, cell, repetition)
    cell, params = ctx.cell, ctx.params
    scene = build_scene(params, ctx.rng_scene)
    source, target = scene.regions["source_bin"], scene.regions["target_bin"]
    n_toys = int(params["n_toys"])
    cap = int(params["attempt_cap"])
    latency = ctx.latencies()
    closing = cell.gripper.closing_time
    lift = np.array([0.0, 0.0, 0.10])
    records = []
    successes = 0

    def in_source():
        return [o for o in scene.objects if source.contains(*o.center)]

    while in_source() and len(records) < cap:
        frame, refs = ctx.observe(scene)
        seg = segment_contour(frame, TABLE_COLOR)
        keep = [i for i, c in enumerate(seg.centroids) if source.contains(*ctx.pixel_to_base(c, frame)[:2])]
        if not keep:
            records.append(SubTaskRecord(repetition, len(records), "abort", "not_perceived", False,
                                         stages=dict(protocol.stages), frame_refs=refs,
                                         data={"n_objects": n_toys, "remaining": len(in_source())}))
            break
        gmap = plan_grasp(seg.subset(keep), frame)
        decision = select_grasp(gmap, frame, ctx.hand_eye, cell)
        point = decision.base_point
        outcome = execute_grasp(scene, cell, Grasp(tuple(point), decision.base_angle), ctx.rng_grasp)
        pick = pick_path(point, cell)
        t_pick = move_time(pick, cell)
        durations = dict(latency)
        durations.update({"pick_motion": t_pick, "gripper_close": closing})
        data = {"n_objects": n_toys, "pixel": [decision.pixel.u, decision.pixel.v], "bin": decision.bin,
                "probability": decision.probability, "grasp_point": pylist(point),
                "object_id": outcome.object_id, "success_probability": outcome.probability}
        if outcome.success:
            successes += 1
            x, y, yaw = _drop_pose(scene, outcome.held, target, ctx.rng_policy)
            drop = np.array([x, y, ctx.grasp_height()])
            rest = [point + lift, drop + lift, drop, drop + lift, cell.home]
            place(scene, outcome.held, (x, y), yaw, cell)
            path = pick + rest[1:]
            t_sub = move_time(path, cell)
            durations["place_motion"] = t_sub - t_pick
            record = SubTaskRecord(repetition, len(records), "pick_place", "success", True, 1, 0, t_sub, t_pick,
                                   path_length(path), durations, dict(protocol.stages), refs, data)
        else:
            path = pick + [cell.home]
            t_sub = move_time(path, cell)
            durations["return_motion"] = t_sub - t_pick
            outcome_name = "miss" if outcome.object_id is None else "grasp_failed"
            record = SubTaskRecord(repetition, len(records), "pick", outcome_name, False, 1, 1, None, t_pick,
                                   path_length(path), durations, dict(protocol.stages), refs, data)
        ctx.clock += t_sub + closing + sum(latency.values())
        records.append(record)

    attempts = sum(r.attempts for r in records)
    outcome = {
        "attempts": attempts, "successes": successes, "complete": successes == n_toys,
        "r_success": successes / attempts if attempts else 0.0, "calibration_rms": ctx.calibration_rms,
    }
    return TaskResult(records, outcome, ctx.frames, cell)
