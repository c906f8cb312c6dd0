"""Jigsaw: recognize four textured pieces and assemble them at a board origin."""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..geometry import RigidTransform, angle_diff, image_to_base_rotation
from ..monitor.metrics import iou, path_length
from ..monitor.records import SubTaskRecord
from ..pipeline import TemplateBank, recognize_template, segment_contour
from ..pipeline.recognition import Template
from ..simcell import (Grasp, Region, Scene, SceneObject, TABLE_COLOR, execute_grasp, move_time, place, render,
                       scatter, transported_pose)
from ..simcell.render import PIECE_OFFSETS, PIECE_SIDE
from .common import RunContext, TaskResult, pylist, polygon_list, region_from_params
from .protocol import TaskProtocol

PIECE_THICKNESS = 0.005
N_PIECES = 4

_BANKS: dict = {}


def make_piece(index: int, x=0.0, y=0.0, yaw=0.0, z=0.0) -> SceneObject:
    return SceneObject(index, "jigsaw_piece", RigidTransform.from_xyz_yaw(x, y, z, yaw), (0, 0, 0),
                       PIECE_THICKNESS, (PIECE_SIDE, PIECE_SIDE), texture_id=index, label=index)


def slot_centers(origin) -> list[np.ndarray]:
    o = np.asarray(origin, dtype=float)
    return [o + np.array(off) for off in PIECE_OFFSETS]


def make_piece_templates(cell) -> list[Template]:
    """Reference rasters: each piece rendered alone at yaw 0 below the camera center."""
    k = cell.camera.intrinsics
    pose = cell.camera.pose
    ray = pose.rotation @ np.array([(k.width / 2 - k.cx) / k.fx, (k.height / 2 - k.cy) / k.fy, 1.0])
    s = (cell.table.surface_z - pose.translation[2]) / ray[2]
    x, y = pose.translation[0] + s * ray[0], pose.translation[1] + s * ray[1]
    templates = []
    for i in range(N_PIECES):
        frame = render(Scene([make_piece(i, x, y, 0.0, cell.table.surface_z)]), cell)
        mask = frame.labels == i
        vs, us = np.nonzero(mask)
        sl = (slice(vs.min(), vs.max() + 1), slice(us.min(), us.max() + 1))
        templates.append(Template(frame.color[sl].copy(), mask[sl].copy()))
    return templates


def template_bank(cell) -> TemplateBank:
    key = (cell.camera.intrinsics, cell.camera.pose.rotation.tobytes(), cell.camera.pose.translation.tobytes(),
           cell.table.surface_z)
    if key not in _BANKS:
        _BANKS[key] = TemplateBank(make_piece_templates(cell))
    return _BANKS[key]


def build_scene(params, rng, surface_z=0.0) -> Scene:
    region = region_from_params("scatter", params["scatter_region"])
    origin = params["assembly_origin"]
    assembly = Region.centered("assembly", origin[0], origin[1], 2 * PIECE_SIDE, 2 * PIECE_SIDE)
    scene = Scene([], {"scatter": region, "assembly": assembly})
    scatter(scene, [make_piece(i) for i in range(N_PIECES)], region, rng, margin=0.01, surface_z=surface_z)
    return scene


def _truth_for(mask, frame):
    ids = frame.labels[mask]
    ids = ids[ids >= 0]
    if ids.size == 0:
        return None
    vals, counts = np.unique(ids, return_counts=True)
    return int(vals[np.argmax(counts)])


def run_jigsaw(protocol: TaskProtocol, cell=None, repetition: int = 0) -> TaskResult:
    """Detect, pick and place one piece per sub-task, correcting its rotation.

    Pieces are picked by suction at the mask centroid. The gripper turns by
    minus the estimated rotation so the piece lands at yaw 0 in the slot
    belonging to its recognized label.
    """
    ctx = RunContext.create(protocol, cell, repetition)
    cell, params = ctx.cell, ctx.params
    if cell.gripper.kind != "suction":
        raise ConfigError("gripper.kind: jigsaw requires a suction gripper")
    scene = build_scene(params, ctx.rng_scene, cell.table.surface_z)
    assembly = scene.regions["assembly"]
    slots = slot_centers(params["assembly_origin"])
    bank = template_bank(cell)
    latency = ctx.latencies()
    closing = cell.gripper.closing_time
    lift = np.array([0.0, 0.0, 0.10])
    records = []
    skipped_truths = set()

    for _ in range(N_PIECES + 1):
        frame, refs = ctx.observe(scene)
        seg = segment_contour(frame, TABLE_COLOR)
        keep = [i for i, c in enumerate(seg.centroids)
                if not assembly.contains(*ctx.pixel_to_base(c, frame)[:2], margin=-0.02)]
        if not keep:
            break
        seg = seg.subset(keep)
        rec = recognize_template(seg, frame, None, bank=bank)
        truths = [_truth_for(m, frame) for m in seg.masks]
        for i, lab in enumerate(rec.labels):
            if lab is None and truths[i] not in skipped_truths:
                skipped_truths.add(truths[i])
                records.append(SubTaskRecord(repetition, len(records), "pick_place", "skipped", False,
                                             stages=dict(protocol.stages), frame_refs=refs,
                                             data={"n_objects": N_PIECES, "truth_id": truths[i],
                                                   "confidence": rec.confidences[i]}))
        known = [i for i, lab in enumerate(rec.labels) if lab is not None]
        if not known:
            break
        pick = max(known, key=lambda i: (rec.confidences[i], -i))
        label = rec.labels[pick]
        truth_id = truths[pick]
        truth_obj = scene.get(truth_id) if truth_id is not None else None
        det = {"label": label, "confidence": rec.confidences[pick],
               "iou": iou(seg.masks[pick], frame.labels == truth_id) if truth_id is not None else 0.0,
               "truth_label": truth_obj.label if truth_obj else None, "truth_id": truth_id}

        point = ctx.pixel_to_base(seg.centroids[pick], frame)
        point[2] = ctx.grasp_height()
        waypoints = [cell.home, point + lift]
        attempts = failures = 0
        held = None
        for _ in range(1 + int(params["max_retries"])):
            attempts += 1
            waypoints += [point, point + lift]
            outcome = execute_grasp(scene, cell, Grasp(tuple(point), 0.0), ctx.rng_grasp)
            if outcome.success:
                held = outcome.held
                break
            failures += 1
        est_yaw = image_to_base_rotation(rec.rotations[pick], ctx.hand_eye)
        data = {"n_objects": N_PIECES, "detection": det, "estimated_yaw": est_yaw, "grasp_point": pylist(point)}
        if held is None:
            waypoints.append(cell.home)
            t = move_time(waypoints, cell)
            ctx.clock += t + attempts * closing
            records.append(SubTaskRecord(repetition, len(records), "pick", "grasp_failed", False, attempts,
                                         failures, None, t, path_length(waypoints),
                                         {"motion": t, "gripper_close": attempts * closing},
                                         dict(protocol.stages), refs, data))
            continue

        turn = angle_diff(-est_yaw, 0.0)
        slot = slots[label]
        center, yaw = transported_pose(held, point[:2], slot, turn)
        place_point = np.array([slot[0], slot[1], ctx.grasp_height()])
        t_pick = move_time(waypoints, cell)
        waypoints += [place_point + lift, place_point, place_point + lift, cell.home]
        place(scene, held, center, yaw, cell)
        placed = scene.get(held.id)
        t_sub = move_time(waypoints, cell)
        ctx.clock += t_sub + attempts * closing + sum(latency.values())
        durations = dict(latency)
        durations.update({"pick_motion": t_pick, "place_motion": t_sub - t_pick,
                          "gripper_close": attempts * closing})
        data.update({"slot": label, "initial_yaw": held.yaw, "final_yaw": placed.yaw,
                     "orientation_error": angle_diff(placed.yaw, 0.0),
                     "placed_polygon": polygon_list(placed.footprint())})
        records.append(SubTaskRecord(repetition, len(records), "pick_place", "success", True, attempts, failures,
                                     t_sub, t_pick, path_length(waypoints), durations, dict(protocol.stages),
                                     refs, data))

    placed = [r for r in records if r.success]
    outcome = {"placed": len(placed), "complete": len(placed) == N_PIECES and not skipped_truths,
               "calibration_rms": ctx.calibration_rms}
    return TaskResult(records, outcome, ctx.frames, cell)
