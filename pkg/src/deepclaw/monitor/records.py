"""Sub-task and run records, plus summary statistics derived from them."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .metrics import Detection, average_precision, jigsaw_score

HEADLINE = {"tictactoe": "t_sub_mean", "clawmachine": "r_success", "jigsaw": "score"}


@dataclass
class SubTaskRecord:
    """One pick(-and-place) cycle.

    ``t_sub`` and ``t_pick`` are arm motion times only; gripper closing time
    appears in ``stage_durations`` but never in them.
    """

    repetition: int
    index: int
    kind: str
    outcome: str
    success: bool = False
    attempts: int = 0
    failures: int = 0
    t_sub: float | None = None
    t_pick: float | None = None
    path_length: float = 0.0
    stage_durations: dict = field(default_factory=dict)
    stages: dict = field(default_factory=dict)
    frame_refs: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "SubTaskRecord":
        return cls(**d)


@dataclass
class RunRecord:
    run_id: str
    timestamp: str
    task: str
    cell: str
    config: dict
    subtasks: list
    summary: dict


def _mean_std(values):
    if not values:
        return None, None
    a = np.asarray(values, dtype=float)
    return float(a.mean()), float(a.std())


def summarize_repetition(task: str, records: list) -> dict:
    """Per-repetition metrics computed from its sub-task records alone."""
    attempts = sum(r.attempts for r in records)
    successes = sum(1 for r in records if r.success)
    motion = sum((r.t_sub if r.t_sub is not None else r.t_pick or 0.0) for r in records)
    out = {
        "repetition": records[0].repetition,
        "n_subtasks": len(records),
        "attempts": attempts,
        "successes": successes,
        "motion_time_s": motion,
        "path_length_m": sum(r.path_length for r in records),
    }
    aborted = any(r.kind == "abort" for r in records)
    if task == "tictactoe":
        result = records[-1].data.get("result")
        out["result"] = result
        out["complete"] = (not aborted) and result in ("P1", "P2", "tie")
        t = [r.t_sub for r in records if r.t_sub is not None and r.success]
        out["t_sub_mean"], out["t_sub_std"] = _mean_std(t)
        out["failures"] = sum(r.failures for r in records)
    elif task == "clawmachine":
        n = records[0].data.get("n_objects", 0)
        out["complete"] = successes == n
        out["r_success"] = successes / attempts if attempts else 0.0
        t = [r.t_pick for r in records if r.t_pick is not None]
        out["t_pick_mean"], out["t_pick_std"] = _mean_std(t)
    elif task == "jigsaw":
        polys = [r.data["placed_polygon"] for r in records if r.success and "placed_polygon" in r.data]
        dets = [Detection(**r.data["detection"]) for r in records if "detection" in r.data]
        n_truth = records[0].data.get("n_objects", 0)
        skipped = sum(1 for r in records if r.outcome == "skipped")
        out["placed"] = len(polys)
        out["skipped"] = skipped
        out["complete"] = (not aborted) and len(polys) == n_truth
        out["score"] = jigsaw_score(polys) if polys else None
        ious = [d.iou for d in dets if d.label == d.truth_label]
        out["iou_mean"] = float(np.mean(ious)) if ious else None
        out["ap"] = average_precision(dets, n_truth)
        out["pick_success_rate"] = successes / attempts if attempts else 0.0
        t = [r.t_sub for r in records if r.t_sub is not None and r.success]
        out["t_sub_mean"], out["t_sub_std"] = _mean_std(t)
    else:
        raise ValueError(f"unknown task {task!r}")
    out["headline"] = HEADLINE[task]
    return out


def summarize(task: str, subtasks: list) -> dict:
    by_rep: dict[int, list] = {}
    for r in subtasks:
        by_rep.setdefault(r.repetition, []).append(r)
    reps = [summarize_repetition(task, by_rep[k]) for k in sorted(by_rep)]
    agg = {
        "repetitions": len(reps),
        "completed": sum(1 for r in reps if r["complete"]),
    }
    key = "t_pick" if task == "clawmachine" else "t_sub"
    pooled = [getattr(r, key) for r in subtasks if getattr(r, key) is not None
              and (key == "t_pick" or r.success)]
    agg[f"{key}_mean"], agg[f"{key}_std"] = _mean_std(pooled)
    paths = [r.path_length for r in subtasks if r.path_length > 0]
    agg["path_length_mean"], _ = _mean_std(paths)
    for name in ("r_success", "score", "iou_mean", "ap", "pick_success_rate"):
        vals = [r[name] for r in reps if r.get(name) is not None]
        if vals:
            agg[f"{name}_mean"], agg[f"{name}_std"] = _mean_std(vals)
    if task == "tictactoe":
        results = [r["result"] for r in reps]
        agg["results"] = {k: results.count(k) for k in ("P1", "P2", "tie")}
    return {"task": task, "aggregate": agg, "per_repetition": reps}
