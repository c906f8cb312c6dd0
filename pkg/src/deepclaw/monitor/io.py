"""Run directory persistence and raw frame formats (PPM color, PFM depth)."""
from __future__ import annotations

import csv
import io
import json
import shutil
from pathlib import Path

import numpy as np

from .records import RunRecord, SubTaskRecord

CSV_COLUMNS = ("run_id", "task", "cell", "repetition", "subtask_index", "stage", "duration_s",
               "outcome", "metric_name", "metric_value")


def write_ppm(path, color: np.ndarray) -> None:
    color = np.ascontiguousarray(color, dtype=np.uint8)
    h, w = color.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(color.tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError(f"{path}: not a binary PPM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError(f"{path}: unsupported max value {maxval}")
    raw = data[len(data) - w * h * 3:]
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3).copy()


def write_pfm(path, depth: np.ndarray) -> None:
    """Grayscale PFM, little-endian, rows stored bottom to top."""
    depth = np.asarray(depth, dtype="<f4")
    h, w = depth.shape
    with open(path, "wb") as f:
        f.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        f.write(np.flipud(depth).tobytes())


def read_pfm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"Pf":
        raise ValueError(f"{path}: not a grayscale PFM")
    w, h, scale = int(parts[1]), int(parts[2]), float(parts[3])
    dtype = "<f4" if scale < 0 else ">f4"
    raw = data[len(data) - w * h * 4:]
    return np.flipud(np.frombuffer(raw, dtype=dtype).reshape(h, w)).astype(np.float32)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False)


def summary_rows(record: RunRecord) -> list[dict]:
    """One CSV row per repetition carrying that repetition's headline metric."""
    rows = []
    for rep in record.summary["per_repetition"]:
        outcome = "complete" if rep["complete"] else "incomplete"
        if rep.get("result"):
            outcome += f":{rep['result']}"
        name = rep["headline"]
        rows.append({
            "run_id": record.run_id, "task": record.task, "cell": record.cell,
            "repetition": rep["repetition"], "subtask_index": "all", "stage": "all",
            "duration_s": rep["motion_time_s"], "outcome": outcome,
            "metric_name": name, "metric_value": "" if rep.get(name) is None else rep[name],
        })
    return rows


def write_run(record: RunRecord, out_dir, frames: dict | None = None) -> Path:
    """Persist a run under ``out_dir/<run_id>``.

    Everything is written to a hidden staging directory first and renamed
    into place at the end; on failure the staging directory is removed.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    final = out_dir / record.run_id
    if final.exists():
        raise FileExistsError(f"run directory already exists: {final}")
    staging = out_dir / f".{record.run_id}.partial"
    try:
        staging.mkdir()
        (staging / "config.json").write_text(json.dumps(record.config, indent=2, sort_keys=True) + "\n")
        with open(staging / "subtasks.jsonl", "w") as f:
            for r in record.subtasks:
                f.write(_dumps(r.to_dict()) + "\n")
        head = {"run_id": record.run_id, "timestamp": record.timestamp, "task": record.task, "cell": record.cell}
        (staging / "summary.json").write_text(json.dumps({**head, **record.summary}, indent=2, sort_keys=True) + "\n")
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(summary_rows(record))
        (staging / "summary.csv").write_text(buf.getvalue())
        (staging / "frames").mkdir()
        for ref, frame in (frames or {}).items():
            write_ppm(staging / "frames" / f"{ref}_color.ppm", frame.color)
            write_pfm(staging / "frames" / f"{ref}_depth.pfm", frame.depth)
        staging.rename(final)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    return final


def read_run(path) -> RunRecord:
    path = Path(path)
    config = json.loads((path / "config.json").read_text())
    subtasks = [SubTaskRecord.from_dict(json.loads(line))
                for line in (path / "subtasks.jsonl").read_text().splitlines() if line.strip()]
    summary = json.loads((path / "summary.json").read_text())
    head = {k: summary.pop(k) for k in ("run_id", "timestamp", "cell")}
    return RunRecord(config=config, subtasks=subtasks, summary=summary, task=summary["task"], **head)
