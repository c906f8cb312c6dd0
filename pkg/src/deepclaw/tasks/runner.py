"""Run a task protocol over its repetitions and persist the result."""
from __future__ import annotations

import datetime as _dt
import uuid
from concurrent.futures import ProcessPoolExecutor

from ..errors import ConfigError
from ..monitor.io import write_run
from ..monitor.records import RunRecord, summarize
from ..simcell.config import CellConfig, load_cell_dict
from .clawmachine import run_clawmachine
from .jigsaw import run_jigsaw
from .protocol import TaskProtocol, validate_task_dict
from .tictactoe import run_tictactoe

RUNNERS = {"tictactoe": run_tictactoe, "clawmachine": run_clawmachine, "jigsaw": run_jigsaw}


def run_repetition(protocol: TaskProtocol, cell: CellConfig, repetition: int):
    """One repetition in isolation; its seed is ``protocol.seed + repetition``."""
    return RUNNERS[protocol.task](protocol, cell, repetition)


def _job(args):
    return run_repetition(*args)


def make_run_id(protocol: TaskProtocol, cell: CellConfig, now: _dt.datetime) -> str:
    stamp = now.strftime("%Y%m%dT%H%M%SZ")
    return f"{protocol.task}-{cell.name}-s{protocol.seed}-{stamp}-{uuid.uuid4().hex[:6]}"


def run_protocol(protocol: TaskProtocol, parallel: int = 1, out_dir=None, record_frames: bool = True):
    """Execute every repetition and build a RunRecord.

    The effective cell (preset plus ``cell_overrides``) and the protocol are
    snapshotted into the record. When ``out_dir`` is given the run directory
    is written and its path returned alongside the record.
    """
    base = load_cell_dict(protocol.cell_ref())
    violations = validate_task_dict(protocol.to_dict(), base)
    if violations:
        raise ConfigError(violations)
    cell_dict = protocol.effective_cell_dict()
    cell = CellConfig.from_dict(cell_dict)
    jobs = [(protocol, cell, rep) for rep in range(protocol.repeat)]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]

    subtasks, frames = [], {}
    for res in results:
        subtasks += res.records
        frames.update(res.frames)
    now = _dt.datetime.now(_dt.timezone.utc)
    timestamp = now.isoformat(timespec="seconds")
    summary = summarize(protocol.task, subtasks)
    summary["outcomes"] = [res.outcome for res in results]
    record = RunRecord(
        run_id=make_run_id(protocol, cell, now), timestamp=timestamp, task=protocol.task,
        cell=cell.name, config={"cell": cell_dict, "protocol": protocol.to_dict()},
        subtasks=subtasks, summary=summary,
    )
    path = None
    if out_dir is not None:
        path = write_run(record, out_dir, frames if record_frames else None)
    return record, path
