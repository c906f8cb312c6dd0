"""Command-line entry point: ``deepclaw run | calibrate | report | list-cells | validate-config``.

Exit codes: 0 success (recorded grasp failures included), 1 violations or
nothing to report, 2 configuration or input error, 3 consistency abort.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from .calibration import calibrate, verify_calibration
from .errors import ConfigError, DeepClawError
from .monitor.io import read_run
from .monitor.records import SubTaskRecord, summarize
from .simcell.config import PRESETS, load_cell, load_cell_dict, validate_cell_dict
from .tasks.protocol import TASKS, load_task, shipped_task_path, validate_task_dict
from .tasks.runner import run_protocol

EXIT_OK, EXIT_VIOLATIONS, EXIT_CONFIG, EXIT_CONSISTENCY = 0, 1, 2, 3


def _err(msg: str) -> None:
    print(f"deepclaw: {msg}", file=sys.stderr)


def _task_path(ref: str) -> Path:
    path = Path(ref)
    if not path.is_file() and ref in TASKS:
        return Path(str(shipped_task_path(ref)))
    return path


def _config_failure(exc) -> int:
    if isinstance(exc, ConfigError):
        for v in exc.violations:
            _err(f"config error: {v}")
    else:
        _err(f"config error: {exc}")
    return EXIT_CONFIG


# --- run ---------------------------------------------------------------------


def cmd_run(args) -> int:
    try:
        protocol = load_task(_task_path(args.task))
        if args.cell is not None:
            protocol.cell = args.cell
            protocol.base_dir = None
        if args.repeat is not None:
            protocol.repeat = args.repeat
        if args.seed is not None:
            protocol.seed = args.seed
        if args.depth is not None:
            protocol.depth = args.depth
        if args.frames is not None:
            protocol.record = {**protocol.record, "frames": args.frames}
        violations = validate_task_dict(protocol.to_dict())
        if violations:
            raise ConfigError(violations)
        out = args.out or os.environ.get("DEEPCLAW_OUT") or "runs"
        record, path = run_protocol(protocol, parallel=args.parallel, out_dir=out)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        return _config_failure(exc)
    agg = record.summary["aggregate"]
    print(path)
    print(f"{record.task} on {record.cell}: {agg['completed']}/{agg['repetitions']} repetitions complete")
    aborted = [o for o in record.summary["outcomes"] if o.get("aborted") == "consistency_error"]
    if aborted:
        _err(f"{len(aborted)} repetition(s) aborted on a consistency error")
        return EXIT_CONSISTENCY
    return EXIT_OK


# --- calibrate -----------------------------------------------------------------


def cmd_calibrate(args) -> int:
    try:
        cell = load_cell(args.cell)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        return _config_failure(exc)
    try:
        result = calibrate(cell, args.poses, seed=args.seed, noise_sigma=args.noise_mm / 1000.0)
    except DeepClawError as exc:
        _err(f"calibration failed: {exc}")
        return EXIT_CONFIG
    report = verify_calibration(cell, result, seed=args.seed)
    text = json.dumps(result.to_json_dict(), indent=2) + "\n"
    Path(args.out).write_text(text)
    print(f"wrote {args.out}: rms residual {result.rms_residual * 1000:.3f} mm, "
          f"probe error max {report.max_error * 1000:.3f} mm mean {report.mean_error * 1000:.3f} mm")
    return EXIT_OK


# --- report ------------------------------------------------------------------

REPORT_COLUMNS = ("task", "cell", "runs", "repetitions", "completed", "time_metric", "time_mean_s", "time_std_s",
                  "r_success_mean", "r_success_std", "score_mean", "score_std", "iou_mean", "ap_mean",
                  "path_length_mean_m")


def _pooled(records_by_run) -> list:
    """Sub-tasks of several runs with repetitions renumbered so they stay distinct."""
    pooled, offset = [], 0
    for subtasks in records_by_run:
        reps = sorted({r.repetition for r in subtasks})
        remap = {rep: offset + i for i, rep in enumerate(reps)}
        for r in subtasks:
            pooled.append(SubTaskRecord.from_dict({**r.to_dict(), "repetition": remap[r.repetition]}))
        offset += len(reps)
    return pooled


def report_rows(runs) -> list[dict]:
    """One row per (task, cell), recomputed from the raw sub-task records."""
    groups: dict = {}
    for rec in runs:
        groups.setdefault((rec.task, rec.cell), []).append(rec)
    rows = []
    for (task, cell), recs in sorted(groups.items()):
        agg = summarize(task, _pooled([r.subtasks for r in recs]))["aggregate"]
        key = "t_pick" if task == "clawmachine" else "t_sub"
        rows.append({
            "task": task, "cell": cell, "runs": len(recs), "repetitions": agg["repetitions"],
            "completed": agg["completed"], "time_metric": key,
            "time_mean_s": agg.get(f"{key}_mean"), "time_std_s": agg.get(f"{key}_std"),
            "r_success_mean": agg.get("r_success_mean"), "r_success_std": agg.get("r_success_std"),
            "score_mean": agg.get("score_mean"), "score_std": agg.get("score_std"),
            "iou_mean": agg.get("iou_mean_mean"), "ap_mean": agg.get("ap_mean"),
            "path_length_mean_m": agg.get("path_length_mean"),
        })
    return rows


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def format_table(rows) -> str:
    cells = [list(REPORT_COLUMNS)] + [[_fmt(r[c]) for c in REPORT_COLUMNS] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(REPORT_COLUMNS))]
    lines = ["  ".join(s.ljust(w) for s, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def format_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows([{k: ("" if v is None else v) for k, v in r.items()} for r in rows])
    return buf.getvalue()


def cmd_report(args) -> int:
    runs = []
    for d in args.run_dirs:
        try:
            runs.append(read_run(d))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            _err(f"skipped {d}: {type(exc).__name__}: {exc}")
    if not runs:
        _err("no readable run directories")
        return EXIT_VIOLATIONS
    rows = report_rows(runs)
    print(format_table(rows))
    if args.csv:
        Path(args.csv).write_text(format_csv(rows))
    return EXIT_OK


# --- list-cells / validate-config ---------------------------------------------


def cmd_list_cells(args) -> int:
    for name in PRESETS:
        d = load_cell_dict(name)
        g = d["gripper"]
        opening = "" if g.get("max_opening") is None else f", opening {g['max_opening'] * 1000:.0f} mm"
        print(f"{name:<12} arm {d['arm'].get('model', '')} ({d['arm']['joint_speed_limit']} m/s), "
              f"{g['kind']} gripper {g.get('model', '')}{opening}")
    return EXIT_OK


def cmd_validate_config(args) -> int:
    path = Path(args.path)
    try:
        d = json.loads(path.read_text())
    except FileNotFoundError:
        _err(f"file not found: {path}")
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"{path}: invalid JSON: {exc}")
        return EXIT_VIOLATIONS
    if isinstance(d, dict) and "task" in d:
        cell_dict = None
        ref = d.get("cell")
        if isinstance(ref, str) and ref:
            local = path.parent / ref
            try:
                cell_dict = load_cell_dict(local if local.is_file() else ref)
            except (FileNotFoundError, json.JSONDecodeError) as exc:
                violations = validate_task_dict(d) + [f"cell: cannot load {ref!r} ({exc})"]
            else:
                violations = validate_task_dict(d, cell_dict)
        else:
            violations = validate_task_dict(d)
    else:
        violations = validate_cell_dict(d)
    if violations:
        for v in violations:
            print(f"{path}: {v}")
        return EXIT_VIOLATIONS
    print(f"{path}: ok")
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deepclaw", description="Simulated robot-cell benchmark.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a task protocol and write a run directory")
    r.add_argument("--task", required=True, help="task JSON, or a shipped task name (tictactoe, clawmachine, jigsaw)")
    r.add_argument("--cell", help="cell JSON or preset name; overrides the task's cell")
    r.add_argument("--repeat", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--depth", type=int, help="minimax depth (tictactoe)")
    r.add_argument("--frames", choices=("all", "first", "none"), help="which raw frames to keep")
    r.add_argument("--parallel", type=int, default=1, help="repetitions run concurrently")
    r.add_argument("--out", help="output root (default $DEEPCLAW_OUT or ./runs)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("calibrate", help="hand-eye calibration on a simulated cell")
    c.add_argument("--cell", required=True)
    c.add_argument("--poses", type=int, default=10)
    c.add_argument("--noise-mm", type=float, default=0.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default="calibration.json")
    c.set_defaults(func=cmd_calibrate)

    rep = sub.add_parser("report", help="compare run directories")
    rep.add_argument("run_dirs", nargs="+")
    rep.add_argument("--csv", help="also write the table as CSV")
    rep.set_defaults(func=cmd_report)

    lc = sub.add_parser("list-cells", help="list shipped cell presets")
    lc.set_defaults(func=cmd_list_cells)

    vc = sub.add_parser("validate-config", help="check a cell or task JSON file")
    vc.add_argument("path")
    vc.set_defaults(func=cmd_validate_config)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "parallel", 1) is not None and getattr(args, "parallel", 1) < 1:
        _err("--parallel must be >= 1")
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
