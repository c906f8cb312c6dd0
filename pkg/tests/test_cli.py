import json

import pytest

from deepclaw.cli import EXIT_CONFIG, EXIT_OK, EXIT_VIOLATIONS, main
from deepclaw.monitor import read_run, summarize
from deepclaw.simcell import load_cell_dict

from .test_monitor import assert_nested_close


def run_dirs(root):
    return sorted(p for p in root.iterdir() if p.is_dir())


def cli_run(tmp_path, *extra):
    code = main(["run", "--out", str(tmp_path), *extra])
    return code, run_dirs(tmp_path)


def test_run_writes_directory(tmp_path, capsys):
    code, dirs = cli_run(tmp_path, "--task", "clawmachine", "--repeat", "2")
    assert code == EXIT_OK and len(dirs) == 1
    out = capsys.readouterr().out
    assert str(dirs[0]) in out and "2/2 repetitions complete" in out
    name = dirs[0].name
    assert name.startswith("clawmachine-ur5-rg6-s0-") and name.count("-") == 5
    cfg = json.loads((dirs[0] / "config.json").read_text())
    assert cfg["protocol"]["repeat"] == 2
    assert cfg["cell"]["name"] == "ur5-rg6"


def test_flags_override_task_file(tmp_path):
    code, dirs = cli_run(tmp_path, "--task", "tictactoe", "--repeat", "1", "--seed", "3", "--depth", "9",
                         "--cell", "franka", "--frames", "none")
    assert code == EXIT_OK
    rec = read_run(dirs[0])
    p = rec.config["protocol"]
    assert (p["seed"], p["depth"], p["cell"], p["record"]["frames"]) == (3, 9, "franka", "none")
    assert rec.cell == "franka"
    assert list((dirs[0] / "frames").iterdir()) == []


def test_env_var_sets_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("DEEPCLAW_OUT", str(tmp_path / "env"))
    assert main(["run", "--task", "clawmachine", "--repeat", "1"]) == EXIT_OK
    assert len(run_dirs(tmp_path / "env")) == 1


def test_swapping_cell_keeps_pipeline_stages(tmp_path):
    stages = []
    for cell in ("franka", "ur10e-hande"):
        out = tmp_path / cell
        main(["run", "--task", "tictactoe", "--repeat", "1", "--cell", cell, "--out", str(out)])
        rec = read_run(run_dirs(out)[0])
        stages.append({json.dumps(r.stages, sort_keys=True) for r in rec.subtasks})
    assert stages[0] == stages[1] and len(stages[0]) == 1


def test_identical_invocations_match(tmp_path):
    for sub in ("a", "b"):
        main(["run", "--task", "jigsaw", "--repeat", "2", "--out", str(tmp_path / sub)])
    a, b = run_dirs(tmp_path / "a")[0], run_dirs(tmp_path / "b")[0]
    assert (a / "subtasks.jsonl").read_bytes() == (b / "subtasks.jsonl").read_bytes()
    sa, sb = (json.loads((d / "summary.json").read_text()) for d in (a, b))
    for s in (sa, sb):
        del s["run_id"], s["timestamp"]
    assert sa == sb


def test_missing_cell_file(tmp_path, capsys):
    code, dirs = cli_run(tmp_path, "--task", "tictactoe", "--cell", str(tmp_path / "nope" / "cell.json"))
    assert code == EXIT_CONFIG
    assert dirs == [] and not any(tmp_path.iterdir())
    assert "config error" in capsys.readouterr().err


def test_invalid_task_names_field(tmp_path, capsys):
    task = tmp_path / "t.json"
    task.write_text(json.dumps({"task": "tictactoe", "cell": "ur5-rg6", "repeat": 0}))
    code, _ = cli_run(tmp_path, "--task", str(task))
    assert code == EXIT_CONFIG
    assert "repeat" in capsys.readouterr().err


def test_jigsaw_with_parallel_gripper_is_config_error(tmp_path, capsys):
    task = tmp_path / "jig.json"
    task.write_text(json.dumps({"task": "jigsaw", "cell": "ur5-rg6"}))
    assert main(["run", "--task", str(task), "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert not (tmp_path / "out").exists()
    assert "suction" in capsys.readouterr().err


def test_report_single_run(tmp_path, capsys):
    cli_run(tmp_path, "--task", "clawmachine", "--repeat", "3")
    capsys.readouterr()
    csv_path = tmp_path / "report.csv"
    assert main(["report", str(run_dirs(tmp_path)[0]), "--csv", str(csv_path)]) == EXIT_OK
    table = capsys.readouterr().out.splitlines()
    assert len(table) == 3 and table[0].startswith("task")
    lines = csv_path.read_text().splitlines()
    assert len(lines) == 2
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    rec = read_run(run_dirs(tmp_path)[0])
    fresh = summarize("clawmachine", rec.subtasks)["aggregate"]
    assert abs(float(row["r_success_mean"]) - fresh["r_success_mean"]) <= 1e-9
    assert abs(float(row["time_mean_s"]) - fresh["t_pick_mean"]) <= 1e-9
    assert row["time_metric"] == "t_pick"


def test_report_groups_cells(tmp_path, capsys):
    for cell in ("franka", "ur5-rg6", "ur10e-hande"):
        cli_run(tmp_path, "--task", "clawmachine", "--repeat", "1", "--cell", cell)
    capsys.readouterr()
    assert main(["report", *map(str, run_dirs(tmp_path))]) == EXIT_OK
    rows = capsys.readouterr().out.splitlines()[2:]
    assert sorted(r.split()[1] for r in rows) == ["franka", "ur10e-hande", "ur5-rg6"]


def test_report_equals_recompute(tmp_path):
    from deepclaw.cli import report_rows

    cli_run(tmp_path, "--task", "jigsaw", "--repeat", "2")
    rec = read_run(run_dirs(tmp_path)[0])
    row = report_rows([rec])[0]
    agg = rec.summary["aggregate"]
    assert_nested_close([row["score_mean"], row["iou_mean"], row["ap_mean"], row["time_mean_s"]],
                        [agg["score_mean"], agg["iou_mean_mean"], agg["ap_mean"], agg["t_sub_mean"]])


def test_report_skips_corrupt_dirs(tmp_path, capsys):
    cli_run(tmp_path, "--task", "clawmachine", "--repeat", "1")
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "summary.json").write_text("{")
    good = run_dirs(tmp_path)[0] if run_dirs(tmp_path)[0] != bad else run_dirs(tmp_path)[1]
    assert main(["report", str(good), str(bad)]) == EXIT_OK
    assert "skipped" in capsys.readouterr().err
    assert main(["report", str(bad)]) == EXIT_VIOLATIONS


def test_validate_shipped_presets(tmp_path, capsys):
    for name in ("franka", "ur5-rg6", "ur10e-hande"):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(load_cell_dict(name)))
        assert main(["validate-config", str(path)]) == EXIT_OK
    assert capsys.readouterr().out.count(": ok") == 3


def test_validate_negative_closing_time(tmp_path, capsys):
    d = load_cell_dict("ur5-rg6")
    d["gripper"]["closing_time"] = -0.1
    path = tmp_path / "cell.json"
    path.write_text(json.dumps(d))
    assert main(["validate-config", str(path)]) == EXIT_VIOLATIONS
    assert "gripper.closing_time" in capsys.readouterr().out


def test_validate_jigsaw_parallel_gripper(tmp_path, capsys):
    path = tmp_path / "task.json"
    path.write_text(json.dumps({"task": "jigsaw", "cell": "ur10e-hande"}))
    assert main(["validate-config", str(path)]) == EXIT_VIOLATIONS
    assert "suction" in capsys.readouterr().out


def test_validate_missing_file(tmp_path):
    assert main(["validate-config", str(tmp_path / "none.json")]) == EXIT_CONFIG


def test_list_cells(capsys):
    assert main(["list-cells"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in ("franka", "ur5-rg6", "ur10e-hande"):
        assert name in out


def test_calibrate_writes_json(tmp_path, capsys):
    out = tmp_path / "cal.json"
    assert main(["calibrate", "--cell", "franka", "--poses", "5", "--out", str(out)]) == EXIT_OK
    d = json.loads(out.read_text())
    assert d["rms_residual"] < 1e-9
    assert "rms residual" in capsys.readouterr().out


def test_bad_parallel_value(tmp_path):
    assert main(["run", "--task", "clawmachine", "--parallel", "0", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_unknown_subcommand_exits():
    with pytest.raises(SystemExit):
        main(["fly"])
