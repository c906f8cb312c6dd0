"""
One task pipeline, three robot cells
====================================

Runs the three shipped task protocols on every preset cell and prints the
comparison table built from the raw sub-task records.
"""
import sys
import tempfile

from deepclaw.cli import format_table, report_rows
from deepclaw.monitor import read_run
from deepclaw.simcell.config import PRESETS
from deepclaw.tasks import TaskProtocol, load_task, run_protocol, shipped_task_path

repeat = int(sys.argv[1]) if len(sys.argv) > 1 else 5
root = tempfile.mkdtemp(prefix="deepclaw-demo-")
runs = []
for task in ("tictactoe", "clawmachine", "jigsaw"):
    d = load_task(shipped_task_path(task)).to_dict()
    for cell in PRESETS:
        d.update(cell=cell, repeat=repeat)
        _, path = run_protocol(TaskProtocol.from_dict(d), out_dir=root)
        runs.append(read_run(path))
        print("finished", path.name)

print()
print(format_table(report_rows(runs)))
print("\nrun directories under", root)
