"""The three benchmark tasks and the protocol runner."""
from .clawmachine import run_clawmachine
from .jigsaw import run_jigsaw
from .protocol import REASONING, TASKS, TaskProtocol, load_task, shipped_task_path, validate_task_dict
from .runner import RUNNERS, run_protocol, run_repetition
from .tictactoe import minimax, open_lines_heuristic, run_tictactoe, self_play

__all__ = [
    "REASONING", "RUNNERS", "TASKS", "TaskProtocol", "load_task", "minimax", "open_lines_heuristic",
    "run_clawmachine", "run_jigsaw", "run_protocol", "run_repetition", "run_tictactoe", "self_play",
    "shipped_task_path", "validate_task_dict",
]
