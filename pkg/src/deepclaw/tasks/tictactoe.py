"""Tic-Tac-Toe: minimax game play executed as robot pick-and-place."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..errors import ConsistencyError, NoMoveError
from ..geometry import RigidTransform, image_to_base_angle, min_area_rect
from ..monitor.metrics import path_length
from ..monitor.records import SubTaskRecord
from ..pipeline import recognize_color, segment_contour
from ..simcell import Grasp, Region, Scene, SceneObject, TABLE_COLOR, execute_grasp, move_time, place, transported_pose
from .common import RunContext, TaskResult
from .protocol import TaskProtocol

EMPTY, P1, P2 = 0, 1, 2
LINES = ((0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8), (0, 4, 8), (2, 4, 6))
PIECE_COLORS = {P1: (40, 160, 60), P2: (40, 80, 200)}  # green, blue
PLAYER_NAMES = {P1: "P1", P2: "P2"}


def opponent(player: int) -> int:
    return P2 if player == P1 else P1


def winner(board) -> int:
    for a, b, c in LINES:
        if board[a] != EMPTY and board[a] == board[b] == board[c]:
            return board[a]
    return EMPTY


def is_terminal(board) -> bool:
    return winner(board) != EMPTY or EMPTY not in board


def check_board(board) -> tuple:
    board = tuple(int(x) for x in board)
    if len(board) != 9 or any(x not in (EMPTY, P1, P2) for x in board):
        raise ValueError("board must be 9 cells of 0 (empty), 1 or 2")
    if abs(board.count(P1) - board.count(P2)) > 1:
        raise ValueError("piece counts differ by more than one")
    return board


def swap(board) -> tuple:
    return tuple({P1: P2, P2: P1}.get(x, x) for x in board)


def open_lines(board, player: int) -> int:
    """Lines that contain no opponent piece."""
    opp = opponent(player)
    return sum(1 for line in LINES if all(board[i] != opp for i in line))


def open_lines_heuristic(board, player: int) -> float:
    return (open_lines(board, player) - open_lines(board, opponent(player))) / 8


@lru_cache(maxsize=None)
def _value(board, to_move, depth, root, heuristic):
    w = winner(board)
    if w == root:
        return 1.0
    if w != EMPTY:
        return -1.0
    if EMPTY not in board:
        return 0.0
    if depth == 0:
        return heuristic(board, root)
    values = []
    for i in range(9):
        if board[i] == EMPTY:
            child = board[:i] + (to_move,) + board[i + 1:]
            values.append(_value(child, opponent(to_move), depth - 1, root, heuristic))
    return max(values) if to_move == root else min(values)


def minimax(board, player: int, depth: int, heuristic=open_lines_heuristic) -> tuple[int, float]:
    """Best move for ``player`` and its value from ``player``'s point of view.

    Terminal positions score +1 / -1 / 0; at the depth cutoff the heuristic
    is used. Equal values resolve to the lowest cell index.
    """
    board = check_board(board)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if is_terminal(board):
        raise NoMoveError("game is already over")
    best_move, best_value = -1, -math.inf
    for i in range(9):
        if board[i] != EMPTY:
            continue
        child = board[:i] + (player,) + board[i + 1:]
        val = _value(child, opponent(player), depth - 1, player, heuristic)
        if val > best_value:
            best_move, best_value = i, val
    return best_move, best_value


def game_result(board) -> str | None:
    w = winner(board)
    if w != EMPTY:
        return PLAYER_NAMES[w]
    return "tie" if EMPTY not in board else None


def self_play(depth_p1: int, depth_p2: int | None = None) -> tuple[list[int], str]:
    """Play a full game between two minimax players without any robot."""
    depth_p2 = depth_p1 if depth_p2 is None else depth_p2
    board = (EMPTY,) * 9
    player = P1
    moves = []
    while not is_terminal(board):
        move, _ = minimax(board, player, depth_p1 if player == P1 else depth_p2)
        board = board[:move] + (player,) + board[move + 1:]
        moves.append(move)
        player = opponent(player)
    return moves, game_result(board)


# --- robot task --------------------------------------------------------------


class BoardLayout:
    def __init__(self, center, cell_size):
        self.center = np.asarray(center, dtype=float)
        self.cell_size = float(cell_size)
        self.region = Region.centered("board", self.center[0], self.center[1], 3 * cell_size, 3 * cell_size)

    def cell_center(self, index: int) -> np.ndarray:
        r, c = divmod(index, 3)
        return self.center + np.array([(c - 1) * self.cell_size, (1 - r) * self.cell_size])

    def locate(self, x, y) -> int | None:
        """Board cell under (x, y), or None when off the board."""
        if not self.region.contains(x, y):
            return None
        c = int(np.clip(math.floor((x - self.region.x_extent[0]) / self.cell_size), 0, 2))
        r = int(np.clip(math.floor((self.region.y_extent[1] - y) / self.cell_size), 0, 2))
        return 3 * r + c


def build_scene(params) -> tuple[Scene, BoardLayout]:
    layout = BoardLayout(params["board_center"], params["board_cell"])
    side = float(params["cube_side"])
    objects = []
    oid = 0
    for player, x in zip((P1, P2), params["piece_columns_x"]):
        for y in params["piece_rows_y"]:
            objects.append(SceneObject(oid, "cube", RigidTransform.from_xyz_yaw(x, y, 0.0), PIECE_COLORS[player],
                                       side, (side, side), label=player))
            oid += 1
    return Scene(objects, {"board": layout.region}), layout


def _perceive(ctx: RunContext, scene, layout):
    frame, refs = ctx.observe(scene)
    seg = segment_contour(frame, TABLE_COLOR)
    rec = recognize_color(seg, frame, PIECE_COLORS)
    bases = [ctx.pixel_to_base(c, frame) for c in seg.centroids]
    return frame, refs, seg, rec, bases


def _perceived_board(ctx, scene, layout):
    _, _, _, rec, bases = _perceive(ctx, scene, layout)
    board = [EMPTY] * 9
    for label, p in zip(rec.labels, bases):
        cell = layout.locate(p[0], p[1])
        if cell is None:
            continue
        if board[cell] != EMPTY:
            raise ConsistencyError(f"two pieces perceived on board cell {cell}")
        board[cell] = label
    return tuple(board)


def _grasp_angle(mask, hand_eye) -> float:
    vs, us = np.nonzero(mask)
    rect = min_area_rect(np.column_stack([us, vs]))
    return image_to_base_angle(rect.angle, hand_eye)


def run_tictactoe(protocol: TaskProtocol, cell=None, repetition: int = 0) -> TaskResult:
    """Both players use minimax at the protocol depth; the robot executes every move.

    Each sub-task picks a random off-board piece of the mover's color and
    places it on the cell chosen by minimax. A failed grasp is retried up to
    ``max_retries`` times; after that the pieces are re-perceived and a new
    random piece is chosen, at most ``max_replans`` times, before the run is
    recorded as incomplete.
    """
    ctx = RunContext.create(protocol, cell, repetition)
    cell, params = ctx.cell, ctx.params
    scene, layout = build_scene(params)
    board = (EMPTY,) * 9
    player = P1
    records = []
    latency = ctx.latencies()
    closing = cell.gripper.closing_time
    lift = np.array([0.0, 0.0, 0.10])
    index = 0
    abort = None

    while not is_terminal(board):
        move, value = minimax(board, player, protocol.depth)
        waypoints = [cell.home]
        attempts = failures = 0
        held = grasp_xy = None
        refs = []
        for _ in range(int(params["max_replans"])):
            frame, new_refs, seg, rec, bases = _perceive(ctx, scene, layout)
            refs += new_refs
            candidates = [i for i, (lab, p) in enumerate(zip(rec.labels, bases))
                          if lab == player and layout.locate(p[0], p[1]) is None]
            if not candidates:
                break
            pick_idx = int(ctx.rng_policy.choice(candidates))
            point = bases[pick_idx].copy()
            point[2] = ctx.grasp_height()
            angle = _grasp_angle(seg.masks[pick_idx], ctx.hand_eye)
            waypoints.append(point + lift)
            for _ in range(1 + int(params["max_retries"])):
                attempts += 1
                waypoints += [point, point + lift]
                outcome = execute_grasp(scene, cell, Grasp(tuple(point), angle), ctx.rng_grasp)
                if outcome.success:
                    held, grasp_xy = outcome.held, point[:2]
                    break
                failures += 1
            if held is not None:
                break

        if held is None:
            t = move_time(waypoints + [cell.home], cell)
            ctx.clock += t + attempts * closing
            records.append(SubTaskRecord(
                repetition, index, "abort", "grasp_failed", False, attempts, failures,
                None, None, path_length(waypoints + [cell.home]),
                {"motion": t, "gripper_close": attempts * closing}, dict(protocol.stages), refs,
                {"player": PLAYER_NAMES[player], "move": move, "result": None},
            ))
            abort = "grasp_failed"
            break

        target = layout.cell_center(move)
        place_point = np.array([target[0], target[1], ctx.grasp_height()])
        pick_motion = move_time(waypoints, cell)
        waypoints += [place_point + lift, place_point, place_point + lift, cell.home]
        center, yaw = transported_pose(held, grasp_xy, target, 0.0)
        place(scene, held, center, yaw, cell)
        board = board[:move] + (player,) + board[move + 1:]
        t_sub = move_time(waypoints, cell)
        ctx.clock += t_sub + attempts * closing + sum(latency.values())
        durations = dict(latency)
        durations.update({"pick_motion": pick_motion, "place_motion": t_sub - pick_motion,
                          "gripper_close": attempts * closing})
        data = {"player": PLAYER_NAMES[player], "move": move, "value": value, "board": list(board),
                "result": game_result(board), "picked_object": held.id}
        record = SubTaskRecord(repetition, index, "pick_place", "success", True, attempts, failures, t_sub, None,
                               path_length(waypoints), durations, dict(protocol.stages), refs, data)
        records.append(record)
        index += 1
        try:
            perceived = _perceived_board(ctx, scene, layout)
            if perceived != board:
                raise ConsistencyError(f"perceived board {perceived} != internal board {board}")
        except ConsistencyError as exc:
            records.append(SubTaskRecord(repetition, index, "abort", "consistency_error", False,
                                         data={"message": str(exc), "result": None}))
            abort = "consistency_error"
            break
        player = opponent(player)

    result = game_result(board) if abort is None else None
    outcome = {"result": result, "moves": [r.data["move"] for r in records if r.kind == "pick_place"],
               "aborted": abort, "calibration_rms": ctx.calibration_rms}
    return TaskResult(records, outcome, ctx.frames, cell)
