"""Waypoint motion planning for top-down pick and place."""
from __future__ import annotations

import numpy as np

from ..errors import OutOfWorkspaceError

APPROACH_HEIGHT = 0.10


def plan_motion(pick, place, cell, approach: float = APPROACH_HEIGHT) -> list[np.ndarray]:
    """home, pre-pick, pick, pre-pick, pre-place, place, pre-place, home."""
    pick = np.asarray(pick, dtype=float)
    place = np.asarray(place, dtype=float)
    for name, p in (("pick", pick), ("place", place)):
        if not cell.table.contains(p[0], p[1]):
            raise OutOfWorkspaceError(f"{name} point {p[:2]} outside the table extents")
        if p[2] < cell.table.surface_z:
            raise OutOfWorkspaceError(f"{name} point below the table surface")
    lift = np.array([0.0, 0.0, approach])
    home = cell.home
    return [home, pick + lift, pick, pick + lift, place + lift, place, place + lift, home]


def pick_path(pick, cell, attempts: int = 1, approach: float = APPROACH_HEIGHT) -> list[np.ndarray]:
    """home, then ``attempts`` descend-and-lift cycles at the pick point."""
    pick = np.asarray(pick, dtype=float)
    lift = np.array([0.0, 0.0, approach])
    path = [cell.home, pick + lift]
    for _ in range(attempts):
        path += [pick, pick + lift]
    return path
