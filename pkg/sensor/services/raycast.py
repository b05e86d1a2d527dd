"""
sensor/services/raycast.py
==========================
Supercover ray traversal over unit grid cells.

Cell ``(r, c)`` is the closed square ``[r - 1/2, r + 1/2] x [c - 1/2, c + 1/2]``
in continuous ``(row, col)`` coordinates. A ray leaves the centre of its
origin cell; angle 0 points along ``+col`` and angles grow counter-clockwise
on screen, so the direction is ``(-sin angle, cos angle)``.

The traversal is the incremental voxel walk: keep the parameter of the next
row and column boundary crossing and advance along whichever comes first.
When both crossings coincide the ray passes through a corner; the two side
cells are reported along with the diagonal one, so the result is the set of
every cell the closed segment touches.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from gridworld.services.dynamics import AgentState

TOLERANCE: float = 1e-9


class RayCell(NamedTuple):
    """A traversed cell and the ray parameter at which it is entered."""

    cell: AgentState
    entry: float


def ray_direction(angle_deg: float) -> tuple[float, float]:
    """Unit ``(d_row, d_col)`` for an angle in degrees; tiny components snap to 0."""
    radians: float = math.radians(angle_deg)
    d_row: float = -math.sin(radians)
    d_col: float = math.cos(radians)
    if abs(d_row) < 1e-12:
        d_row = 0.0
    if abs(d_col) < 1e-12:
        d_col = 0.0
    return d_row, d_col


def ray_point(origin: tuple[int, int], angle_deg: float, distance: float) -> tuple[float, float]:
    """Continuous point at ``distance`` along the ray from the centre of ``origin``."""
    d_row, d_col = ray_direction(angle_deg)
    return origin[0] + distance * d_row, origin[1] + distance * d_col


def _first_crossing(direction: float) -> tuple[int, float, float]:
    """Step sign, parameter of the first boundary and boundary spacing along one axis."""
    if direction == 0.0:
        return 0, math.inf, math.inf
    step: int = 1 if direction > 0 else -1
    spacing: float = 1.0 / abs(direction)
    return step, 0.5 * spacing, spacing


def trace_ray(origin: tuple[int, int], angle_deg: float, max_range: float) -> list[RayCell]:
    """Return the cells a ray enters within ``max_range``, with entry parameters.

    The origin cell is excluded. Cells are ordered by entry parameter, then
    by ``(row, col)``. A cell is included when it is entered at or before
    ``max_range`` (within :data:`TOLERANCE`).
    """
    d_row, d_col = ray_direction(angle_deg)
    step_r, next_r, spacing_r = _first_crossing(d_row)
    step_c, next_c, spacing_c = _first_crossing(d_col)

    row, col = int(origin[0]), int(origin[1])
    limit: float = max_range + TOLERANCE
    visited: list[RayCell] = []

    while True:
        entry: float = min(next_r, next_c)
        if entry > limit:
            break
        if abs(next_r - next_c) <= TOLERANCE * max(1.0, entry):
            corner: list[AgentState] = sorted(
                [
                    AgentState(row + step_r, col),
                    AgentState(row, col + step_c),
                    AgentState(row + step_r, col + step_c),
                ]
            )
            visited.extend(RayCell(cell, entry) for cell in corner)
            row += step_r
            col += step_c
            next_r += spacing_r
            next_c += spacing_c
        elif next_r < next_c:
            row += step_r
            visited.append(RayCell(AgentState(row, col), entry))
            next_r += spacing_r
        else:
            col += step_c
            visited.append(RayCell(AgentState(row, col), entry))
            next_c += spacing_c
    return visited


def ray_cells(origin: tuple[int, int], angle_deg: float, max_range: float) -> list[AgentState]:
    """Cells traversed by a ray of length ``max_range`` from the centre of ``origin``."""
    return [hit.cell for hit in trace_ray(origin, angle_deg, max_range)]
