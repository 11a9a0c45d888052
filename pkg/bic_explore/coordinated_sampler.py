from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .errors import YOutOfRange
from .exploration_rates import RateSchedule

OVERSHOOT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ExplorerAssignment:
    """The agent f^j(y) that explores each action j for one draw of y.

    `None` means no agent explores j for this y: either the schedule leaves
    part of rho_j unused (limited horizon, reduced rates) or rho_j is zero.
    """

    y: float
    explorer: Mapping[int, Optional[int]]

    def agent_for(self, j: int) -> Optional[int]:
        return self.explorer.get(j)


def _check_y(y: float) -> None:
    if not 0.0 < y <= 1.0:
        raise YOutOfRange(y)


def explorer_index(schedule: RateSchedule, j: int, y: float) -> Optional[int]:
    """Largest t whose strict prefix sum is below y * rho_j; cells are half-open (prefix_{t-1}, prefix_t]."""
    _check_y(y)
    rho = schedule.rho(j)
    if rho <= 0.0:
        return None
    cum = schedule.cumulative(j)
    target = y * rho
    index = int(np.searchsorted(cum, target, side="left"))
    if index < cum.size:
        return index + 1
    total = float(cum[-1]) if cum.size else 0.0
    if schedule.maximal and target - total <= OVERSHOOT_TOLERANCE:
        return schedule.n(j)
    return None


def recommendation_draw(schedule: RateSchedule, j: int, t: int, y: float) -> int:
    return j if explorer_index(schedule, j, y) == t else 1


def assign_explorers(schedule: RateSchedule, y: float) -> ExplorerAssignment:
    _check_y(y)
    return ExplorerAssignment(
        y=float(y),
        explorer={j: explorer_index(schedule, j, y) for j in range(2, schedule.k + 1)},
    )


def y_breakpoints(schedule: RateSchedule) -> tuple[float, ...]:
    """Every y in (0, 1) where some f^j changes value: cumulative sums divided by rho_j."""
    points: set[float] = set()
    for j in range(2, schedule.k + 1):
        rho = schedule.rho(j)
        if rho <= 0.0:
            continue
        cum = schedule.cumulative(j)
        last = schedule.n(j)
        for value in cum[: max(last, 0)]:
            ratio = float(value) / rho
            if 0.0 < ratio < 1.0 - OVERSHOOT_TOLERANCE:
                points.add(ratio)
    return tuple(sorted(points))


def explorer_cells(schedule: RateSchedule, j: int) -> list[tuple[float, float, int]]:
    """(y_low, y_high, agent) for each agent with a positive rate for j."""
    rho = schedule.rho(j)
    if rho <= 0.0:
        return []
    cum = schedule.cumulative(j)
    cells: list[tuple[float, float, int]] = []
    low = 0.0
    for t in range(1, schedule.n(j) + 1):
        high = min(float(cum[t - 1]) / rho, 1.0)
        if high > low:
            cells.append((low, high, t))
        low = high
    return cells


__all__ = [
    "ExplorerAssignment",
    "explorer_index",
    "recommendation_draw",
    "assign_explorers",
    "y_breakpoints",
    "explorer_cells",
]
