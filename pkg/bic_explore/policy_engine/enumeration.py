from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np

from ..errors import ScaleExceeded
from ..exploration_rates import RateSchedule
from ..prior_model import FIRST_ACTION_SUPPORT, TAIL_ACTION_SUPPORT, PriorLike, ValidatedPrior, validate
from .constants import BREAKPOINT_MERGE_TOLERANCE, MAX_ENUMERATION_ACTIONS, MAX_ENUMERATION_HORIZON
from .engine import initial_state, is_terminal, rollout
from .models import EpisodeDraw, InformationState, RolloutStep
from .policies import TablePolicy

if TYPE_CHECKING:
    from ..protocols import RecommendationPolicy


@dataclass(frozen=True)
class RolloutCell:
    """One realization vector crossed with one y-cell, played out under a policy."""

    x: tuple[float, ...]
    y: float
    probability: float
    width: float
    steps: tuple[RolloutStep, ...]
    final_state: InformationState

    @property
    def weight(self) -> float:
        return self.probability * self.width

    def state_before(self, t: int) -> InformationState:
        return self.steps[t - 1].state_before if t <= len(self.steps) else self.final_state

    @property
    def terminal_t(self) -> int:
        """First agent whose incoming state is terminal, else horizon + 1."""
        for step in self.steps:
            if is_terminal(step.state_before):
                return step.t
        return len(self.steps) + 1

    @property
    def welfare(self) -> float:
        return float(sum(step.reward for step in self.steps))


@dataclass(frozen=True)
class RolloutTable:
    """Every (realization vector, y-cell) rollout of a policy, with exact probability weights."""

    policy_name: str
    prior: ValidatedPrior
    horizon: int
    cells: tuple[RolloutCell, ...]

    @property
    def k(self) -> int:
        return self.prior.k

    @property
    def total_weight(self) -> float:
        return float(sum(cell.weight for cell in self.cells))

    def welfare(self) -> float:
        return float(sum(cell.weight * cell.welfare for cell in self.cells))

    def reveal_probabilities(self) -> np.ndarray:
        """Entry [t, j] is Pr[x_j is revealed before agent t], for t = 1..horizon+1."""
        out = np.zeros((self.horizon + 2, self.k + 1), dtype=float)
        for cell in self.cells:
            for t in range(1, self.horizon + 2):
                state = cell.state_before(t)
                for j, value in enumerate(state.z, start=1):
                    if value is not None:
                        out[t, j] += cell.weight
        return out

    def terminal_profile(self) -> np.ndarray:
        """Entry t-1 is Pr[the state before agent t is terminal], for t = 1..horizon+1."""
        out = np.zeros(self.horizon + 1, dtype=float)
        for cell in self.cells:
            for t in range(1, self.horizon + 2):
                if is_terminal(cell.state_before(t)):
                    out[t - 1] += cell.weight
        return out


def realization_vectors(prior: PriorLike) -> Iterator[tuple[tuple[float, ...], float]]:
    """All x with positive prior probability, with that probability."""
    vp = validate(prior, allow_positive_tail=True)
    first_probs = {1: vp.p1_plus, 0: vp.p1_zero, -1: vp.p1_minus}
    tails = [[(value, vp.plus(j) if value > 0 else vp.minus(j)) for value in TAIL_ACTION_SUPPORT] for j in range(2, vp.k + 1)]
    for first in FIRST_ACTION_SUPPORT:
        p_first = first_probs[first]
        if p_first <= 0.0:
            continue
        for combo in itertools.product(*tails):
            probability = p_first
            for _value, p in combo:
                probability *= p
            if probability > 0.0:
                yield (float(first),) + tuple(float(value) for value, _p in combo), probability


def merge_breakpoints(points: Sequence[float], tolerance: float = BREAKPOINT_MERGE_TOLERANCE) -> list[float]:
    merged: list[float] = []
    for point in sorted(float(p) for p in points):
        if point <= tolerance or point >= 1.0 - tolerance:
            continue
        if merged and point - merged[-1] <= tolerance:
            continue
        merged.append(point)
    return merged


def y_cells(points: Sequence[float]) -> list[tuple[float, float]]:
    """(midpoint, width) of each cell of (0, 1] cut at the merged breakpoints."""
    edges = [0.0, *merge_breakpoints(points), 1.0]
    return [((low + high) / 2.0, high - low) for low, high in zip(edges, edges[1:]) if high > low]


def _check_scale(k: int, horizon: int) -> None:
    if k > MAX_ENUMERATION_ACTIONS:
        raise ScaleExceeded("k", k, MAX_ENUMERATION_ACTIONS)
    if horizon > MAX_ENUMERATION_HORIZON:
        raise ScaleExceeded("horizon", horizon, MAX_ENUMERATION_HORIZON)
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")


def exact_rollouts(policy: "RecommendationPolicy", prior: PriorLike, horizon: int) -> RolloutTable:
    vp = validate(prior, allow_positive_tail=True)
    _check_scale(vp.k, horizon)
    cells_y = y_cells(policy.y_breakpoints())
    cells: list[RolloutCell] = []
    for x, probability in realization_vectors(vp):
        for y, width in cells_y:
            steps, final_state = rollout(policy, EpisodeDraw(y=y, x=x), horizon)
            cells.append(
                RolloutCell(
                    x=x,
                    y=y,
                    probability=probability,
                    width=width,
                    steps=tuple(steps),
                    final_state=final_state,
                )
            )
    return RolloutTable(policy_name=policy.name, prior=vp, horizon=horizon, cells=tuple(cells))


def feasible_states(prior: PriorLike, schedule: RateSchedule, t: int) -> frozenset[InformationState]:
    """States that occur with positive probability before agent t under the schedule's table policy."""
    vp = validate(prior, allow_positive_tail=True)
    if t <= 1:
        return frozenset({initial_state(vp.k)})
    table = exact_rollouts(TablePolicy(schedule), vp, t - 1)
    return frozenset(cell.final_state for cell in table.cells if cell.weight > 0.0)


def terminal_time_profile(policy: "RecommendationPolicy", prior: PriorLike, horizon: int) -> np.ndarray:
    return exact_rollouts(policy, prior, horizon).terminal_profile()


__all__ = [
    "RolloutCell",
    "RolloutTable",
    "realization_vectors",
    "merge_breakpoints",
    "y_cells",
    "exact_rollouts",
    "feasible_states",
    "terminal_time_profile",
]
