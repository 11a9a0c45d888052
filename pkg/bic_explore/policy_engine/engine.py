from __future__ import annotations

from typing import TYPE_CHECKING, Optional

from ..coordinated_sampler import ExplorerAssignment
from ..errors import DegenerateK, InfeasibleState, RewardMismatch, UnreachableState
from ..exploration_rates import RateSchedule
from ..logging_setup import get_logger
from .constants import (
    KIND_EXPLOIT_KNOWN,
    KIND_EXPLOIT_UNKNOWN,
    KIND_EXPLORE,
    KIND_TERMINAL,
    REWARD_MINUS,
    REWARD_PLUS,
    REWARD_ZERO,
)
from .models import EpisodeDraw, InformationState, Recommendation, RolloutStep

if TYPE_CHECKING:
    from ..protocols import RecommendationPolicy

logger = get_logger("engine")

_TAIL_VALUES = (REWARD_MINUS, REWARD_PLUS)


def initial_state(k: int) -> InformationState:
    if k < 2:
        raise DegenerateK(k)
    return InformationState(z=(None,) * k, t=1)


def check_ordering(state: InformationState) -> None:
    """Raise InfeasibleState unless actions were revealed in ascending order with two-point tail values."""
    first_gap: Optional[int] = None
    for j in range(2, state.k + 1):
        value = state.value(j)
        if value is None:
            if first_gap is None:
                first_gap = j
            continue
        if value not in _TAIL_VALUES:
            raise InfeasibleState(state.label, f"action {j} holds {value!r}, outside its two-point support")
        if not state.is_known(1):
            raise InfeasibleState(state.label, f"action {j} revealed before action 1")
        if first_gap is not None:
            raise InfeasibleState(state.label, f"action {j} revealed while action {first_gap} is unexplored")


def is_terminal(state: InformationState) -> bool:
    return state.positive_action() is not None or not state.unknown_actions()


def best_known_action(state: InformationState) -> int:
    """Highest known value, ties toward the lowest index."""
    best_action = 0
    best_value = float("-inf")
    for j, value in enumerate(state.z, start=1):
        if value is not None and value > best_value:
            best_action, best_value = j, value
    if best_action == 0:
        raise InfeasibleState(state.label, "no action has been revealed")
    return best_action


def transition(state: InformationState, action: int, reward: float) -> InformationState:
    known = state.value(action)
    if known is None:
        return state.with_value(action, reward).advanced()
    if known != reward:
        raise RewardMismatch(action, known, reward)
    return state.advanced()


def recommend(state: InformationState, schedule: RateSchedule, assignment: ExplorerAssignment) -> Recommendation:
    check_ordering(state)
    t = state.t
    if t == 1:
        return Recommendation(1, KIND_EXPLOIT_UNKNOWN)
    first = state.value(1)
    if first is None:
        raise InfeasibleState(state.label, f"action 1 still unknown at t={t}")

    positive = state.positive_action()
    if positive is not None:
        return Recommendation(positive, KIND_TERMINAL)
    j = state.least_unknown()
    if j is None:
        return Recommendation(best_known_action(state), KIND_TERMINAL)
    if first <= REWARD_MINUS:
        return Recommendation(j, KIND_EXPLOIT_UNKNOWN)
    if first != REWARD_ZERO:
        raise InfeasibleState(state.label, f"x_1={first!r} outside the discrete support")

    explorer = assignment.agent_for(j)
    if explorer == t:
        return Recommendation(j, KIND_EXPLORE)
    if explorer is None or explorer > t:
        return Recommendation(1, KIND_EXPLOIT_KNOWN)
    logger.warning("explorer of action %d fired at agent %d but %s is still unexplored", j, explorer, state)
    raise UnreachableState(state.label, t, j, explorer)


def rollout(
    policy: "RecommendationPolicy",
    draw: EpisodeDraw,
    horizon: int,
) -> tuple[list[RolloutStep], InformationState]:
    """Walk agents 1..horizon under `policy`; every agent complies."""
    state = initial_state(draw.k)
    steps: list[RolloutStep] = []
    for t in range(1, horizon + 1):
        recommendation = policy.recommend(state, draw)
        reward = draw.reward(recommendation.action)
        steps.append(RolloutStep(t=t, state_before=state, recommendation=recommendation, reward=reward))
        state = transition(state, recommendation.action, reward)
    return steps, state


__all__ = [
    "initial_state",
    "check_ordering",
    "is_terminal",
    "best_known_action",
    "transition",
    "recommend",
    "rollout",
]
