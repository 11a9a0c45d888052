from __future__ import annotations

from .constants import (
    KIND_EXPLOIT_KNOWN,
    KIND_EXPLOIT_UNKNOWN,
    KIND_EXPLORE,
    KIND_TERMINAL,
    MAX_ENUMERATION_ACTIONS,
    MAX_ENUMERATION_HORIZON,
)
from .engine import best_known_action, check_ordering, initial_state, is_terminal, recommend, rollout, transition
from .enumeration import (
    RolloutCell,
    RolloutTable,
    exact_rollouts,
    feasible_states,
    realization_vectors,
    terminal_time_profile,
    y_cells,
)
from .models import EpisodeDraw, InformationState, Recommendation, RolloutStep
from .policies import (
    AlwaysFirstPolicy,
    FullInformationPolicy,
    PrefixedPlanPolicy,
    TablePolicy,
    greedy_policy,
    optimal_policy,
)
from .preprocess import PositiveMeanPlan, preprocess_positive_means

__all__ = [
    "KIND_EXPLOIT_KNOWN",
    "KIND_EXPLOIT_UNKNOWN",
    "KIND_EXPLORE",
    "KIND_TERMINAL",
    "MAX_ENUMERATION_ACTIONS",
    "MAX_ENUMERATION_HORIZON",
    "InformationState",
    "Recommendation",
    "EpisodeDraw",
    "RolloutStep",
    "initial_state",
    "check_ordering",
    "is_terminal",
    "best_known_action",
    "transition",
    "recommend",
    "rollout",
    "PositiveMeanPlan",
    "preprocess_positive_means",
    "TablePolicy",
    "greedy_policy",
    "AlwaysFirstPolicy",
    "FullInformationPolicy",
    "PrefixedPlanPolicy",
    "optimal_policy",
    "RolloutCell",
    "RolloutTable",
    "realization_vectors",
    "y_cells",
    "exact_rollouts",
    "feasible_states",
    "terminal_time_profile",
]
