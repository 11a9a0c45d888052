from __future__ import annotations

import functools
from typing import Optional

from ..coordinated_sampler import ExplorerAssignment, assign_explorers, y_breakpoints
from ..exploration_rates import (
    DEFAULT_AGENT_CAP,
    GREEDY_LABEL,
    UNLIMITED,
    HorizonMode,
    RateSchedule,
    compute_rate_schedule,
    zero_schedule,
)
from ..prior_model import PriorLike, ValidatedPrior, validate
from .constants import KIND_EXPLOIT_KNOWN, KIND_EXPLOIT_UNKNOWN, KIND_TERMINAL
from .engine import recommend
from .models import EpisodeDraw, InformationState, Recommendation
from .preprocess import PositiveMeanPlan, preprocess_positive_means

ASSIGNMENT_CACHE_SIZE = 4096


class TablePolicy:
    """Recommendation table driven by a rate schedule and the coordinated sampler.

    With the maximal schedule this is the optimal BIC policy; with any other
    feasible schedule it is the alternative policy that keeps the same
    exploitation rows.
    """

    def __init__(self, schedule: RateSchedule, name: Optional[str] = None) -> None:
        self.schedule = schedule
        self._name = name or schedule.label
        self._assign = functools.lru_cache(maxsize=ASSIGNMENT_CACHE_SIZE)(
            functools.partial(assign_explorers, schedule)
        )
        self._breakpoints: Optional[tuple[float, ...]] = None

    @property
    def name(self) -> str:
        return self._name

    @property
    def prior(self) -> ValidatedPrior:
        return self.schedule.prior

    def assignment(self, y: float) -> ExplorerAssignment:
        return self._assign(float(y))

    def y_breakpoints(self) -> tuple[float, ...]:
        if self._breakpoints is None:
            self._breakpoints = y_breakpoints(self.schedule)
        return self._breakpoints

    def recommend(self, state: InformationState, draw: EpisodeDraw) -> Recommendation:
        return recommend(state, self.schedule, self.assignment(draw.y))

    def __repr__(self) -> str:
        return f"TablePolicy(name={self._name!r}, k={self.schedule.k}, mode={self.schedule.mode.label})"


def greedy_policy(prior: PriorLike) -> TablePolicy:
    """Table policy with every exploration rate at zero: exploits, never explores."""
    return TablePolicy(zero_schedule(prior), name=GREEDY_LABEL)


class AlwaysFirstPolicy:
    name = "always_first"

    def y_breakpoints(self) -> tuple[float, ...]:
        return ()

    def recommend(self, state: InformationState, draw: EpisodeDraw) -> Recommendation:
        return Recommendation(1, KIND_EXPLOIT_UNKNOWN if state.t == 1 else KIND_EXPLOIT_KNOWN)


class FullInformationPolicy:
    """First-best benchmark: reads the realization vector, so it is not BIC."""

    name = "full_information"

    def y_breakpoints(self) -> tuple[float, ...]:
        return ()

    def recommend(self, state: InformationState, draw: EpisodeDraw) -> Recommendation:
        best = max(range(1, draw.k + 1), key=lambda j: (draw.reward(j), -j))
        return Recommendation(best, KIND_EXPLOIT_KNOWN)


class PrefixedPlanPolicy:
    """Recommend actions 1..m in order until a +1 shows up, then hand over to the residual table."""

    def __init__(self, plan: PositiveMeanPlan, residual: Optional[TablePolicy]) -> None:
        self.plan = plan
        self.residual = residual
        suffix = residual.name if residual is not None else "sequential"
        self._name = f"prefixed:{suffix}"

    @property
    def name(self) -> str:
        return self._name

    def y_breakpoints(self) -> tuple[float, ...]:
        return self.residual.y_breakpoints() if self.residual is not None else ()

    def recommend(self, state: InformationState, draw: EpisodeDraw) -> Recommendation:
        t = state.t
        if t == 1:
            return Recommendation(1, KIND_EXPLOIT_UNKNOWN)
        positive = state.positive_action()
        if positive is not None:
            return Recommendation(positive, KIND_TERMINAL)
        if t <= self.plan.m:
            return Recommendation(t, KIND_EXPLOIT_UNKNOWN)
        if self.residual is None:
            return Recommendation(self.plan.best_prefix_action(state), KIND_TERMINAL)
        inner = self.residual.recommend(self.plan.residual_state(state), self.plan.residual_draw(draw))
        return Recommendation(self.plan.original_action(inner.action, state), inner.kind)


def optimal_policy(
    prior: PriorLike,
    horizon_mode: HorizonMode = UNLIMITED,
    cap: int = DEFAULT_AGENT_CAP,
) -> TablePolicy | PrefixedPlanPolicy:
    vp = validate(prior, allow_positive_tail=True)
    if not vp.positive_tail:
        return TablePolicy(compute_rate_schedule(vp, horizon_mode, cap))
    plan = preprocess_positive_means(vp)
    if plan.residual is None:
        return PrefixedPlanPolicy(plan, None)
    residual_mode = horizon_mode
    if horizon_mode.horizon is not None:
        residual_mode = HorizonMode.limited_to(max(plan.residual_time(horizon_mode.horizon), 1))
    return PrefixedPlanPolicy(plan, TablePolicy(compute_rate_schedule(plan.residual, residual_mode, cap)))


__all__ = [
    "TablePolicy",
    "greedy_policy",
    "AlwaysFirstPolicy",
    "FullInformationPolicy",
    "PrefixedPlanPolicy",
    "optimal_policy",
]
