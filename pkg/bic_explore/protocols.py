from __future__ import annotations

from typing import TYPE_CHECKING, Protocol, Sequence

if TYPE_CHECKING:
    from .policy_engine.models import EpisodeDraw, InformationState, Recommendation

YBreakpoints = Sequence[float]


class RecommendationPolicy(Protocol):
    """What the rollout loop, the exact enumerator and the harness need from a policy."""

    @property
    def name(self) -> str: ...

    def y_breakpoints(self) -> YBreakpoints:
        """Points in (0, 1) where the policy's behaviour may change as a function of y."""
        ...

    def recommend(self, state: "InformationState", draw: "EpisodeDraw") -> "Recommendation": ...


__all__ = ["RecommendationPolicy", "YBreakpoints"]
