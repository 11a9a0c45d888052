from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import ActionIndexError
from .constants import KIND_EXPLORE, REWARD_PLUS, UNKNOWN_MARK


def _format_value(value: Optional[float]) -> str:
    if value is None:
        return UNKNOWN_MARK
    if float(value).is_integer():
        return str(int(value))
    return f"{value:.6g}"


@dataclass(frozen=True)
class InformationState:
    """Planner knowledge <z_1, ..., z_k> before agent `t`; `None` marks an unknown reward.

    `z[0]` is action 1. In the continuous setting it holds the realized x_1.
    """

    z: tuple[Optional[float], ...]
    t: int = 1

    @property
    def k(self) -> int:
        return len(self.z)

    def value(self, j: int) -> Optional[float]:
        if not 1 <= j <= self.k:
            raise ActionIndexError(j, self.k)
        return self.z[j - 1]

    def is_known(self, j: int) -> bool:
        return self.value(j) is not None

    def unknown_actions(self) -> tuple[int, ...]:
        return tuple(j for j, value in enumerate(self.z, start=1) if value is None)

    def least_unknown(self) -> Optional[int]:
        unknown = self.unknown_actions()
        return unknown[0] if unknown else None

    def positive_action(self) -> Optional[int]:
        for j, value in enumerate(self.z, start=1):
            if value is not None and value >= REWARD_PLUS:
                return j
        return None

    def with_value(self, j: int, value: float) -> "InformationState":
        self.value(j)
        z = list(self.z)
        z[j - 1] = float(value)
        return InformationState(z=tuple(z), t=self.t)

    def advanced(self) -> "InformationState":
        return InformationState(z=self.z, t=self.t + 1)

    @property
    def label(self) -> str:
        return "<" + ",".join(_format_value(value) for value in self.z) + ">"

    def __str__(self) -> str:
        return f"{self.label}@t={self.t}"


@dataclass(frozen=True)
class Recommendation:
    action: int
    kind: str

    @property
    def explores(self) -> bool:
        return self.kind == KIND_EXPLORE


@dataclass(frozen=True)
class EpisodeDraw:
    """One episode's randomness: the shared uniform y and the realization vector x (x[0] is x_1)."""

    y: float
    x: tuple[float, ...]

    @property
    def k(self) -> int:
        return len(self.x)

    def reward(self, j: int) -> float:
        if not 1 <= j <= self.k:
            raise ActionIndexError(j, self.k)
        return self.x[j - 1]


@dataclass(frozen=True)
class RolloutStep:
    t: int
    state_before: InformationState
    recommendation: Recommendation
    reward: float


__all__ = ["InformationState", "Recommendation", "EpisodeDraw", "RolloutStep"]
