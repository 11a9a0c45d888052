from __future__ import annotations

from typing import Optional


class BicExploreError(Exception):
    """Base class for every error raised by the package."""


class PriorValidationError(BicExploreError):
    pass


class DegenerateK(PriorValidationError):
    def __init__(self, k: int) -> None:
        super().__init__(f"at least two actions are required (k={k})")
        self.k = k


class PriorShapeError(PriorValidationError):
    def __init__(self, k: int, tail_length: int) -> None:
        super().__init__(f"p_plus must list k-1={k - 1} probabilities, got {tail_length}")
        self.k = k
        self.tail_length = tail_length


class ProbabilityOutOfRange(PriorValidationError):
    def __init__(self, field: str, value: float, detail: str = "") -> None:
        suffix = f" ({detail})" if detail else ""
        super().__init__(f"{field}={value!r} is not a valid probability{suffix}")
        self.field = field
        self.value = value


class ZeroSupport(PriorValidationError):
    def __init__(self, field: str) -> None:
        super().__init__(f"{field} must be strictly positive")
        self.field = field


class PositiveTailMean(PriorValidationError):
    def __init__(self, action: int, mean: float) -> None:
        super().__init__(f"action {action} has nonnegative mean {mean:.6g}; route it through preprocess_positive_means")
        self.action = action
        self.mean = mean


class NonStrictOrdering(PriorValidationError):
    def __init__(self, action: int, previous_mean: float, mean: float) -> None:
        super().__init__(
            f"means must strictly decrease: mu_{action - 1}={previous_mean:.6g} <= mu_{action}={mean:.6g}"
        )
        self.action = action
        self.previous_mean = previous_mean
        self.mean = mean


class ActionIndexError(BicExploreError, IndexError):
    def __init__(self, action: int, k: int) -> None:
        super().__init__(f"action index {action} outside 1..{k}")
        self.action = action
        self.k = k


class NonTerminating(BicExploreError):
    def __init__(self, action: int, cap: int) -> None:
        super().__init__(f"exploration of action {action} did not finish within {cap} agents")
        self.action = action
        self.cap = cap


class MassMismatch(BicExploreError):
    def __init__(self, action: int, expected: float, actual: float) -> None:
        super().__init__(f"action {action}: sum of rates {actual!r} differs from rho {expected!r}")
        self.action = action
        self.expected = expected
        self.actual = actual


class InfeasibleRate(BicExploreError):
    def __init__(self, t: int, action: int, rate: float, bound: float) -> None:
        super().__init__(f"rate {rate!r} at (t={t}, j={action}) exceeds exploration-state mass {bound!r}")
        self.t = t
        self.action = action
        self.rate = rate
        self.bound = bound


class YOutOfRange(BicExploreError, ValueError):
    def __init__(self, y: float) -> None:
        super().__init__(f"y={y!r} must lie in (0, 1]")
        self.y = y


class InfeasibleState(BicExploreError):
    def __init__(self, label: str, reason: str) -> None:
        super().__init__(f"state {label} is infeasible: {reason}")
        self.label = label
        self.reason = reason


class UnreachableState(BicExploreError):
    def __init__(self, label: str, t: int, action: int, explorer: int) -> None:
        super().__init__(f"state {label} at t={t}: explorer of action {action} already fired at agent {explorer}")
        self.label = label
        self.t = t
        self.action = action
        self.explorer = explorer


class RewardMismatch(BicExploreError):
    def __init__(self, action: int, known: float, realized: float) -> None:
        super().__init__(f"action {action} already revealed {known!r}, got {realized!r}")
        self.action = action
        self.known = known
        self.realized = realized


class NoBracket(BicExploreError):
    def __init__(self, action: int, t: int, deficit: float) -> None:
        super().__init__(f"no root in [lower, 1] for action {action} at t={t} (deficit {deficit:.3e})")
        self.action = action
        self.t = t
        self.deficit = deficit


class MonotonicityViolation(BicExploreError):
    def __init__(self, action: int, t: int, left: float, right: float) -> None:
        super().__init__(f"interval endpoints out of order for action {action} at t={t}: {left!r} > {right!r}")
        self.action = action
        self.t = t
        self.left = left
        self.right = right


class OverlapDetected(BicExploreError):
    def __init__(self, t: int, actions: tuple[int, ...], x1: float) -> None:
        super().__init__(f"x_1={x1!r} falls in intervals of actions {actions} at t={t}")
        self.t = t
        self.actions = actions
        self.x1 = x1


class ScaleExceeded(BicExploreError):
    def __init__(self, what: str, value: int, limit: int) -> None:
        super().__init__(f"{what}={value} exceeds enumeration limit {limit}")
        self.what = what
        self.value = value
        self.limit = limit


class HorizonTooShort(BicExploreError):
    def __init__(self, horizon: int, required: int) -> None:
        super().__init__(f"horizon T={horizon} is below the welfare-optimality bound {required}")
        self.horizon = horizon
        self.required = required


class ConfigError(BicExploreError):
    def __init__(self, message: str, field: str = "", line: Optional[int] = None) -> None:
        location = ""
        if field:
            location += f" [{field}]"
        if line is not None:
            location += f" (line {line})"
        super().__init__(f"{message}{location}")
        self.field = field
        self.line = line


class UnknownKey(ConfigError):
    pass


class TypeMismatch(ConfigError):
    pass


class MissingKey(ConfigError):
    pass


class ConflictingPrior(ConfigError):
    pass


class InvalidValue(ConfigError):
    pass


__all__ = [
    "BicExploreError",
    "PriorValidationError",
    "DegenerateK",
    "PriorShapeError",
    "ProbabilityOutOfRange",
    "ZeroSupport",
    "PositiveTailMean",
    "NonStrictOrdering",
    "ActionIndexError",
    "NonTerminating",
    "MassMismatch",
    "InfeasibleRate",
    "YOutOfRange",
    "InfeasibleState",
    "UnreachableState",
    "RewardMismatch",
    "NoBracket",
    "MonotonicityViolation",
    "OverlapDetected",
    "ScaleExceeded",
    "HorizonTooShort",
    "ConfigError",
    "UnknownKey",
    "TypeMismatch",
    "MissingKey",
    "ConflictingPrior",
    "InvalidValue",
]
