from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

from scipy import optimize

from .errors import ActionIndexError, InfeasibleState, MonotonicityViolation, NoBracket, OverlapDetected
from .logging_setup import get_logger
from .policy_engine.constants import KIND_EXPLOIT_KNOWN, KIND_EXPLOIT_UNKNOWN, KIND_EXPLORE, KIND_TERMINAL
from .policy_engine.engine import check_ordering
from .policy_engine.models import EpisodeDraw, InformationState, Recommendation
from .prior_model import SUPPORT_HIGH, SUPPORT_LOW, ContinuousSetting, validate_setting

ROOT_XTOL = 1e-10
BRACKET_TOLERANCE = 1e-12
SATURATION_TOLERANCE = 1e-12
MONOTONICITY_TOLERANCE = 1e-9

logger = get_logger("partition")


def _root(function, low: float, high: float) -> float:
    return float(optimize.brentq(function, low, high, xtol=ROOT_XTOL))


def solve_omega_first(setting: ContinuousSetting, j: int) -> float:
    """omega_{j+1}^j: exploitation gain below mu_j balances exploration loss on [mu_j, omega]."""
    mean = setting.mean(j)
    first = setting.first
    left = setting.tail_minus_product(j) * -first.partial_expectation(SUPPORT_LOW, mean, mean)
    if left <= 0.0:
        return mean

    def balance(omega: float) -> float:
        return first.partial_expectation(mean, omega, mean) - left

    at_top = balance(SUPPORT_HIGH)
    if at_top < -BRACKET_TOLERANCE:
        raise NoBracket(j, j, -at_top)
    if at_top <= 0.0:
        return SUPPORT_HIGH
    return _root(balance, mean, SUPPORT_HIGH)


def solve_omega_step(setting: ContinuousSetting, j: int, left_endpoint: float, t: int = 0) -> float:
    """omega_{t+1}^j from i_t^j: the +1 chance on (-1, i_t] pays for exploring (i_t, omega]."""
    mean = setting.mean(j)
    first = setting.first
    if left_endpoint >= SUPPORT_HIGH:
        return SUPPORT_HIGH
    gain = setting.plus(j) * -first.partial_expectation(SUPPORT_LOW, left_endpoint, 1.0)
    if gain <= 0.0:
        return left_endpoint

    def balance(omega: float) -> float:
        return first.partial_expectation(left_endpoint, omega, mean) - gain

    at_top = balance(SUPPORT_HIGH)
    if at_top < -BRACKET_TOLERANCE:
        raise NoBracket(j, t, -at_top)
    if at_top <= 0.0:
        return SUPPORT_HIGH
    return _root(balance, left_endpoint, SUPPORT_HIGH)


def _saturate(value: float) -> float:
    return SUPPORT_HIGH if value >= SUPPORT_HIGH - SATURATION_TOLERANCE else min(value, SUPPORT_HIGH)


@dataclass(frozen=True)
class PartitionSchedule:
    """Interval endpoints i_t^j for t = 1..horizon+2; agent t explores j when x_1 is in (i_t^j, i_{t+1}^j]."""

    setting: ContinuousSetting
    horizon: int
    endpoints: Mapping[int, tuple[float, ...]]
    saturation: Mapping[int, Optional[int]]
    label: str = "partition"

    @property
    def k(self) -> int:
        return self.setting.k

    def _check(self, j: int) -> None:
        if not 2 <= j <= self.k:
            raise ActionIndexError(j, self.k)

    def i(self, j: int, t: int) -> float:
        self._check(j)
        row = self.endpoints[j]
        if t < 1:
            return SUPPORT_LOW
        return row[min(t, len(row) - 1)]

    def interval(self, j: int, t: int) -> tuple[float, float]:
        return self.i(j, t), self.i(j, t + 1)

    def contains(self, j: int, t: int, x1: float) -> bool:
        left, right = self.interval(j, t)
        return left < x1 <= right

    def nonempty_intervals(self) -> Iterator[tuple[int, int, float, float]]:
        for j in range(2, self.k + 1):
            for t in range(j, self.horizon + 1):
                left, right = self.interval(j, t)
                if right > left:
                    yield j, t, left, right

    def export_rows(self) -> Iterator[tuple[int, int, float, float]]:
        """(j, t, i_{t-1}, i_t) for every solved endpoint i_t, t = j+1 up to saturation or the horizon end."""
        for j in range(2, self.k + 1):
            row = self.endpoints[j]
            for t in range(j + 1, len(row)):
                yield j, t, row[t - 1], row[t]
                if row[t] >= SUPPORT_HIGH:
                    break

    def shrunk(self, factor: float, label: str = "shrunk") -> "PartitionSchedule":
        """Pull every solved endpoint toward -1 (keeping it at or above mu_j); reveals weakly later."""
        if not 0.0 <= factor <= 1.0:
            raise ValueError(f"factor must lie in [0, 1], got {factor}")
        endpoints: dict[int, tuple[float, ...]] = {}
        for j, row in self.endpoints.items():
            mean = self.setting.mean(j)
            endpoints[j] = tuple(
                value if t <= j else max(mean, SUPPORT_LOW + factor * (value - SUPPORT_LOW))
                for t, value in enumerate(row)
            )
        return PartitionSchedule(
            setting=self.setting,
            horizon=self.horizon,
            endpoints=endpoints,
            saturation={j: _saturation_of(row) for j, row in endpoints.items()},
            label=label,
        )


def _saturation_of(row: tuple[float, ...]) -> Optional[int]:
    for t in range(1, len(row) - 1):
        if row[t + 1] >= SUPPORT_HIGH:
            return t
    return None


def _check_monotone(endpoints: Mapping[int, tuple[float, ...]]) -> None:
    for j, row in endpoints.items():
        for t in range(1, len(row) - 1):
            if row[t] > row[t + 1] + MONOTONICITY_TOLERANCE:
                raise MonotonicityViolation(j, t, row[t], row[t + 1])
        below = endpoints.get(j + 1)
        if below is None:
            continue
        for t in range(j, len(row) - 1):
            # i_{t+1}^{j+1} <= i_t^j
            if below[t + 1] > row[t] + MONOTONICITY_TOLERANCE:
                raise MonotonicityViolation(j + 1, t + 1, below[t + 1], row[t])


def compute_interval_schedule(setting: ContinuousSetting, horizon: int) -> PartitionSchedule:
    validate_setting(setting)
    if horizon < 1:
        raise ValueError(f"horizon must be positive, got {horizon}")
    last = horizon + 2
    endpoints: dict[int, tuple[float, ...]] = {}
    saturation: dict[int, Optional[int]] = {}
    for j in range(2, setting.k + 1):
        row = [SUPPORT_LOW] * (last + 1)
        saturated_at: Optional[int] = None
        if j + 1 <= last:
            try:
                row[j + 1] = _saturate(solve_omega_first(setting, j))
            except NoBracket:
                row[j + 1] = SUPPORT_HIGH
            for t in range(j + 1, last):
                if row[t] >= SUPPORT_HIGH:
                    row[t + 1] = SUPPORT_HIGH
                    continue
                try:
                    row[t + 1] = _saturate(solve_omega_step(setting, j, row[t], t))
                except NoBracket:
                    row[t + 1] = SUPPORT_HIGH
            saturated_at = _saturation_of(tuple(row))
            if saturated_at is not None:
                logger.debug("action %d saturates at agent %d", j, saturated_at)
        endpoints[j] = tuple(row)
        saturation[j] = saturated_at
    _check_monotone(endpoints)
    logger.info("partition schedule: k=%d, T=%d, saturation=%s", setting.k, horizon, saturation)
    return PartitionSchedule(setting=setting, horizon=horizon, endpoints=endpoints, saturation=saturation)


def partition_recommend(schedule: PartitionSchedule, state: InformationState, t: int, x1: float) -> Recommendation:
    if t == 1:
        return Recommendation(1, KIND_EXPLOIT_UNKNOWN)
    check_ordering(state)
    for j in range(2, schedule.k + 1):
        if state.value(j) is not None and state.value(j) >= 1.0:
            return Recommendation(j, KIND_TERMINAL)
    hits = tuple(j for j in range(2, schedule.k + 1) if schedule.contains(j, t, x1))
    if len(hits) > 1:
        raise OverlapDetected(t, hits, x1)
    if hits:
        j = hits[0]
        if state.value(j) is not None:
            raise InfeasibleState(state.label, f"interval of agent {t} points at already revealed action {j}")
        kind = KIND_EXPLORE if x1 > schedule.setting.mean(j) else KIND_EXPLOIT_UNKNOWN
        return Recommendation(j, kind)
    return Recommendation(1, KIND_EXPLOIT_KNOWN)


class PartitionPolicy:
    """Adapter that lets the rollout loop drive a partition schedule; x_1 comes from the draw."""

    def __init__(self, schedule: PartitionSchedule) -> None:
        self.schedule = schedule

    @property
    def name(self) -> str:
        return self.schedule.label

    def y_breakpoints(self) -> tuple[float, ...]:
        return ()

    def recommend(self, state: InformationState, draw: EpisodeDraw) -> Recommendation:
        return partition_recommend(self.schedule, state, state.t, draw.reward(1))


__all__ = [
    "PartitionSchedule",
    "PartitionPolicy",
    "solve_omega_first",
    "solve_omega_step",
    "compute_interval_schedule",
    "partition_recommend",
]
