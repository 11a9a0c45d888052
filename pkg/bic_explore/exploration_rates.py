from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import ActionIndexError, InfeasibleRate, MassMismatch, NonTerminating, PositiveTailMean
from .logging_setup import get_logger
from .prior_model import PriorLike, ValidatedPrior, validate

DEFAULT_AGENT_CAP = 1_000_000
B_CLAMP_TOLERANCE = 1e-14
MASS_TOLERANCE = 1e-12
GATE_TOLERANCE = 1e-12
FEASIBILITY_TOLERANCE = 1e-12

OPTIMAL_LABEL = "optimal"
GREEDY_LABEL = "greedy"

logger = get_logger("rates")


@dataclass(frozen=True)
class HorizonMode:
    horizon: Optional[int] = None

    @property
    def limited(self) -> bool:
        return self.horizon is not None

    @property
    def label(self) -> str:
        return "unlimited" if self.horizon is None else f"limited({self.horizon})"

    @classmethod
    def unlimited(cls) -> "HorizonMode":
        return cls()

    @classmethod
    def limited_to(cls, horizon: int) -> "HorizonMode":
        if horizon < 1:
            raise ValueError(f"horizon must be positive, got {horizon}")
        return cls(horizon=horizon)


UNLIMITED = HorizonMode()


@dataclass(frozen=True)
class ExplorationMass:
    value: float
    theoretical: float
    truncated: bool = False


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class RateSchedule:
    """Exploration rates q_t^j with the A/B coefficients they were computed from.

    Arrays are indexed `[j, t]` with 1-based actions and agents; row 0, row 1
    and column 0 are unused zeros.
    """

    prior: ValidatedPrior
    rates: np.ndarray
    a_values: np.ndarray
    b_values: np.ndarray
    mode: HorizonMode = UNLIMITED
    label: str = OPTIMAL_LABEL
    maximal: bool = False
    _cumulative: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def k(self) -> int:
        return self.prior.k

    @property
    def horizon(self) -> int:
        return int(self.rates.shape[1]) - 1

    def _check(self, j: int) -> None:
        if not 2 <= j <= self.k:
            raise ActionIndexError(j, self.k)

    def q(self, t: int, j: int) -> float:
        self._check(j)
        if t < 1 or t > self.horizon:
            return 0.0
        return float(self.rates[j, t])

    def a(self, t: int, j: int) -> float:
        self._check(j)
        return float(self.a_values[j, t]) if 1 <= t <= self.horizon else 0.0

    def b(self, t: int, j: int) -> float:
        self._check(j)
        return float(self.b_values[j, t]) if 1 <= t <= self.horizon else 0.0

    def cumulative(self, j: int) -> np.ndarray:
        """Entry t-1 holds the sum of q_tau^j for tau <= t."""
        self._check(j)
        cached = self._cumulative.get(j)
        if cached is None:
            cached = _frozen(np.cumsum(self.rates[j, 1:]))
            self._cumulative[j] = cached
        return cached

    def prefix(self, j: int, t: int) -> float:
        """Sum of q_tau^j for tau < t."""
        if t <= 1:
            self._check(j)
            return 0.0
        cum = self.cumulative(j)
        return float(cum[min(t - 1, cum.size) - 1])

    def explored_mass(self, j: int) -> float:
        cum = self.cumulative(j)
        return float(cum[-1]) if cum.size else 0.0

    def rho(self, j: int) -> float:
        self._check(j)
        return self.prior.exploration_mass(j)

    def n(self, j: int) -> int:
        """Last agent with a positive exploration rate for j, or 0 if none."""
        self._check(j)
        positive = np.flatnonzero(self.rates[j] > 0.0)
        return int(positive[-1]) if positive.size else 0

    @property
    def last_explorers(self) -> dict[int, int]:
        return {j: self.n(j) for j in range(2, self.k + 1)}

    @property
    def rhos(self) -> dict[int, float]:
        return {j: self.rho(j) for j in range(2, self.k + 1)}

    @property
    def truncated(self) -> bool:
        return any(self.explored_mass(j) < self.rho(j) - MASS_TOLERANCE for j in range(2, self.k + 1))

    def infeasible_entries(self, tolerance: float = FEASIBILITY_TOLERANCE) -> list[tuple[int, int, float, float]]:
        """(t, j, q, B) for every rate above its exploration-state mass."""
        out: list[tuple[int, int, float, float]] = []
        for j in range(2, self.k + 1):
            for t in range(1, self.horizon + 1):
                rate = float(self.rates[j, t])
                bound = float(self.b_values[j, t])
                if rate < -tolerance or rate > bound + tolerance:
                    out.append((t, j, rate, bound))
        return out

    def export_rows(self) -> Iterator[tuple[int, int, float, float, float]]:
        """(t, j, q, A, B) for each positive rate plus the first zero row after it, ordered by t then j."""
        rows: list[tuple[int, int, float, float, float]] = []
        for j in range(2, self.k + 1):
            last = self.n(j)
            stop = last + 1 if last else j
            for t in range(j, min(stop, self.horizon) + 1):
                rate = float(self.rates[j, t])
                if rate > 0.0 or t == stop:
                    rows.append((t, j, rate, float(self.a_values[j, t]), float(self.b_values[j, t])))
        rows.sort(key=lambda row: (row[0], row[1]))
        return iter(rows)


def limited_horizon_gate(prior: PriorLike, j: int, t: int, horizon: int) -> bool:
    p = validate(prior, allow_positive_tail=True).plus(j)
    return (horizon - t + 2) * p >= 1.0 - GATE_TOLERANCE


def _require_negative_tail(prior: ValidatedPrior, j: int) -> float:
    if j < 2:
        raise ActionIndexError(j, prior.k)
    p = prior.plus(j)
    if p >= 0.5:
        raise PositiveTailMean(j, prior.mean(j))
    return p


def a_coeff(prior: PriorLike, rates_j: Sequence[float], j: int, t: int) -> float:
    """A_t^j from the prefix q_j^j, ..., q_{t-1}^j; `rates_j[tau]` holds q_tau^j."""
    vp = validate(prior, allow_positive_tail=True)
    p = _require_negative_tail(vp, j)
    if t < j:
        return 0.0
    own = float(sum(rates_j[tau] for tau in range(j, t)))
    return (2.0 * p * vp.minus_product(j) + p * own) / (1.0 - 2.0 * p)


def b_coeff(
    prior: PriorLike,
    rates_prev: Optional[Sequence[float]],
    rates_j: Sequence[float],
    j: int,
    t: int,
) -> float:
    """B_t^j: mass of exploration states for j at t not yet spent on earlier explorers."""
    vp = validate(prior, allow_positive_tail=True)
    if not 2 <= j <= vp.k:
        raise ActionIndexError(j, vp.k)
    if t < j:
        return 0.0
    own = float(sum(rates_j[tau] for tau in range(j, t)))
    if j == 2:
        value = vp.p1_zero - own
    else:
        if rates_prev is None:
            raise ValueError("rates of action j-1 are required for j >= 3")
        previous = float(sum(rates_prev[tau] for tau in range(j - 1, t)))
        value = vp.minus(j - 1) * previous - own
    return 0.0 if abs(value) <= B_CLAMP_TOLERANCE else value


def _clamp_b(value: float) -> float:
    return 0.0 if abs(value) <= B_CLAMP_TOLERANCE else value


def _prefix_sums(row: Sequence[float]) -> list[float]:
    """Entry t holds the sum of row[tau] for tau < t."""
    return [0.0, *itertools.accumulate(row)]


def _run_recurrence(
    prior: ValidatedPrior,
    cap: int,
    overrides: Optional[Mapping[tuple[int, int], float]] = None,
) -> tuple[dict[int, list[float]], dict[int, list[float]], dict[int, list[float]]]:
    """Row-recurrent q = min(A, B) per action; overrides force chosen (t, j) entries."""
    pending = dict(overrides or {})
    rates: dict[int, list[float]] = {}
    a_rows: dict[int, list[float]] = {}
    b_rows: dict[int, list[float]] = {}
    previous_last = 1
    for j in range(2, prior.k + 1):
        p = _require_negative_tail(prior, j)
        exploit_gain = 2.0 * p * prior.minus_product(j)
        denominator = 1.0 - 2.0 * p
        if j == 2:
            previous_prefix = [prior.p1_zero]
            previous_minus = 1.0
        else:
            previous_prefix = _prefix_sums(rates[j - 1])
            previous_minus = prior.minus(j - 1)

        def available(t: int) -> float:
            # exploration-state mass for j at agent t before j's own explorers are subtracted
            return previous_minus * previous_prefix[min(t, len(previous_prefix) - 1)]

        q_row = [0.0] * j
        a_row = [0.0] * j
        b_row = [0.0] * j
        own = 0.0
        t = j
        while True:
            if t > cap:
                raise NonTerminating(j, cap)
            a_value = (exploit_gain + p * own) / denominator
            b_value = _clamp_b(available(t) - own)
            rate = min(a_value, max(b_value, 0.0))
            forced = pending.pop((t, j), None)
            if forced is not None:
                if forced < 0.0 or forced > b_value + FEASIBILITY_TOLERANCE:
                    raise InfeasibleRate(t, j, forced, b_value)
                rate = float(forced)
            q_row.append(rate)
            a_row.append(a_value)
            b_row.append(b_value)
            own += rate
            if t >= previous_last and _clamp_b(available(t + 1) - own) <= 0.0:
                break
            if a_value <= 0.0 and own <= 0.0 and not any(key[1] == j for key in pending):
                # no exploitation gain to fund exploration (p_1^{-1} = 0)
                break
            t += 1

        q_row.append(0.0)
        a_row.append((exploit_gain + p * own) / denominator)
        b_row.append(max(_clamp_b(available(t + 1) - own), 0.0))
        positive = [tau for tau, rate in enumerate(q_row) if rate > 0.0]
        previous_last = positive[-1] if positive else 1
        rates[j], a_rows[j], b_rows[j] = q_row, a_row, b_row
        logger.debug("action %d: n=%d, explored mass %.15g", j, positive[-1] if positive else 0, own)

    for (t, j), forced in pending.items():
        if forced > FEASIBILITY_TOLERANCE:
            raise InfeasibleRate(t, j, forced, 0.0)
    return rates, a_rows, b_rows


def _to_matrix(k: int, rows: Mapping[int, Sequence[float]], width: int) -> np.ndarray:
    matrix = np.zeros((k + 1, width + 1), dtype=float)
    for j, row in rows.items():
        count = min(len(row), width + 1)
        matrix[j, :count] = row[:count]
    return matrix


def _schedule_from_rows(
    prior: ValidatedPrior,
    rates: Mapping[int, Sequence[float]],
    a_rows: Mapping[int, Sequence[float]],
    b_rows: Mapping[int, Sequence[float]],
    label: str,
    maximal: bool,
) -> RateSchedule:
    width = max(len(row) for row in rates.values()) - 1
    return RateSchedule(
        prior=prior,
        rates=_frozen(_to_matrix(prior.k, rates, width)),
        a_values=_frozen(_to_matrix(prior.k, a_rows, width)),
        b_values=_frozen(_to_matrix(prior.k, b_rows, width)),
        label=label,
        maximal=maximal,
    )


def _apply_horizon_gate(schedule: RateSchedule, horizon: int) -> RateSchedule:
    k = schedule.k
    width = horizon + 1
    rates = np.zeros((k + 1, width), dtype=float)
    a_values = np.zeros_like(rates)
    b_values = np.zeros_like(rates)
    copy = min(width, schedule.horizon + 1)
    rates[:, :copy] = schedule.rates[:, :copy]
    a_values[:, :copy] = schedule.a_values[:, :copy]
    b_values[:, :copy] = schedule.b_values[:, :copy]
    for j in range(2, k + 1):
        for t in range(1, horizon + 1):
            if not limited_horizon_gate(schedule.prior, j, t, horizon):
                gated = int(np.count_nonzero(rates[j, t:] > 0.0))
                rates[j, t:] = 0.0
                if gated:
                    logger.debug("action %d gated from agent %d (T=%d): %d rates zeroed", j, t, horizon, gated)
                break
    return RateSchedule(
        prior=schedule.prior,
        rates=_frozen(rates),
        a_values=_frozen(a_values),
        b_values=_frozen(b_values),
        mode=HorizonMode.limited_to(horizon),
        label=schedule.label,
        maximal=False,
    )


def compute_rate_schedule(
    prior: PriorLike,
    horizon_mode: HorizonMode = UNLIMITED,
    cap: int = DEFAULT_AGENT_CAP,
) -> RateSchedule:
    vp = validate(prior)
    if vp.positive_tail:
        first = next(j for j in range(2, vp.k + 1) if vp.mean(j) >= 0.0)
        raise PositiveTailMean(first, vp.mean(first))
    rates, a_rows, b_rows = _run_recurrence(vp, cap)
    schedule = _schedule_from_rows(vp, rates, a_rows, b_rows, OPTIMAL_LABEL, maximal=True)
    logger.info(
        "rate schedule: k=%d, n=%s, rho=%s",
        vp.k,
        schedule.last_explorers,
        {j: round(value, 12) for j, value in schedule.rhos.items()},
    )
    if horizon_mode.horizon is not None:
        return _apply_horizon_gate(schedule, horizon_mode.horizon)
    return schedule


def total_exploration_mass(schedule: RateSchedule, j: int) -> ExplorationMass:
    theoretical = schedule.rho(j)
    actual = schedule.explored_mass(j)
    if schedule.maximal:
        if abs(actual - theoretical) > MASS_TOLERANCE:
            raise MassMismatch(j, theoretical, actual)
        return ExplorationMass(value=theoretical, theoretical=theoretical, truncated=False)
    return ExplorationMass(value=actual, theoretical=theoretical, truncated=actual < theoretical - MASS_TOLERANCE)


def schedule_from_rates(
    prior: PriorLike,
    rates: Mapping[int, Sequence[float]] | np.ndarray,
    label: str,
    check_feasible: bool = True,
    mode: HorizonMode = UNLIMITED,
) -> RateSchedule:
    """Wrap arbitrary rates psi_t^j, recomputing A and B from their own prefixes."""
    vp = validate(prior)
    if isinstance(rates, np.ndarray):
        matrix = np.array(rates, dtype=float)
    else:
        width = max((len(row) - 1 for row in rates.values()), default=1)
        matrix = _to_matrix(vp.k, rates, max(width, 1))
    if matrix.shape[0] != vp.k + 1:
        raise ActionIndexError(matrix.shape[0] - 1, vp.k)
    matrix[:2, :] = 0.0
    matrix[:, 0] = 0.0
    width = matrix.shape[1]
    agents = np.arange(width)
    a_values = np.zeros_like(matrix)
    b_values = np.zeros_like(matrix)
    for j in range(2, vp.k + 1):
        p = _require_negative_tail(vp, j)
        active = agents >= j
        own_prefix = np.concatenate(([0.0], np.cumsum(matrix[j, :-1])))
        a_values[j] = np.where(active, (2.0 * p * vp.minus_product(j) + p * own_prefix) / (1.0 - 2.0 * p), 0.0)
        if j == 2:
            available = np.full(width, vp.p1_zero)
        else:
            available = vp.minus(j - 1) * np.concatenate(([0.0], np.cumsum(matrix[j - 1, :-1])))
        b_raw = available - own_prefix
        b_raw[np.abs(b_raw) <= B_CLAMP_TOLERANCE] = 0.0
        b_values[j] = np.where(active, b_raw, 0.0)
    schedule = RateSchedule(
        prior=vp,
        rates=_frozen(matrix),
        a_values=_frozen(a_values),
        b_values=_frozen(b_values),
        mode=mode,
        label=label,
        maximal=False,
    )
    if check_feasible:
        violations = schedule.infeasible_entries()
        if violations:
            t, j, rate, bound = violations[0]
            raise InfeasibleRate(t, j, rate, bound)
    return schedule


def zero_schedule(prior: PriorLike, label: str = GREEDY_LABEL) -> RateSchedule:
    vp = validate(prior)
    return schedule_from_rates(vp, np.zeros((vp.k + 1, vp.k + 1)), label)


def variant_schedule(
    prior: PriorLike,
    overrides: Mapping[tuple[int, int], float],
    label: str = "variant",
    cap: int = DEFAULT_AGENT_CAP,
) -> RateSchedule:
    """Force the listed (t, j) rates and re-maximize every other rate given the modified history."""
    vp = validate(prior)
    rates, a_rows, b_rows = _run_recurrence(vp, cap, overrides)
    return _schedule_from_rows(vp, rates, a_rows, b_rows, label, maximal=False)


def scaled_schedule(schedule: RateSchedule, factors: Mapping[int, float], label: str = "scaled") -> RateSchedule:
    """Multiply every rate of action j by factors[j] (missing actions keep factor 1)."""
    matrix = np.array(schedule.rates, dtype=float)
    for j, factor in factors.items():
        if not 2 <= j <= schedule.k:
            raise ActionIndexError(j, schedule.k)
        if not 0.0 <= factor <= 1.0:
            raise InfeasibleRate(0, j, factor, 1.0)
        matrix[j] *= factor
    return schedule_from_rates(schedule.prior, matrix, label, mode=schedule.mode)


def welfare_horizon_bound(schedule: RateSchedule) -> int:
    """Smallest T from which the schedule is welfare-optimal: ceil(1/p_k + n_k - 1)."""
    k = schedule.k
    return int(math.ceil(1.0 / schedule.prior.plus(k) + schedule.n(k) - 1 - 1e-12))


__all__ = [
    "HorizonMode",
    "UNLIMITED",
    "ExplorationMass",
    "RateSchedule",
    "a_coeff",
    "b_coeff",
    "compute_rate_schedule",
    "limited_horizon_gate",
    "total_exploration_mass",
    "schedule_from_rates",
    "zero_schedule",
    "variant_schedule",
    "scaled_schedule",
    "welfare_horizon_bound",
    "DEFAULT_AGENT_CAP",
    "OPTIMAL_LABEL",
    "GREEDY_LABEL",
]
