from __future__ import annotations

from collections import defaultdict
from typing import TYPE_CHECKING, Any, Optional, Sequence

import numpy as np
from scipy import optimize

from ..errors import HorizonTooShort, InfeasibleRate, InfeasibleState, ScaleExceeded
from ..exploration_rates import (
    RateSchedule,
    compute_rate_schedule,
    limited_horizon_gate,
    scaled_schedule,
    variant_schedule,
    welfare_horizon_bound,
)
from ..logging_setup import get_logger
from ..policy_engine.constants import KIND_EXPLORE, REWARD_MINUS, REWARD_ZERO
from ..policy_engine.engine import check_ordering, is_terminal
from ..policy_engine.enumeration import RolloutTable, exact_rollouts
from ..policy_engine.models import InformationState
from ..policy_engine.policies import TablePolicy
from ..prior_model import PriorLike, validate
from .models import (
    DEFAULT_AUDIT_TOLERANCE,
    PROBABILITY_FLOOR,
    TIGHTNESS_TOLERANCE,
    AuditReport,
    ConstraintSlack,
    build_report,
)

if TYPE_CHECKING:
    from ..protocols import RecommendationPolicy

PERTURBATION_MAX_ACTIONS = 3
PERTURBATION_MAX_HORIZON = 64
DEFAULT_GRID_STEP = 0.01
DEFAULT_GREEDY_ROUNDS = 2
MIN_TIME_SAMPLES = 200
BISECT_XTOL = 1e-15

logger = get_logger("verify")


def bic_slacks(table: RolloutTable) -> tuple[list[ConstraintSlack], dict[tuple[int, int], dict[str, Any]]]:
    """E[x_j - x_i | sigma_t = j] for every emitted (t, j) and every alternative i, plus one witness per (t, j)."""
    k = table.k
    mass: dict[tuple[int, int], float] = defaultdict(float)
    gaps: dict[tuple[int, int], np.ndarray] = {}
    witnesses: dict[tuple[int, int], dict[str, Any]] = {}
    for cell in table.cells:
        weight = cell.weight
        if weight <= 0.0:
            continue
        values = np.array((0.0,) + cell.x)
        for step in cell.steps:
            j = step.recommendation.action
            key = (step.t, j)
            mass[key] += weight
            acc = gaps.get(key)
            if acc is None:
                acc = np.zeros(k + 1)
                gaps[key] = acc
                witnesses[key] = {"state": step.state_before.label, "x": list(cell.x), "y": cell.y}
            acc += weight * (values[j] - values)
    slacks: list[ConstraintSlack] = []
    for (t, j), total in sorted(mass.items()):
        if total <= PROBABILITY_FLOOR:
            continue
        acc = gaps[(t, j)]
        for i in range(1, k + 1):
            if i != j:
                slacks.append(ConstraintSlack(t=t, j=j, i=i, slack=float(acc[i] / total)))
    return slacks, witnesses


def _bic_counterexample(slacks: list[ConstraintSlack], witnesses: dict[tuple[int, int], dict[str, Any]]) -> Optional[dict[str, Any]]:
    if not slacks:
        return None
    worst = min(slacks, key=lambda entry: entry.slack)
    return {"t": worst.t, "j": worst.j, "i": worst.i, "slack": worst.slack, **witnesses.get((worst.t, worst.j), {})}


def bic_audit(
    policy: "RecommendationPolicy",
    prior: PriorLike,
    horizon: int,
    tolerance: float = DEFAULT_AUDIT_TOLERANCE,
    prior_id: str = "prior",
    table: Optional[RolloutTable] = None,
) -> AuditReport:
    rollouts = table if table is not None else exact_rollouts(policy, prior, horizon)
    slacks, witnesses = bic_slacks(rollouts)
    report = build_report("bic", prior_id, slacks, tolerance, _bic_counterexample(slacks, witnesses), {"policy": policy.name})
    if not report.passed:
        logger.warning("bic audit failed for %s: worst slack %.3e at %s", policy.name, report.worst_slack, report.worst)
    return report


def _in_exploration_state(state: InformationState, j: int) -> bool:
    if state.value(1) != REWARD_ZERO or state.is_known(j):
        return False
    return all(state.value(i) == REWARD_MINUS for i in range(2, j))


def max_rate_by_bisection(gain: float, mass: float, loss: float) -> float:
    """Largest q in [0, mass] with gain + q * loss >= 0."""
    if mass <= PROBABILITY_FLOOR or gain <= 0.0:
        return 0.0

    def constraint(q: float) -> float:
        return gain + q * loss

    if constraint(mass) >= 0.0:
        return mass
    return float(optimize.bisect(constraint, 0.0, mass, xtol=BISECT_XTOL))


def maximality_audit(
    schedule: RateSchedule,
    tolerance: float = TIGHTNESS_TOLERANCE,
    prior_id: str = "prior",
) -> AuditReport:
    """Re-derive each q_t^j from enumerated state probabilities and compare.

    In limited-horizon mode the entries the horizon gate zeroes are not
    compared; they are counted in `notes["gated"]`.
    """
    vp = schedule.prior
    horizon = min(max(schedule.last_explorers.values()) + 1, schedule.horizon)
    table = exact_rollouts(TablePolicy(schedule), vp, horizon)
    limit = schedule.mode.horizon
    slacks: list[ConstraintSlack] = []
    worst_detail: dict[str, Any] = {}
    worst_gap = -1.0
    gated = 0
    for t in range(1, horizon + 1):
        for j in range(2, vp.k + 1):
            if limit is not None and not limited_horizon_gate(vp, j, t, limit):
                gated += 1
                continue
            gain = 0.0
            mass = 0.0
            loss_total = 0.0
            for cell in table.cells:
                step = cell.steps[t - 1]
                x_gap = cell.x[j - 1] - cell.x[0]
                if step.recommendation.action == j and step.recommendation.kind != KIND_EXPLORE:
                    gain += cell.weight * x_gap
                if _in_exploration_state(step.state_before, j):
                    mass += cell.weight
                    loss_total += cell.weight * x_gap
            loss = loss_total / mass if mass > PROBABILITY_FLOOR else 0.0
            oracle = max_rate_by_bisection(gain, mass, loss)
            rate = schedule.q(t, j)
            gap = abs(rate - oracle)
            slacks.append(ConstraintSlack(t=t, j=j, i=1, slack=-gap, detail=f"q={rate!r} oracle={oracle!r}"))
            if gap > worst_gap:
                worst_gap = gap
                worst_detail = {"t": t, "j": j, "q": rate, "oracle": oracle, "gain": gain, "mass": mass}
    return build_report("maximality", prior_id, slacks, tolerance, worst_detail, {"gated": gated})


def feasibility_audit(
    schedule: RateSchedule,
    tolerance: float = DEFAULT_AUDIT_TOLERANCE,
    prior_id: str = "prior",
) -> AuditReport:
    """Every rate must fit inside the exploration-state mass B of its own history."""
    slacks: list[ConstraintSlack] = []
    for j in range(2, schedule.k + 1):
        for t in range(1, schedule.horizon + 1):
            rate = schedule.q(t, j)
            if rate == 0.0 and schedule.b(t, j) >= 0.0:
                continue
            slacks.append(ConstraintSlack(t=t, j=j, i=0, slack=min(schedule.b(t, j) - rate, rate)))
    counterexample = None
    if slacks:
        worst = min(slacks, key=lambda entry: entry.slack)
        counterexample = {"t": worst.t, "j": worst.j, "rate": schedule.q(worst.t, worst.j), "bound": schedule.b(worst.t, worst.j)}
    return build_report("feasibility", prior_id, slacks, tolerance, counterexample, {"schedule": schedule.label})


def termination_audit(
    policy: "RecommendationPolicy",
    prior: PriorLike,
    horizon: int,
    prior_id: str = "prior",
    table: Optional[RolloutTable] = None,
) -> AuditReport:
    """Every enumerated trajectory is terminal by agent `horizon` + 1 and visits only ordered states."""
    rollouts = table if table is not None else exact_rollouts(policy, prior, horizon)
    slacks: list[ConstraintSlack] = []
    counterexample: Optional[dict[str, Any]] = None
    for cell in rollouts.cells:
        if cell.weight <= 0.0:
            continue
        try:
            for step in cell.steps:
                check_ordering(step.state_before)
            check_ordering(cell.final_state)
        except InfeasibleState as exc:
            slacks.append(ConstraintSlack(t=0, j=0, i=0, slack=-cell.weight, detail=str(exc)))
            if counterexample is None:
                counterexample = {"x": list(cell.x), "y": cell.y, "reason": str(exc)}
            continue
        terminal = is_terminal(cell.final_state)
        slacks.append(ConstraintSlack(t=horizon + 1, j=0, i=0, slack=0.0 if terminal else -cell.weight))
        if not terminal and counterexample is None:
            counterexample = {"x": list(cell.x), "y": cell.y, "state": cell.final_state.label}
    return build_report("termination", prior_id, slacks, 0.0, counterexample)


def _random_scaling(rng: np.random.Generator, k: int) -> dict[int, float]:
    factors = np.sort(rng.uniform(0.0, 1.0, size=k - 1))[::-1]
    return {j: float(factors[j - 2]) for j in range(2, k + 1)}


def min_time_check(
    prior: PriorLike,
    horizon: int,
    samples: int = MIN_TIME_SAMPLES,
    seed: int = 0,
    tolerance: float = DEFAULT_AUDIT_TOLERANCE,
    prior_id: str = "prior",
    candidates: Optional[Sequence[RateSchedule]] = None,
) -> AuditReport:
    """Pr[terminal by t] under the optimal table dominates every BIC candidate schedule."""
    vp = validate(prior)
    schedule = compute_rate_schedule(vp)
    baseline = exact_rollouts(TablePolicy(schedule), vp, horizon).terminal_profile()
    if candidates is None:
        rng = np.random.default_rng(seed)
        candidates = [
            scaled_schedule(schedule, _random_scaling(rng, vp.k), label=f"scaled-{index}") for index in range(samples)
        ]

    slacks: list[ConstraintSlack] = []
    rejected = 0
    strict = 0
    counterexample: Optional[dict[str, Any]] = None
    for index, candidate in enumerate(candidates):
        if candidate.infeasible_entries():
            rejected += 1
            continue
        table = exact_rollouts(TablePolicy(candidate), vp, horizon)
        bic, _witnesses = bic_slacks(table)
        if bic and min(entry.slack for entry in bic) < -tolerance:
            rejected += 1
            continue
        diff = baseline - table.terminal_profile()
        t_worst = int(np.argmin(diff)) + 1
        slacks.append(ConstraintSlack(t=t_worst, j=0, i=index, slack=float(diff[t_worst - 1]), detail=candidate.label))
        if np.any(diff > tolerance):
            strict += 1
        if diff[t_worst - 1] < -tolerance and counterexample is None:
            counterexample = {"candidate": candidate.label, "t": t_worst, "difference": float(diff[t_worst - 1])}
    notes = {"candidates": len(candidates), "rejected": rejected, "strict": strict}
    logger.debug("min-time check: %s", notes)
    return build_report("min_time", prior_id, slacks, tolerance, counterexample, notes)


def _evaluate_variant(
    prior: PriorLike,
    overrides: dict[tuple[int, int], float],
    horizon: int,
    label: str,
) -> Optional[tuple[RateSchedule, float, float]]:
    try:
        candidate = variant_schedule(prior, overrides, label=label)
    except InfeasibleRate:
        return None
    table = exact_rollouts(TablePolicy(candidate), prior, horizon)
    bic, _witnesses = bic_slacks(table)
    worst = min((entry.slack for entry in bic), default=0.0)
    return candidate, table.welfare(), worst


def perturbation_optimality_check(
    prior: PriorLike,
    horizon: int,
    grid_step: float = DEFAULT_GRID_STEP,
    rounds: int = DEFAULT_GREEDY_ROUNDS,
    tolerance: float = DEFAULT_AUDIT_TOLERANCE,
    prior_id: str = "prior",
) -> AuditReport:
    """No BIC rate perturbation on the grid around the optimal schedule raises exact welfare."""
    vp = validate(prior)
    if vp.k > PERTURBATION_MAX_ACTIONS:
        raise ScaleExceeded("k", vp.k, PERTURBATION_MAX_ACTIONS)
    schedule = compute_rate_schedule(vp)
    required = welfare_horizon_bound(schedule)
    if horizon < required:
        raise HorizonTooShort(horizon, required)
    if horizon > PERTURBATION_MAX_HORIZON:
        raise ScaleExceeded("horizon", horizon, PERTURBATION_MAX_HORIZON)

    base_welfare = exact_rollouts(TablePolicy(schedule), vp, horizon).welfare()
    coordinates = [
        (t, j) for j in range(2, vp.k + 1) for t in range(j, min(horizon, schedule.n(j) + 1) + 1)
    ]
    slacks: list[ConstraintSlack] = []
    counts = {"evaluated": 0, "infeasible": 0, "non_bic": 0}
    best: Optional[tuple[float, dict[tuple[int, int], float], RateSchedule]] = None
    counterexample: Optional[dict[str, Any]] = None

    def try_overrides(
        current: RateSchedule,
        base_overrides: dict[tuple[int, int], float],
        t: int,
        j: int,
        delta: float,
    ) -> Optional[tuple[float, dict[tuple[int, int], float], RateSchedule]]:
        nonlocal counterexample
        forced = current.q(t, j) + delta
        if forced < 0.0:
            if current.q(t, j) <= 0.0:
                return None
            forced = 0.0
        overrides = {**base_overrides, (t, j): forced}
        counts["evaluated"] += 1
        result = _evaluate_variant(vp, overrides, horizon, label=f"perturbed{sorted(overrides)}")
        if result is None:
            counts["infeasible"] += 1
            return None
        candidate, welfare, bic_worst = result
        if bic_worst < -tolerance:
            counts["non_bic"] += 1
            return None
        slacks.append(ConstraintSlack(t=t, j=j, i=0, slack=base_welfare - welfare, detail=f"overrides={overrides}"))
        if welfare > base_welfare + tolerance and counterexample is None:
            counterexample = {"overrides": {f"{key[0]},{key[1]}": value for key, value in overrides.items()}, "welfare": welfare, "baseline": base_welfare}
        return welfare, overrides, candidate

    for t, j in coordinates:
        for delta in (grid_step, -grid_step):
            outcome = try_overrides(schedule, {}, t, j, delta)
            if outcome is not None and (best is None or outcome[0] > best[0]):
                best = outcome

    for _round in range(max(rounds - 1, 0)):
        if best is None:
            break
        current_welfare, current_overrides, current_schedule = best
        improved = best
        for t, j in coordinates:
            if (t, j) in current_overrides:
                continue
            for delta in (grid_step, -grid_step):
                outcome = try_overrides(current_schedule, current_overrides, t, j, delta)
                if outcome is not None and outcome[0] > improved[0]:
                    improved = outcome
        if improved[0] <= current_welfare:
            break
        best = improved

    notes = {**counts, "baseline_welfare": base_welfare, "required_horizon": required}
    logger.info("perturbation check on %s: %s", prior_id, counts)
    return build_report("welfare_optimality", prior_id, slacks, tolerance, counterexample, notes)


__all__ = [
    "bic_slacks",
    "bic_audit",
    "max_rate_by_bisection",
    "maximality_audit",
    "feasibility_audit",
    "termination_audit",
    "min_time_check",
    "perturbation_optimality_check",
]
