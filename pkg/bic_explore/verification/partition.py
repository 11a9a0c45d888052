from __future__ import annotations

from typing import Any, Optional

import numpy as np

from ..errors import InfeasibleState, OverlapDetected
from ..logging_setup import get_logger
from ..partition_policy import PartitionPolicy, PartitionSchedule
from ..policy_engine.engine import rollout
from ..policy_engine.models import EpisodeDraw
from ..prior_model import SUPPORT_HIGH, SUPPORT_LOW, partial_expectation_by_quadrature
from .models import TIGHTNESS_TOLERANCE, AuditReport, ConstraintSlack, build_report

DEFAULT_GRID_POINTS = 2001
DEFAULT_SHRINK_FACTOR = 0.5
INTERIOR_MARGIN = 1e-12

logger = get_logger("verify")


def _pe(schedule: PartitionSchedule, a: float, b: float, c: float) -> float:
    first = schedule.setting.first
    return partial_expectation_by_quadrature(first.cdf, a, b, c, first.breakpoints())


def interval_slack(schedule: PartitionSchedule, j: int, t: int) -> float:
    """BIC slack of recommending j to agent t over x_1 in (i_t^j, i_{t+1}^j], by generic quadrature."""
    setting = schedule.setting
    mean = setting.mean(j)
    left, right = schedule.interval(j, t)
    if t == j:
        exploit_gain = setting.tail_minus_product(j) * -_pe(schedule, SUPPORT_LOW, mean, mean)
        return exploit_gain - _pe(schedule, max(mean, left), right, mean)
    plus_gain = setting.plus(j) * -_pe(schedule, SUPPORT_LOW, left, 1.0)
    return plus_gain - _pe(schedule, left, right, mean)


def partition_bic_audit(
    schedule: PartitionSchedule,
    tolerance: float = TIGHTNESS_TOLERANCE,
    prior_id: str = "prior",
) -> AuditReport:
    """Slack of every nonempty interval; intervals ending strictly inside (-1, 1) must also be tight."""
    slacks: list[ConstraintSlack] = []
    loose: list[ConstraintSlack] = []
    for j, t, left, right in schedule.nonempty_intervals():
        slack = interval_slack(schedule, j, t)
        entry = ConstraintSlack(t=t, j=j, i=1, slack=slack, detail=f"({left!r}, {right!r}]")
        slacks.append(entry)
        if right < SUPPORT_HIGH - INTERIOR_MARGIN and abs(slack) > tolerance:
            # interior endpoints are roots, so their constraint must bind
            loose.append(ConstraintSlack(t=t, j=j, i=1, slack=-abs(slack), detail=f"loose root {entry.detail}"))

    counterexample: Optional[dict[str, Any]] = None
    candidates = loose or slacks
    if candidates:
        worst = min(candidates, key=lambda item: item.slack)
        counterexample = {"t": worst.t, "j": worst.j, "interval": worst.detail, "slack": worst.slack}
    report = build_report(
        "partition_bic",
        prior_id,
        slacks + loose,
        tolerance,
        counterexample,
        {"intervals": len(slacks), "loose_roots": len(loose)},
    )
    if not report.passed:
        logger.warning("partition bic audit failed: worst slack %.3e at %s", report.worst_slack, report.worst)
    return report


def x1_grid(points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Evenly spaced x_1 values on (-1, 1]; -1 itself carries no mass."""
    return np.linspace(SUPPORT_LOW, SUPPORT_HIGH, max(int(points), 2))[1:]


def _tail_vectors(k: int) -> list[tuple[float, ...]]:
    """All-minus tails plus one +1 at each position; later values never matter after a +1."""
    vectors = [tuple([-1.0] * (k - 1))]
    for position in range(k - 1):
        vectors.append(tuple(-1.0 if n != position else 1.0 for n in range(k - 1)))
    return vectors


def first_reveal_times(schedule: PartitionSchedule, x1: float, tails: tuple[float, ...]) -> dict[int, int]:
    """Agent index that first plays each tail action; missing actions stay unplayed through the horizon."""
    steps, _final = rollout(PartitionPolicy(schedule), EpisodeDraw(y=0.5, x=(float(x1),) + tails), schedule.horizon)
    times: dict[int, int] = {}
    for step in steps:
        action = step.recommendation.action
        if action >= 2 and action not in times:
            times[action] = step.t
    return times


def ascending_order_check(
    schedule: PartitionSchedule,
    grid_points: int = DEFAULT_GRID_POINTS,
    prior_id: str = "prior",
) -> AuditReport:
    """On an x_1 grid, actions are first played in ascending index order and none is skipped."""
    slacks: list[ConstraintSlack] = []
    counterexample: Optional[dict[str, Any]] = None
    checked = 0
    for x1 in x1_grid(grid_points):
        for tails in _tail_vectors(schedule.k):
            checked += 1
            try:
                times = first_reveal_times(schedule, float(x1), tails)
            except (OverlapDetected, InfeasibleState) as exc:
                slacks.append(ConstraintSlack(t=0, j=0, i=0, slack=-1.0, detail=str(exc)))
                if counterexample is None:
                    counterexample = {"x1": float(x1), "tails": list(tails), "reason": str(exc)}
                continue
            played = sorted(times)
            ordered = played == list(range(2, 2 + len(played)))
            ordered = ordered and all(times[a] < times[b] for a, b in zip(played, played[1:]))
            if not ordered:
                slacks.append(ConstraintSlack(t=0, j=played[0] if played else 0, i=0, slack=-1.0))
                if counterexample is None:
                    counterexample = {"x1": float(x1), "tails": list(tails), "first_played": {str(j): t for j, t in times.items()}}
    if not slacks:
        slacks.append(ConstraintSlack(t=0, j=0, i=0, slack=0.0))
    return build_report("ascending_order", prior_id, slacks, 0.0, counterexample, {"rollouts": checked})


def partition_dominance_check(
    schedule: PartitionSchedule,
    factor: float = DEFAULT_SHRINK_FACTOR,
    grid_points: int = DEFAULT_GRID_POINTS,
    prior_id: str = "prior",
) -> AuditReport:
    """Conditioned on x_1, the solved partition reveals each action no later than a shrunk partition."""
    other = schedule.shrunk(factor)
    never = schedule.horizon + 1
    slacks: list[ConstraintSlack] = []
    counterexample: Optional[dict[str, Any]] = None
    strict = 0
    tails = _tail_vectors(schedule.k)[0]
    for x1 in x1_grid(grid_points):
        mine = first_reveal_times(schedule, float(x1), tails)
        theirs = first_reveal_times(other, float(x1), tails)
        for j in range(2, schedule.k + 1):
            gap = theirs.get(j, never) - mine.get(j, never)
            if gap > 0:
                strict += 1
            if gap < 0 and counterexample is None:
                counterexample = {"x1": float(x1), "j": j, "solved": mine.get(j, never), "shrunk": theirs.get(j, never)}
            slacks.append(ConstraintSlack(t=mine.get(j, never), j=j, i=0, slack=float(gap)))
    notes = {"factor": factor, "strict": strict}
    return build_report("partition_dominance", prior_id, slacks, 0.0, counterexample, notes)


__all__ = [
    "interval_slack",
    "partition_bic_audit",
    "x1_grid",
    "first_reveal_times",
    "ascending_order_check",
    "partition_dominance_check",
]
