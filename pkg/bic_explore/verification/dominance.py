from __future__ import annotations

from typing import TYPE_CHECKING, Any, Optional

import numpy as np

from ..logging_setup import get_logger
from ..policy_engine.enumeration import RolloutTable, exact_rollouts
from ..prior_model import PriorLike, validate
from .models import (
    VERDICT_A_DOMINATES,
    VERDICT_B_DOMINATES,
    VERDICT_EQUAL,
    VERDICT_INCOMPARABLE,
    AuditReport,
    ConstraintSlack,
    build_report,
)

if TYPE_CHECKING:
    from ..protocols import RecommendationPolicy

DOMINANCE_TOLERANCE = 1e-12

logger = get_logger("verify")


def reveal_difference(first: RolloutTable, second: RolloutTable) -> np.ndarray:
    """Pr[x_j revealed before t] under `first` minus under `second`, rows t = 1..T+1, columns j = 2..k."""
    if first.horizon != second.horizon or first.k != second.k:
        raise ValueError(
            f"tables disagree on shape: T={first.horizon}/{second.horizon}, k={first.k}/{second.k}"
        )
    diff = first.reveal_probabilities() - second.reveal_probabilities()
    return diff[1:, 2:]


def compare_reveal(first: RolloutTable, second: RolloutTable, tolerance: float = DOMINANCE_TOLERANCE) -> str:
    diff = reveal_difference(first, second)
    if diff.size == 0 or np.all(np.abs(diff) <= tolerance):
        return VERDICT_EQUAL
    if np.all(diff >= -tolerance):
        return VERDICT_A_DOMINATES
    if np.all(diff <= tolerance):
        return VERDICT_B_DOMINATES
    return VERDICT_INCOMPARABLE


def stochastic_dominance_compare(
    policy_a: "RecommendationPolicy",
    policy_b: "RecommendationPolicy",
    prior: PriorLike,
    horizon: int,
    tolerance: float = DOMINANCE_TOLERANCE,
) -> str:
    vp = validate(prior, allow_positive_tail=True)
    verdict = compare_reveal(
        exact_rollouts(policy_a, vp, horizon),
        exact_rollouts(policy_b, vp, horizon),
        tolerance,
    )
    logger.debug("dominance %s vs %s over T=%d: %s", policy_a.name, policy_b.name, horizon, verdict)
    return verdict


def dominance_audit(
    policy_a: "RecommendationPolicy",
    policy_b: "RecommendationPolicy",
    prior: PriorLike,
    horizon: int,
    tolerance: float = DOMINANCE_TOLERANCE,
    prior_id: str = "prior",
) -> AuditReport:
    """Passes when `policy_a` reveals every action weakly earlier than `policy_b`."""
    vp = validate(prior, allow_positive_tail=True)
    first = exact_rollouts(policy_a, vp, horizon)
    second = exact_rollouts(policy_b, vp, horizon)
    diff = reveal_difference(first, second)
    slacks = [
        ConstraintSlack(t=row + 1, j=column + 2, i=0, slack=float(diff[row, column]))
        for row in range(diff.shape[0])
        for column in range(diff.shape[1])
    ]
    counterexample: Optional[dict[str, Any]] = None
    if slacks:
        worst = min(slacks, key=lambda entry: entry.slack)
        counterexample = {"t": worst.t, "j": worst.j, "difference": worst.slack, "against": policy_b.name}
    verdict = compare_reveal(first, second, tolerance)
    return build_report(
        "dominance",
        prior_id,
        slacks,
        tolerance,
        counterexample,
        {"verdict": verdict, "policy": policy_a.name, "against": policy_b.name},
    )


__all__ = [
    "DOMINANCE_TOLERANCE",
    "reveal_difference",
    "compare_reveal",
    "stochastic_dominance_compare",
    "dominance_audit",
]
