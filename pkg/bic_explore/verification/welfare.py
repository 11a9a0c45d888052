from __future__ import annotations

import math
from typing import TYPE_CHECKING

from ..exploration_rates import RateSchedule
from ..policy_engine.enumeration import exact_rollouts
from ..prior_model import PriorLike

if TYPE_CHECKING:
    from ..protocols import RecommendationPolicy


def welfare_exact(policy: "RecommendationPolicy", prior: PriorLike, horizon: int) -> float:
    """E[sum of rewards of agents 1..T], exact over realization vectors and y-cells."""
    return exact_rollouts(policy, prior, horizon).welfare()


def welfare_closed_form(schedule: RateSchedule, horizon: int) -> float:
    """Welfare of the schedule's table policy from its rates alone.

    x_1 = +1 pays T. x_1 = -1 explores 2, 3, ... one per agent until a +1.
    x_1 = 0 earns 0 except where an explorer reveals x_j: +1 pays every agent
    from then on, -1 costs the explorer one unit.
    """
    vp = schedule.prior
    k = vp.k
    total = vp.p1_plus * horizon

    sequential = -1.0
    reach = 1.0
    for m in range(2, min(k, horizon) + 1):
        p = vp.plus(m)
        sequential += reach * (p * (horizon - m + 1) - (1.0 - p))
        reach *= 1.0 - p
    if horizon > k:
        sequential -= reach * (horizon - k)
    total += vp.p1_minus * sequential

    coordinated = []
    for j in range(2, k + 1):
        p = vp.plus(j)
        for t in range(j, min(horizon, schedule.horizon) + 1):
            rate = schedule.q(t, j)
            if rate > 0.0:
                coordinated.append(rate * (p * (horizon - t + 1) - (1.0 - p)))
    return total + math.fsum(coordinated)


__all__ = ["welfare_exact", "welfare_closed_form"]
