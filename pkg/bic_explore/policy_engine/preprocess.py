from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..prior_model import DiscretePrior, PriorLike, ValidatedPrior, validate
from .engine import best_known_action
from .models import EpisodeDraw, InformationState


@dataclass(frozen=True)
class PositiveMeanPlan:
    """Sequential preamble over the nonnegative-mean actions 1..m, plus the residual instance.

    The residual treats "best of actions 1..m" as its action 1 and keeps
    actions m+1..k as its actions 2..k-m+1. Residual agent 1 is original agent m.
    """

    original: ValidatedPrior
    prefix: tuple[int, ...]
    residual: Optional[ValidatedPrior]

    @property
    def m(self) -> int:
        return 1 + len(self.prefix)

    @property
    def is_identity(self) -> bool:
        return not self.prefix

    def residual_time(self, t: int) -> int:
        return t - self.m + 1

    def original_action(self, residual_action: int, state: InformationState) -> int:
        if residual_action == 1:
            return self.best_prefix_action(state)
        return residual_action + self.m - 1

    def best_prefix_action(self, state: InformationState) -> int:
        prefix_view = InformationState(z=state.z[: self.m], t=state.t)
        return best_known_action(prefix_view)

    def residual_state(self, state: InformationState) -> InformationState:
        known = [value for value in state.z[: self.m] if value is not None]
        first = max(known) if len(known) == self.m else None
        return InformationState(z=(first,) + state.z[self.m :], t=self.residual_time(state.t))

    def residual_draw(self, draw: EpisodeDraw) -> EpisodeDraw:
        return EpisodeDraw(y=draw.y, x=(max(draw.x[: self.m]),) + draw.x[self.m :])


def preprocess_positive_means(prior: PriorLike) -> PositiveMeanPlan:
    vp = validate(prior, allow_positive_tail=True)
    prefix = tuple(j for j in range(2, vp.k + 1) if vp.mean(j) >= 0.0)
    if not prefix:
        return PositiveMeanPlan(original=vp, prefix=(), residual=vp)
    m = 1 + len(prefix)
    if m == vp.k:
        return PositiveMeanPlan(original=vp, prefix=prefix, residual=None)

    all_minus = math.prod(vp.minus(j) for j in prefix)
    zero = vp.p1_zero * all_minus
    if zero <= 0.0:
        # some prefix action is +1 surely, so the residual is never reached
        return PositiveMeanPlan(original=vp, prefix=prefix, residual=None)
    minus = vp.p1_minus * all_minus
    reduced = DiscretePrior(
        k=vp.k - m + 1,
        p1_plus=1.0 - zero - minus,
        p1_zero=zero,
        p1_minus=minus,
        p_plus=tuple(vp.plus(j) for j in range(m + 1, vp.k + 1)),
    )
    return PositiveMeanPlan(original=vp, prefix=prefix, residual=validate(reduced))


__all__ = ["PositiveMeanPlan", "preprocess_positive_means"]
