from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy import integrate

from .errors import (
    ActionIndexError,
    DegenerateK,
    NonStrictOrdering,
    PositiveTailMean,
    PriorShapeError,
    ProbabilityOutOfRange,
    ZeroSupport,
)

PROBABILITY_SUM_TOLERANCE = 1e-12
QUADRATURE_EPSABS = 1e-10
QUADRATURE_LIMIT = 200
SUPPORT_LOW = -1.0
SUPPORT_HIGH = 1.0
FIRST_ACTION_SUPPORT = (1, 0, -1)
TAIL_ACTION_SUPPORT = (1, -1)


@dataclass(frozen=True)
class DiscretePrior:
    k: int
    p1_plus: float
    p1_zero: float
    p1_minus: float
    p_plus: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_plus", tuple(float(p) for p in self.p_plus))

    @classmethod
    def from_lists(cls, p1: Sequence[float], p_plus: Sequence[float]) -> "DiscretePrior":
        plus, zero, minus = (float(p) for p in p1)
        return cls(k=len(p_plus) + 1, p1_plus=plus, p1_zero=zero, p1_minus=minus, p_plus=tuple(p_plus))

    @property
    def p1(self) -> tuple[float, float, float]:
        return (self.p1_plus, self.p1_zero, self.p1_minus)


@dataclass(frozen=True)
class ValidatedPrior:
    """A discrete prior that passed `validate`, with per-action means and p_j^{-1} cached.

    Tuples are indexed by action minus one, so `means[0]` is mu_1 and
    `p_minus[0]` is Pr[X_1 = -1].
    """

    prior: DiscretePrior
    means: tuple[float, ...]
    p_minus: tuple[float, ...]
    positive_tail: bool = False

    @property
    def k(self) -> int:
        return self.prior.k

    @property
    def p1_plus(self) -> float:
        return self.prior.p1_plus

    @property
    def p1_zero(self) -> float:
        return self.prior.p1_zero

    @property
    def p1_minus(self) -> float:
        return self.prior.p1_minus

    def _check(self, j: int) -> None:
        if not 1 <= j <= self.k:
            raise ActionIndexError(j, self.k)

    def mean(self, j: int) -> float:
        self._check(j)
        return self.means[j - 1]

    def plus(self, j: int) -> float:
        self._check(j)
        return self.prior.p1_plus if j == 1 else self.prior.p_plus[j - 2]

    def minus(self, j: int) -> float:
        self._check(j)
        return self.p_minus[j - 1]

    def minus_product(self, j: int) -> float:
        """Pr[X_1 = -1 and X_i = -1 for 2 <= i < j]."""
        self._check(j)
        return math.prod(self.p_minus[: j - 1])

    def exploration_mass(self, j: int) -> float:
        """rho_j = p_1^0 times the product of p_i^{-1} for 2 <= i < j; zero when X_1 = -1 is impossible."""
        self._check(j)
        if self.prior.p1_minus == 0.0:
            return 0.0
        return self.prior.p1_zero * math.prod(self.p_minus[1 : j - 1])


PriorLike = Union[DiscretePrior, ValidatedPrior]


def _base(prior: PriorLike) -> DiscretePrior:
    return prior.prior if isinstance(prior, ValidatedPrior) else prior


def mu(prior: PriorLike, j: int) -> float:
    base = _base(prior)
    if not 1 <= j <= base.k:
        raise ActionIndexError(j, base.k)
    if j == 1:
        return base.p1_plus - base.p1_minus
    return 2.0 * base.p_plus[j - 2] - 1.0


def _check_probability(field: str, value: float) -> None:
    if not math.isfinite(value) or value < 0.0 or value > 1.0:
        raise ProbabilityOutOfRange(field, value)


def validate(prior: PriorLike, allow_positive_tail: bool = False) -> ValidatedPrior:
    if isinstance(prior, ValidatedPrior):
        return prior
    if prior.k < 2:
        raise DegenerateK(prior.k)
    if len(prior.p_plus) != prior.k - 1:
        raise PriorShapeError(prior.k, len(prior.p_plus))

    _check_probability("p1_plus", prior.p1_plus)
    _check_probability("p1_zero", prior.p1_zero)
    _check_probability("p1_minus", prior.p1_minus)
    for j, p in enumerate(prior.p_plus, start=2):
        _check_probability(f"p_plus[{j}]", p)
    total = prior.p1_plus + prior.p1_zero + prior.p1_minus
    if abs(total - 1.0) > PROBABILITY_SUM_TOLERANCE:
        raise ProbabilityOutOfRange("p1", total, f"sums to {total!r}, expected 1")

    if prior.p1_zero == 0.0:
        raise ZeroSupport("p1_zero")
    for j, p in enumerate(prior.p_plus, start=2):
        if p == 0.0:
            raise ZeroSupport(f"p_plus[{j}]")

    means = tuple(mu(prior, j) for j in range(1, prior.k + 1))
    nonnegative = [j for j in range(2, prior.k + 1) if means[j - 1] >= 0.0]
    if nonnegative and not allow_positive_tail:
        first = nonnegative[0]
        raise PositiveTailMean(first, means[first - 1])
    for j in range(2, prior.k + 1):
        if means[j - 1] >= means[j - 2]:
            raise NonStrictOrdering(j, means[j - 2], means[j - 1])

    p_minus = (prior.p1_minus,) + tuple(1.0 - p for p in prior.p_plus)
    return ValidatedPrior(prior=prior, means=means, p_minus=p_minus, positive_tail=bool(nonnegative))


def _clip(x: float) -> float:
    return min(max(float(x), SUPPORT_LOW), SUPPORT_HIGH)


def partial_expectation_by_quadrature(
    cdf: Callable[[float], float],
    a: float,
    b: float,
    c: float,
    breakpoints: Sequence[float] = (),
) -> float:
    """Integral of (x - c) dF over [a, b], by parts: [(x - c) F] minus the integral of F."""
    lo, hi = _clip(a), _clip(b)
    if hi <= lo:
        return 0.0
    inner = [p for p in breakpoints if lo < p < hi]
    area, _error = integrate.quad(
        cdf,
        lo,
        hi,
        epsabs=QUADRATURE_EPSABS,
        limit=QUADRATURE_LIMIT,
        points=inner or None,
    )
    return (hi - c) * cdf(hi) - (lo - c) * cdf(lo) - area


class ContinuousPrior(ABC):
    """Full-support distribution of X_1 on [-1, 1]."""

    family: str = ""

    @abstractmethod
    def cdf(self, x: float) -> float: ...

    @abstractmethod
    def partial_expectation(self, a: float, b: float, c: float) -> float: ...

    @property
    def mean(self) -> float:
        return self.partial_expectation(SUPPORT_LOW, SUPPORT_HIGH, 0.0)

    def mass(self, a: float, b: float) -> float:
        lo, hi = _clip(a), _clip(b)
        return max(self.cdf(hi) - self.cdf(lo), 0.0) if hi > lo else 0.0

    def breakpoints(self) -> tuple[float, ...]:
        return ()


class UniformPrior(ContinuousPrior):
    family = "uniform"

    def cdf(self, x: float) -> float:
        return (_clip(x) + 1.0) / 2.0

    def partial_expectation(self, a: float, b: float, c: float) -> float:
        lo, hi = _clip(a), _clip(b)
        if hi <= lo:
            return 0.0
        return ((hi - c) ** 2 - (lo - c) ** 2) / 4.0

    @property
    def mean(self) -> float:
        return 0.0


def _check_cdf_table(knots: Sequence[float], values: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    xs = np.asarray(knots, dtype=float)
    fs = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or xs.size != fs.size:
        raise ProbabilityOutOfRange("cdf_values", float(fs.size), "knots and cdf_values must pair up, at least two")
    if xs[0] != SUPPORT_LOW or xs[-1] != SUPPORT_HIGH:
        raise ProbabilityOutOfRange("knots", float(xs[0]), "knots must start at -1 and end at 1")
    if np.any(np.diff(xs) <= 0.0):
        raise ProbabilityOutOfRange("knots", float(np.min(np.diff(xs))), "knots must strictly increase")
    if fs[0] != 0.0 or fs[-1] != 1.0:
        raise ProbabilityOutOfRange("cdf_values", float(fs[0]), "cdf must run from 0 to 1")
    if np.any(np.diff(fs) <= 0.0):
        raise ZeroSupport("cdf_values (flat segment)")
    return xs, fs


class PiecewiseLinearPrior(ContinuousPrior):
    family = "piecewise_linear"

    def __init__(self, knots: Sequence[float], cdf_values: Sequence[float]) -> None:
        self._knots, self._values = _check_cdf_table(knots, cdf_values)
        self._density = np.diff(self._values) / np.diff(self._knots)

    @property
    def knots(self) -> tuple[float, ...]:
        return tuple(float(x) for x in self._knots)

    @property
    def cdf_values(self) -> tuple[float, ...]:
        return tuple(float(f) for f in self._values)

    def cdf(self, x: float) -> float:
        return float(np.interp(_clip(x), self._knots, self._values))

    def partial_expectation(self, a: float, b: float, c: float) -> float:
        lo, hi = _clip(a), _clip(b)
        if hi <= lo:
            return 0.0
        left = np.maximum(self._knots[:-1], lo)
        right = np.minimum(self._knots[1:], hi)
        active = right > left
        pieces = self._density[active] * ((right[active] - c) ** 2 - (left[active] - c) ** 2) / 2.0
        return float(np.sum(pieces))

    def breakpoints(self) -> tuple[float, ...]:
        return self.knots[1:-1]


class QuadraturePrior(ContinuousPrior):
    """Any strictly increasing cdf; partial expectations come from adaptive quadrature."""

    family = "quadrature"
    _MONOTONE_CHECK_POINTS = 401

    def __init__(self, cdf: Callable[[float], float], breakpoints: Sequence[float] = ()) -> None:
        self._cdf = cdf
        self._breakpoints = tuple(float(p) for p in breakpoints)
        low, high = float(cdf(SUPPORT_LOW)), float(cdf(SUPPORT_HIGH))
        if abs(low) > PROBABILITY_SUM_TOLERANCE or abs(high - 1.0) > PROBABILITY_SUM_TOLERANCE:
            raise ProbabilityOutOfRange("cdf", low if abs(low) > PROBABILITY_SUM_TOLERANCE else high, "cdf(-1) must be 0 and cdf(1) must be 1")
        sampled = np.array([cdf(x) for x in np.linspace(SUPPORT_LOW, SUPPORT_HIGH, self._MONOTONE_CHECK_POINTS)])
        if np.any(np.diff(sampled) <= 0.0):
            raise ZeroSupport("cdf (not strictly increasing)")

    @classmethod
    def from_table(cls, knots: Sequence[float], cdf_values: Sequence[float]) -> "QuadraturePrior":
        xs, fs = _check_cdf_table(knots, cdf_values)
        return cls(lambda x: float(np.interp(_clip(x), xs, fs)), breakpoints=tuple(float(x) for x in xs[1:-1]))

    def cdf(self, x: float) -> float:
        return float(self._cdf(_clip(x)))

    def partial_expectation(self, a: float, b: float, c: float) -> float:
        return partial_expectation_by_quadrature(self.cdf, a, b, c, self._breakpoints)

    def breakpoints(self) -> tuple[float, ...]:
        return self._breakpoints


@dataclass(frozen=True)
class ContinuousSetting:
    """Continuous X_1 plus the two-point tail actions 2..k."""

    first: ContinuousPrior
    p_plus: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_plus", tuple(float(p) for p in self.p_plus))

    @property
    def k(self) -> int:
        return len(self.p_plus) + 1

    def _check(self, j: int) -> None:
        if not 1 <= j <= self.k:
            raise ActionIndexError(j, self.k)

    def mean(self, j: int) -> float:
        self._check(j)
        return self.first.mean if j == 1 else 2.0 * self.p_plus[j - 2] - 1.0

    def plus(self, j: int) -> float:
        self._check(j)
        if j == 1:
            raise ActionIndexError(j, self.k)
        return self.p_plus[j - 2]

    def minus(self, j: int) -> float:
        return 1.0 - self.plus(j)

    def tail_minus_product(self, j: int) -> float:
        """Product of p_n^{-1} for 2 <= n < j."""
        self._check(j)
        return math.prod(1.0 - p for p in self.p_plus[: max(j - 2, 0)])


def validate_setting(setting: ContinuousSetting) -> ContinuousSetting:
    if setting.k < 2:
        raise DegenerateK(setting.k)
    for j, p in enumerate(setting.p_plus, start=2):
        _check_probability(f"p_plus[{j}]", p)
        if p == 0.0:
            raise ZeroSupport(f"p_plus[{j}]")
        if p == 1.0:
            raise ProbabilityOutOfRange(f"p_plus[{j}]", p, "tail means must stay inside (-1, 1)")
    for j in range(2, setting.k + 1):
        previous, current = setting.mean(j - 1), setting.mean(j)
        if current >= previous:
            raise NonStrictOrdering(j, previous, current)
    return setting


__all__ = [
    "DiscretePrior",
    "ValidatedPrior",
    "PriorLike",
    "mu",
    "validate",
    "ContinuousPrior",
    "UniformPrior",
    "PiecewiseLinearPrior",
    "QuadraturePrior",
    "ContinuousSetting",
    "validate_setting",
    "partial_expectation_by_quadrature",
    "FIRST_ACTION_SUPPORT",
    "TAIL_ACTION_SUPPORT",
]
