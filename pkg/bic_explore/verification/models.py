from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

VERDICT_A_DOMINATES = "A_dominates"
VERDICT_B_DOMINATES = "B_dominates"
VERDICT_INCOMPARABLE = "incomparable"
VERDICT_EQUAL = "equal"

DEFAULT_AUDIT_TOLERANCE = 1e-9
TIGHTNESS_TOLERANCE = 1e-8
PROBABILITY_FLOOR = 1e-15


@dataclass(frozen=True)
class ConstraintSlack:
    """One checked constraint: agent t, recommended/target action j, alternative i (0 when not applicable)."""

    t: int
    j: int
    i: int
    slack: float
    detail: str = ""


@dataclass(frozen=True)
class AuditReport:
    check: str
    prior_id: str
    worst_slack: float
    passed: bool
    slacks: tuple[ConstraintSlack, ...] = ()
    counterexample: Optional[dict[str, Any]] = None
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def worst(self) -> Optional[ConstraintSlack]:
        if not self.slacks:
            return None
        return min(self.slacks, key=lambda entry: entry.slack)

    def payload(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "check": self.check,
            "prior_id": self.prior_id,
            "worst_slack": _finite_or_none(self.worst_slack),
            "pass": self.passed,
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


def build_report(
    check: str,
    prior_id: str,
    slacks: list[ConstraintSlack],
    tolerance: float,
    counterexample: Optional[dict[str, Any]] = None,
    notes: Optional[dict[str, Any]] = None,
) -> AuditReport:
    """pass is exactly worst_slack >= -tolerance; an empty slack list passes with worst_slack = +inf."""
    worst = min((entry.slack for entry in slacks), default=math.inf)
    passed = worst >= -tolerance
    return AuditReport(
        check=check,
        prior_id=prior_id,
        worst_slack=worst,
        passed=passed,
        slacks=tuple(slacks),
        counterexample=None if passed else counterexample,
        notes=dict(notes or {}),
    )


def audit_exit_code(reports: list[AuditReport]) -> int:
    return 2 if any(not report.passed for report in reports) else 0


__all__ = [
    "VERDICT_A_DOMINATES",
    "VERDICT_B_DOMINATES",
    "VERDICT_INCOMPARABLE",
    "VERDICT_EQUAL",
    "DEFAULT_AUDIT_TOLERANCE",
    "TIGHTNESS_TOLERANCE",
    "ConstraintSlack",
    "AuditReport",
    "build_report",
    "audit_exit_code",
]
