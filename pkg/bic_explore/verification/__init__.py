from __future__ import annotations

from .discrete import (
    bic_audit,
    bic_slacks,
    feasibility_audit,
    max_rate_by_bisection,
    maximality_audit,
    min_time_check,
    perturbation_optimality_check,
    termination_audit,
)
from .dominance import compare_reveal, dominance_audit, reveal_difference, stochastic_dominance_compare
from .models import (
    DEFAULT_AUDIT_TOLERANCE,
    TIGHTNESS_TOLERANCE,
    VERDICT_A_DOMINATES,
    VERDICT_B_DOMINATES,
    VERDICT_EQUAL,
    VERDICT_INCOMPARABLE,
    AuditReport,
    ConstraintSlack,
    audit_exit_code,
    build_report,
)
from .partition import ascending_order_check, interval_slack, partition_bic_audit, partition_dominance_check
from .welfare import welfare_closed_form, welfare_exact

__all__ = [
    "DEFAULT_AUDIT_TOLERANCE",
    "TIGHTNESS_TOLERANCE",
    "VERDICT_A_DOMINATES",
    "VERDICT_B_DOMINATES",
    "VERDICT_EQUAL",
    "VERDICT_INCOMPARABLE",
    "AuditReport",
    "ConstraintSlack",
    "build_report",
    "audit_exit_code",
    "bic_slacks",
    "bic_audit",
    "max_rate_by_bisection",
    "maximality_audit",
    "feasibility_audit",
    "termination_audit",
    "min_time_check",
    "perturbation_optimality_check",
    "reveal_difference",
    "compare_reveal",
    "stochastic_dominance_compare",
    "dominance_audit",
    "welfare_exact",
    "welfare_closed_form",
    "interval_slack",
    "partition_bic_audit",
    "ascending_order_check",
    "partition_dominance_check",
]
