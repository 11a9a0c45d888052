from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..simulation import ComparisonRow
from ..verification.models import AuditReport, audit_exit_code


@dataclass(frozen=True)
class RunOutcome:
    mode: str
    exit_code: int
    artifacts: tuple[str, ...] = ()
    reports: tuple[AuditReport, ...] = ()
    rows: tuple[ComparisonRow, ...] = ()
    notes: dict[str, object] = field(default_factory=dict)


def outcome_from_reports(mode: str, reports: list[AuditReport], artifacts: list[str]) -> RunOutcome:
    return RunOutcome(mode=mode, exit_code=audit_exit_code(reports), artifacts=tuple(artifacts), reports=tuple(reports))


def _format_slack(value: float) -> str:
    return f"{value:.3e}"


def audit_lines(reports: tuple[AuditReport, ...]) -> list[str]:
    lines = []
    for report in reports:
        status = "PASS" if report.passed else "FAIL"
        lines.append(f"[{status}] {report.check} ({report.prior_id}): worst slack {_format_slack(report.worst_slack)}")
    failed = sum(1 for report in reports if not report.passed)
    lines.append(f"Summary: {len(reports) - failed}/{len(reports)} checks passed")
    return lines


def result_lines(rows: tuple[ComparisonRow, ...]) -> list[str]:
    return [
        f"{row.policy}: welfare {row.mean_welfare:.6f} [{row.ci_low:.6f}, {row.ci_high:.6f}], "
        f"terminal at {row.mean_terminal_t:.3f}, {row.reps} reps"
        for row in rows
    ]


def emit_outcome_text(outcome: RunOutcome, write: Callable[[str], None] = print) -> None:
    for line in result_lines(outcome.rows):
        write(line)
    if outcome.reports:
        for line in audit_lines(outcome.reports):
            write(line)
    for path in outcome.artifacts:
        write(path)


__all__ = ["RunOutcome", "outcome_from_reports", "audit_lines", "result_lines", "emit_outcome_text"]
