from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable, Sequence

import numpy as np

from .config.storage import _atomic_write_text, _json_with_trailing_newline
from .errors import InvalidValue
from .exploration_rates import HorizonMode, RateSchedule, UNLIMITED, schedule_from_rates
from .partition_policy import PartitionSchedule
from .prior_model import PriorLike, validate
from .simulation import ComparisonRow, Trajectory
from .verification.models import AuditReport

RATES_HEADER = ("t", "j", "q", "A", "B")
PARTITION_HEADER = ("j", "t", "i_left", "i_right")
RESULTS_HEADER = ("policy", "mean_welfare", "ci_low", "ci_high", "mean_terminal_t", "reps", "seed")
TRAJECTORY_HEADER = ("episode", "t", "state_before", "sigma", "kind", "reward")


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _g15(value: float) -> str:
    return format(float(value), ".15g")


def rates_csv_text(schedule: RateSchedule) -> str:
    return _csv_text(RATES_HEADER, ((t, j, repr(q), repr(a), repr(b)) for t, j, q, a, b in schedule.export_rows()))


def partition_csv_text(schedule: PartitionSchedule) -> str:
    return _csv_text(
        PARTITION_HEADER,
        ((j, t, _g15(left), _g15(right)) for j, t, left, right in schedule.export_rows()),
    )


def results_csv_text(rows: Sequence[ComparisonRow]) -> str:
    return _csv_text(
        RESULTS_HEADER,
        (
            (row.policy, repr(row.mean_welfare), repr(row.ci_low), repr(row.ci_high), repr(row.mean_terminal_t), row.reps, row.seed)
            for row in rows
        ),
    )


def trajectories_csv_text(trajectories: Sequence[Trajectory]) -> str:
    return _csv_text(
        TRAJECTORY_HEADER,
        (
            (
                trajectory.episode,
                step.t,
                step.state_before.label,
                step.recommendation.action,
                step.recommendation.kind,
                repr(step.reward),
            )
            for trajectory in trajectories
            for step in trajectory.steps
        ),
    )


def audit_json_text(reports: Sequence[AuditReport]) -> str:
    return _json_with_trailing_newline(json.dumps([report.payload() for report in reports], indent=2))


def write_rates_csv(path: str, schedule: RateSchedule) -> None:
    _atomic_write_text(path, rates_csv_text(schedule))


def write_partition_csv(path: str, schedule: PartitionSchedule) -> None:
    _atomic_write_text(path, partition_csv_text(schedule))


def write_results_csv(path: str, rows: Sequence[ComparisonRow]) -> None:
    _atomic_write_text(path, results_csv_text(rows))


def write_trajectories_csv(path: str, trajectories: Sequence[Trajectory]) -> None:
    _atomic_write_text(path, trajectories_csv_text(trajectories))


def write_audit_json(path: str, reports: Sequence[AuditReport]) -> None:
    _atomic_write_text(path, audit_json_text(reports))


def parse_rates_csv(
    text: str,
    prior: PriorLike,
    label: str = "schedule_file",
    mode: HorizonMode = UNLIMITED,
) -> RateSchedule:
    """Rates file in the export format; unlisted (t, j) are zero. Feasibility is left to the audits."""
    vp = validate(prior)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(cell.strip() for cell in header) != RATES_HEADER:
        raise InvalidValue(f"expected header {','.join(RATES_HEADER)}", field=label, line=1)
    entries: list[tuple[int, int, float]] = []
    for line, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != len(RATES_HEADER):
            raise InvalidValue(f"expected {len(RATES_HEADER)} columns, got {len(row)}", field=label, line=line)
        try:
            t, j, q = int(row[0]), int(row[1]), float(row[2])
        except ValueError as exc:
            raise InvalidValue(str(exc), field=label, line=line) from exc
        if not 2 <= j <= vp.k or t < 1:
            raise InvalidValue(f"(t={t}, j={j}) outside the prior's actions", field=label, line=line)
        if not np.isfinite(q):
            raise InvalidValue(f"rate {q!r} is not finite", field=label, line=line)
        entries.append((t, j, q))
    width = max((t for t, _j, _q in entries), default=vp.k) + 2
    matrix = np.zeros((vp.k + 1, width))
    for t, j, q in entries:
        matrix[j, t] = q
    return schedule_from_rates(vp, matrix, label, check_feasible=False, mode=mode)


__all__ = [
    "RATES_HEADER",
    "PARTITION_HEADER",
    "RESULTS_HEADER",
    "TRAJECTORY_HEADER",
    "rates_csv_text",
    "partition_csv_text",
    "results_csv_text",
    "trajectories_csv_text",
    "audit_json_text",
    "write_rates_csv",
    "write_partition_csv",
    "write_results_csv",
    "write_trajectories_csv",
    "write_audit_json",
    "parse_rates_csv",
]
