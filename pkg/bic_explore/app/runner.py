from __future__ import annotations

from dataclasses import replace
from typing import Callable

from .. import artifacts
from ..config import RunConfig, RuntimePaths, get_runtime_paths
from ..errors import InvalidValue, MissingKey
from ..exploration_rates import UNLIMITED, HorizonMode, compute_rate_schedule, welfare_horizon_bound
from ..logging_setup import get_logger
from ..partition_policy import PartitionSchedule, compute_interval_schedule
from ..policy_engine.enumeration import exact_rollouts
from ..policy_engine.policies import (
    AlwaysFirstPolicy,
    FullInformationPolicy,
    TablePolicy,
    greedy_policy,
    optimal_policy,
)
from ..prior_model import ValidatedPrior, validate
from ..protocols import RecommendationPolicy
from ..simulation import ComparisonRow, compare_policies, estimate_welfare, sample_trajectories
from ..verification.discrete import (
    PERTURBATION_MAX_ACTIONS,
    PERTURBATION_MAX_HORIZON,
    bic_audit,
    feasibility_audit,
    maximality_audit,
    min_time_check,
    perturbation_optimality_check,
    termination_audit,
)
from ..verification.models import TIGHTNESS_TOLERANCE, AuditReport
from ..verification.partition import ascending_order_check, partition_bic_audit, partition_dominance_check
from .report import RunOutcome, outcome_from_reports

logger = get_logger("runner")


def _horizon(config: RunConfig) -> int:
    if config.horizon is None:
        raise MissingKey(f"mode {config.mode!r} requires a horizon", field="horizon")
    return config.horizon


def _horizon_mode(config: RunConfig) -> HorizonMode:
    if config.limited_horizon:
        return HorizonMode.limited_to(_horizon(config))
    return UNLIMITED


def _discrete_prior(config: RunConfig) -> ValidatedPrior:
    if config.discrete is None:
        raise InvalidValue(f"mode {config.mode!r} needs a discrete prior", field="discrete")
    return validate(config.discrete.to_prior(), allow_positive_tail=True)


def _partition(config: RunConfig) -> PartitionSchedule:
    if config.continuous is None:
        raise InvalidValue(f"mode {config.mode!r} needs a continuous prior", field="continuous")
    return compute_interval_schedule(config.continuous.to_setting(), _horizon(config))


def _run_rates(config: RunConfig, paths: RuntimePaths) -> RunOutcome:
    schedule = compute_rate_schedule(_discrete_prior(config), _horizon_mode(config), config.rate_cap)
    artifacts.write_rates_csv(paths.rates_csv, schedule)
    return RunOutcome(mode=config.mode, exit_code=0, artifacts=(paths.rates_csv,))


def _run_partition(config: RunConfig, paths: RuntimePaths) -> RunOutcome:
    schedule = _partition(config)
    artifacts.write_partition_csv(paths.partition_csv, schedule)
    return RunOutcome(mode=config.mode, exit_code=0, artifacts=(paths.partition_csv,))


def _audit_schedule_file(config: RunConfig, vp: ValidatedPrior, horizon: int) -> list[AuditReport]:
    assert config.schedule_file is not None
    with open(config.schedule_file, "r", encoding="utf-8") as f:
        text = f.read()
    candidate = artifacts.parse_rates_csv(text, vp, mode=_horizon_mode(config))
    reports = [feasibility_audit(candidate, config.tolerance, config.prior_id)]
    if reports[0].passed:
        reports.append(bic_audit(TablePolicy(candidate), vp, horizon, config.tolerance, config.prior_id))
    else:
        logger.warning("schedule file %s exceeds its exploration-state mass; bic audit skipped", config.schedule_file)
    return reports


def _audit_discrete(config: RunConfig) -> list[AuditReport]:
    vp = _discrete_prior(config)
    horizon = _horizon(config)
    if config.schedule_file:
        return _audit_schedule_file(config, vp, horizon)

    schedule = compute_rate_schedule(vp, _horizon_mode(config), config.rate_cap)
    policy = TablePolicy(schedule)
    table = exact_rollouts(policy, vp, horizon)
    reports = [
        bic_audit(policy, vp, horizon, config.tolerance, config.prior_id, table=table),
        maximality_audit(schedule, TIGHTNESS_TOLERANCE, config.prior_id),
    ]
    if not config.limited_horizon and all(rho > 0.0 for rho in schedule.rhos.values()):
        settle = max(max(schedule.last_explorers.values()), vp.k)
        reports.append(termination_audit(policy, vp, settle, config.prior_id))
    reports.append(min_time_check(vp, horizon, seed=config.seed, tolerance=config.tolerance, prior_id=config.prior_id))

    ungated = compute_rate_schedule(vp, cap=config.rate_cap) if config.limited_horizon else schedule
    required = welfare_horizon_bound(ungated)
    if vp.k <= PERTURBATION_MAX_ACTIONS and required <= horizon <= PERTURBATION_MAX_HORIZON:
        reports.append(perturbation_optimality_check(vp, horizon, tolerance=config.tolerance, prior_id=config.prior_id))
    else:
        logger.info(
            "welfare perturbation check skipped: k=%d, T=%d (needs k <= %d and %d <= T <= %d)",
            vp.k,
            horizon,
            PERTURBATION_MAX_ACTIONS,
            required,
            PERTURBATION_MAX_HORIZON,
        )
    return reports


def _audit_continuous(config: RunConfig) -> list[AuditReport]:
    schedule = _partition(config)
    return [
        partition_bic_audit(schedule, TIGHTNESS_TOLERANCE, config.prior_id),
        ascending_order_check(schedule, config.x1_grid, config.prior_id),
        partition_dominance_check(schedule, grid_points=config.x1_grid, prior_id=config.prior_id),
    ]


def _run_audit(config: RunConfig, paths: RuntimePaths) -> RunOutcome:
    reports = _audit_continuous(config) if config.is_continuous else _audit_discrete(config)
    artifacts.write_audit_json(paths.audit_json, reports)
    return outcome_from_reports(config.mode, reports, [paths.audit_json])


def _run_simulate(config: RunConfig, paths: RuntimePaths) -> RunOutcome:
    vp = _discrete_prior(config)
    horizon = _horizon(config)
    policy = optimal_policy(vp, _horizon_mode(config), config.rate_cap)
    estimate = estimate_welfare(policy, vp, horizon, config.replications, config.seed)
    rows = (ComparisonRow.from_estimate(estimate),)
    trajectories = sample_trajectories(policy, vp, horizon, config.seed, config.trajectory_log_episodes)
    artifacts.write_results_csv(paths.results_csv, rows)
    artifacts.write_trajectories_csv(paths.trajectories_csv, trajectories)
    return RunOutcome(
        mode=config.mode,
        exit_code=0,
        artifacts=(paths.results_csv, paths.trajectories_csv),
        rows=rows,
        notes={"degenerate_ci": estimate.degenerate},
    )


def comparison_policies(config: RunConfig, vp: ValidatedPrior) -> list[RecommendationPolicy]:
    policies: list[RecommendationPolicy] = [optimal_policy(vp, _horizon_mode(config), config.rate_cap)]
    if not vp.positive_tail:
        policies.append(greedy_policy(vp))
    policies.extend([AlwaysFirstPolicy(), FullInformationPolicy()])
    return policies


def _run_compare(config: RunConfig, paths: RuntimePaths) -> RunOutcome:
    vp = _discrete_prior(config)
    rows = tuple(
        compare_policies(comparison_policies(config, vp), vp, _horizon(config), config.replications, config.seed)
    )
    artifacts.write_results_csv(paths.results_csv, rows)
    return RunOutcome(mode=config.mode, exit_code=0, artifacts=(paths.results_csv,), rows=rows)


MODE_HANDLERS: dict[str, Callable[[RunConfig, RuntimePaths], RunOutcome]] = {
    "rates": _run_rates,
    "partition": _run_partition,
    "audit": _run_audit,
    "simulate": _run_simulate,
    "compare": _run_compare,
}


def run(config: RunConfig) -> RunOutcome:
    """Run one mode, write its artifacts plus the normalized config; exit code 2 means an audit failed."""
    paths = get_runtime_paths(config.out_dir, create=True)
    logger.info("mode=%s prior=%s out=%s", config.mode, config.prior_id, paths.out_dir)
    outcome = MODE_HANDLERS[config.mode](config, paths)
    config.save(paths.run_config_json)
    return replace(outcome, artifacts=outcome.artifacts + (paths.run_config_json,))


__all__ = ["MODE_HANDLERS", "comparison_policies", "run"]
