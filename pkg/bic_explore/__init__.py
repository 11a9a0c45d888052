from __future__ import annotations

from importlib import import_module
from typing import TYPE_CHECKING, Any, Dict, Tuple

_MODULE_EXPORTS = {
    "app": "bic_explore.app",
    "verification": "bic_explore.verification",
    "policy_engine": "bic_explore.policy_engine",
}

_ATTR_EXPORTS: Dict[str, Tuple[str, str]] = {
    "main": ("bic_explore.app", "main"),
    "run": ("bic_explore.app.runner", "run"),
    "VERSION": ("bic_explore.config", "VERSION"),
    "APP_NAME": ("bic_explore.config", "APP_NAME"),
    "RunConfig": ("bic_explore.config", "RunConfig"),
    "parse_config": ("bic_explore.config", "parse_config"),
    "get_runtime_paths": ("bic_explore.config", "get_runtime_paths"),
    "consume_load_warnings": ("bic_explore.config", "consume_load_warnings"),
    "setup_logging": ("bic_explore.logging_setup", "setup_logging"),
    "DiscretePrior": ("bic_explore.prior_model", "DiscretePrior"),
    "ValidatedPrior": ("bic_explore.prior_model", "ValidatedPrior"),
    "validate": ("bic_explore.prior_model", "validate"),
    "mu": ("bic_explore.prior_model", "mu"),
    "UniformPrior": ("bic_explore.prior_model", "UniformPrior"),
    "PiecewiseLinearPrior": ("bic_explore.prior_model", "PiecewiseLinearPrior"),
    "QuadraturePrior": ("bic_explore.prior_model", "QuadraturePrior"),
    "ContinuousSetting": ("bic_explore.prior_model", "ContinuousSetting"),
    "RateSchedule": ("bic_explore.exploration_rates", "RateSchedule"),
    "HorizonMode": ("bic_explore.exploration_rates", "HorizonMode"),
    "compute_rate_schedule": ("bic_explore.exploration_rates", "compute_rate_schedule"),
    "total_exploration_mass": ("bic_explore.exploration_rates", "total_exploration_mass"),
    "variant_schedule": ("bic_explore.exploration_rates", "variant_schedule"),
    "scaled_schedule": ("bic_explore.exploration_rates", "scaled_schedule"),
    "explorer_index": ("bic_explore.coordinated_sampler", "explorer_index"),
    "recommendation_draw": ("bic_explore.coordinated_sampler", "recommendation_draw"),
    "InformationState": ("bic_explore.policy_engine", "InformationState"),
    "TablePolicy": ("bic_explore.policy_engine", "TablePolicy"),
    "optimal_policy": ("bic_explore.policy_engine", "optimal_policy"),
    "greedy_policy": ("bic_explore.policy_engine", "greedy_policy"),
    "exact_rollouts": ("bic_explore.policy_engine", "exact_rollouts"),
    "PartitionSchedule": ("bic_explore.partition_policy", "PartitionSchedule"),
    "compute_interval_schedule": ("bic_explore.partition_policy", "compute_interval_schedule"),
    "partition_recommend": ("bic_explore.partition_policy", "partition_recommend"),
    "AuditReport": ("bic_explore.verification", "AuditReport"),
    "bic_audit": ("bic_explore.verification", "bic_audit"),
    "maximality_audit": ("bic_explore.verification", "maximality_audit"),
    "welfare_exact": ("bic_explore.verification", "welfare_exact"),
    "run_episode": ("bic_explore.simulation", "run_episode"),
    "estimate_welfare": ("bic_explore.simulation", "estimate_welfare"),
    "compare_policies": ("bic_explore.simulation", "compare_policies"),
    "BicExploreError": ("bic_explore.errors", "BicExploreError"),
}

if TYPE_CHECKING:
    from . import app as app
    from . import policy_engine as policy_engine
    from . import verification as verification
    from .app import main
    from .app.runner import run
    from .config import (
        APP_NAME,
        VERSION,
        RunConfig,
        consume_load_warnings,
        get_runtime_paths,
        parse_config,
    )
    from .coordinated_sampler import explorer_index, recommendation_draw
    from .errors import BicExploreError
    from .exploration_rates import (
        HorizonMode,
        RateSchedule,
        compute_rate_schedule,
        scaled_schedule,
        total_exploration_mass,
        variant_schedule,
    )
    from .logging_setup import setup_logging
    from .partition_policy import PartitionSchedule, compute_interval_schedule, partition_recommend
    from .policy_engine import InformationState, TablePolicy, exact_rollouts, greedy_policy, optimal_policy
    from .prior_model import (
        ContinuousSetting,
        DiscretePrior,
        PiecewiseLinearPrior,
        QuadraturePrior,
        UniformPrior,
        ValidatedPrior,
        mu,
        validate,
    )
    from .simulation import compare_policies, estimate_welfare, run_episode
    from .verification import AuditReport, bic_audit, maximality_audit, welfare_exact
else:
    app: Any
    verification: Any
    policy_engine: Any

__all__ = [
    "app",
    "verification",
    "policy_engine",
    "main",
    "run",
    "VERSION",
    "APP_NAME",
    "RunConfig",
    "parse_config",
    "get_runtime_paths",
    "consume_load_warnings",
    "setup_logging",
    "DiscretePrior",
    "ValidatedPrior",
    "validate",
    "mu",
    "UniformPrior",
    "PiecewiseLinearPrior",
    "QuadraturePrior",
    "ContinuousSetting",
    "RateSchedule",
    "HorizonMode",
    "compute_rate_schedule",
    "total_exploration_mass",
    "variant_schedule",
    "scaled_schedule",
    "explorer_index",
    "recommendation_draw",
    "InformationState",
    "TablePolicy",
    "optimal_policy",
    "greedy_policy",
    "exact_rollouts",
    "PartitionSchedule",
    "compute_interval_schedule",
    "partition_recommend",
    "AuditReport",
    "bic_audit",
    "maximality_audit",
    "welfare_exact",
    "run_episode",
    "estimate_welfare",
    "compare_policies",
    "BicExploreError",
]


def __getattr__(name: str):
    module_name = _MODULE_EXPORTS.get(name)
    if module_name is not None:
        module = import_module(module_name)
        globals()[name] = module
        return module

    target = _ATTR_EXPORTS.get(name)
    if target is not None:
        source_module_name, source_attr_name = target
        source_module = import_module(source_module_name)
        value = getattr(source_module, source_attr_name)
        globals()[name] = value
        return value

    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__() -> list[str]:
    return sorted(set(globals().keys()) | set(__all__))
