from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Any, Optional

from ..errors import ConflictingPrior, InvalidValue, MissingKey
from ..exploration_rates import DEFAULT_AGENT_CAP
from ..prior_model import (
    ContinuousPrior,
    ContinuousSetting,
    DiscretePrior,
    PiecewiseLinearPrior,
    QuadraturePrior,
    UniformPrior,
)
from .paths import DEFAULT_OUT_DIRNAME
from .storage import (
    _atomic_write_text,
    _clamp_float,
    _clamp_int,
    _expect_bool,
    _expect_float,
    _expect_float_list,
    _expect_int,
    _expect_object,
    _expect_str,
    _json_with_trailing_newline,
    _line_of_key,
    _load_json_object,
    _parse_json_object,
    _reject_unknown_keys,
)

MODES = ("rates", "partition", "simulate", "audit", "compare")
DISCRETE_MODES = ("rates", "simulate", "compare")
CONTINUOUS_MODES = ("partition",)
CONTINUOUS_FAMILIES = ("uniform", "piecewise_linear", "quadrature")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

TOLERANCE_MIN = 1e-15
TOLERANCE_MAX = 1e-3
X1_GRID_MIN = 3

_TOP_KEYS = (
    "mode",
    "discrete",
    "continuous",
    "horizon",
    "limited_horizon",
    "seed",
    "replications",
    "tolerance",
    "rate_cap",
    "x1_grid",
    "schedule_file",
    "out_dir",
    "log_level",
    "trajectory_log_episodes",
    "prior_id",
)
_DISCRETE_KEYS = ("k", "p1", "p_plus")
_CONTINUOUS_KEYS = ("family", "params", "p_plus")
_PARAM_KEYS = ("knots", "cdf_values")

U64_MAX = (1 << 64) - 1


def _require(raw: dict[str, Any], key: str, prefix: str, text: str | None) -> Any:
    if key not in raw:
        field_name = f"{prefix}.{key}" if prefix else key
        raise MissingKey("required key is missing", field=field_name, line=_line_of_key(text, prefix.rsplit(".", 1)[-1] if prefix else key))
    return raw[key]


@dataclass(frozen=True)
class DiscretePriorSpec:
    k: int
    p1: tuple[float, float, float]
    p_plus: tuple[float, ...]

    def to_prior(self) -> DiscretePrior:
        plus, zero, minus = self.p1
        return DiscretePrior(k=self.k, p1_plus=plus, p1_zero=zero, p1_minus=minus, p_plus=self.p_plus)

    def to_mapping(self) -> dict[str, Any]:
        return {"k": self.k, "p1": list(self.p1), "p_plus": list(self.p_plus)}

    @classmethod
    def from_mapping(cls, raw: Any, text: str | None = None) -> "DiscretePriorSpec":
        block = _expect_object(raw, "discrete", text)
        _reject_unknown_keys(block, _DISCRETE_KEYS, "discrete", text)
        k = _expect_int(_require(block, "k", "discrete", text), "discrete.k", text)
        p1 = _expect_float_list(_require(block, "p1", "discrete", text), "discrete.p1", text)
        if len(p1) != 3:
            raise InvalidValue(
                f"p1 must list [plus, zero, minus], got {len(p1)} values",
                field="discrete.p1",
                line=_line_of_key(text, "p1"),
            )
        p_plus = _expect_float_list(_require(block, "p_plus", "discrete", text), "discrete.p_plus", text)
        return cls(k=k, p1=(p1[0], p1[1], p1[2]), p_plus=p_plus)


@dataclass(frozen=True)
class ContinuousPriorSpec:
    family: str
    p_plus: tuple[float, ...]
    knots: Optional[tuple[float, ...]] = None
    cdf_values: Optional[tuple[float, ...]] = None

    def to_first(self) -> ContinuousPrior:
        if self.family == "uniform":
            return UniformPrior()
        knots = self.knots or ()
        values = self.cdf_values or ()
        if self.family == "piecewise_linear":
            return PiecewiseLinearPrior(knots, values)
        return QuadraturePrior.from_table(knots, values)

    def to_setting(self) -> ContinuousSetting:
        return ContinuousSetting(first=self.to_first(), p_plus=self.p_plus)

    def to_mapping(self) -> dict[str, Any]:
        params: dict[str, Any] = {}
        if self.knots is not None:
            params["knots"] = list(self.knots)
        if self.cdf_values is not None:
            params["cdf_values"] = list(self.cdf_values)
        return {"family": self.family, "params": params, "p_plus": list(self.p_plus)}

    @classmethod
    def from_mapping(cls, raw: Any, text: str | None = None) -> "ContinuousPriorSpec":
        block = _expect_object(raw, "continuous", text)
        _reject_unknown_keys(block, _CONTINUOUS_KEYS, "continuous", text)
        family = _expect_str(_require(block, "family", "continuous", text), "continuous.family", text)
        if family not in CONTINUOUS_FAMILIES:
            raise InvalidValue(
                f"unknown family {family!r}; expected one of {', '.join(CONTINUOUS_FAMILIES)}",
                field="continuous.family",
                line=_line_of_key(text, "family"),
            )
        params = _expect_object(block.get("params", {}), "continuous.params", text)
        _reject_unknown_keys(params, _PARAM_KEYS if family != "uniform" else (), "continuous.params", text)
        knots: Optional[tuple[float, ...]] = None
        cdf_values: Optional[tuple[float, ...]] = None
        if family != "uniform":
            knots = _expect_float_list(_require(params, "knots", "continuous.params", text), "continuous.params.knots", text)
            cdf_values = _expect_float_list(
                _require(params, "cdf_values", "continuous.params", text),
                "continuous.params.cdf_values",
                text,
            )
        p_plus = _expect_float_list(_require(block, "p_plus", "continuous", text), "continuous.p_plus", text)
        return cls(family=family, p_plus=p_plus, knots=knots, cdf_values=cdf_values)


@dataclass(frozen=True)
class RunConfig:
    mode: str = "rates"
    discrete: Optional[DiscretePriorSpec] = None
    continuous: Optional[ContinuousPriorSpec] = None
    horizon: Optional[int] = None
    limited_horizon: bool = False
    seed: int = 0
    replications: int = 1000
    tolerance: float = 1e-9
    rate_cap: int = DEFAULT_AGENT_CAP
    x1_grid: int = 2001
    schedule_file: Optional[str] = None
    out_dir: str = DEFAULT_OUT_DIRNAME
    log_level: str = "INFO"
    trajectory_log_episodes: int = 10
    prior_id: str = "prior"

    @property
    def is_continuous(self) -> bool:
        return self.continuous is not None

    def to_mapping(self) -> dict[str, Any]:
        out: dict[str, Any] = {"mode": self.mode}
        if self.discrete is not None:
            out["discrete"] = self.discrete.to_mapping()
        if self.continuous is not None:
            out["continuous"] = self.continuous.to_mapping()
        for key in _TOP_KEYS[3:]:
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_mapping(), indent=2, ensure_ascii=False) + "\n"

    def save(self, path: str) -> None:
        _atomic_write_text(path, _json_with_trailing_newline(self.to_json()))

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Apply CLI flag values (None means "not given") and re-check mode/prior compatibility."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        if "seed" in changes and not 0 <= int(changes["seed"]) <= U64_MAX:
            raise InvalidValue(f"seed must fit in 64 bits, got {changes['seed']}", field="seed")
        if "replications" in changes and int(changes["replications"]) < 1:
            raise InvalidValue(f"replications must be at least 1, got {changes['replications']}", field="replications")
        if "horizon" in changes and int(changes["horizon"]) < 1:
            raise InvalidValue(f"horizon must be at least 1, got {changes['horizon']}", field="horizon")
        if "tolerance" in changes:
            changes["tolerance"] = _clamp_float(float(changes["tolerance"]), "tolerance", TOLERANCE_MIN, TOLERANCE_MAX)
        updated = replace(self, **changes)
        _check_consistency(updated, None)
        return updated

    @classmethod
    def from_mapping(cls, raw: dict[str, Any], text: str | None = None) -> "RunConfig":
        _reject_unknown_keys(raw, _TOP_KEYS, "", text)
        defaults = cls()

        if "discrete" in raw and "continuous" in raw:
            raise ConflictingPrior(
                "exactly one of 'discrete' and 'continuous' may be given",
                field="continuous",
                line=_line_of_key(text, "continuous"),
            )
        if "discrete" not in raw and "continuous" not in raw:
            raise MissingKey("a 'discrete' or 'continuous' prior block is required", field="discrete")
        discrete = DiscretePriorSpec.from_mapping(raw["discrete"], text) if "discrete" in raw else None
        continuous = ContinuousPriorSpec.from_mapping(raw["continuous"], text) if "continuous" in raw else None

        mode = _expect_str(raw.get("mode", defaults.mode), "mode", text)
        if mode not in MODES:
            raise InvalidValue(
                f"unknown mode {mode!r}; expected one of {', '.join(MODES)}",
                field="mode",
                line=_line_of_key(text, "mode"),
            )

        horizon_raw = raw.get("horizon")
        horizon = None if horizon_raw is None else _expect_int(horizon_raw, "horizon", text, minimum=1)
        seed = _expect_int(raw.get("seed", defaults.seed), "seed", text, minimum=0)
        if seed > U64_MAX:
            raise InvalidValue(f"seed must fit in 64 bits, got {seed}", field="seed", line=_line_of_key(text, "seed"))
        log_level = _expect_str(raw.get("log_level", defaults.log_level), "log_level", text).upper()
        if log_level not in LOG_LEVELS:
            raise InvalidValue(
                f"unknown log level {log_level!r}",
                field="log_level",
                line=_line_of_key(text, "log_level"),
            )
        schedule_raw = raw.get("schedule_file")

        config = cls(
            mode=mode,
            discrete=discrete,
            continuous=continuous,
            horizon=horizon,
            limited_horizon=_expect_bool(raw.get("limited_horizon", defaults.limited_horizon), "limited_horizon", text),
            seed=seed,
            replications=_expect_int(raw.get("replications", defaults.replications), "replications", text, minimum=1),
            tolerance=_clamp_float(
                _expect_float(raw.get("tolerance", defaults.tolerance), "tolerance", text),
                "tolerance",
                TOLERANCE_MIN,
                TOLERANCE_MAX,
            ),
            rate_cap=_expect_int(raw.get("rate_cap", defaults.rate_cap), "rate_cap", text, minimum=1),
            x1_grid=_clamp_int(
                _expect_int(raw.get("x1_grid", defaults.x1_grid), "x1_grid", text),
                "x1_grid",
                X1_GRID_MIN,
            ),
            schedule_file=None if schedule_raw is None else _expect_str(schedule_raw, "schedule_file", text),
            out_dir=_expect_str(raw.get("out_dir", defaults.out_dir), "out_dir", text),
            log_level=log_level,
            trajectory_log_episodes=_expect_int(
                raw.get("trajectory_log_episodes", defaults.trajectory_log_episodes),
                "trajectory_log_episodes",
                text,
                minimum=0,
            ),
            prior_id=_expect_str(raw.get("prior_id", defaults.prior_id), "prior_id", text),
        )
        _check_consistency(config, text)
        return config

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        raw, text = _load_json_object(path, "config")
        return cls.from_mapping(raw, text)

    @classmethod
    def default_json(cls) -> str:
        example = cls(discrete=DiscretePriorSpec(k=3, p1=(0.4, 0.3, 0.3), p_plus=(0.1, 0.05)), prior_id="prior-a")
        return example.to_json()


def _check_consistency(config: RunConfig, text: str | None) -> None:
    if config.mode not in MODES:
        raise InvalidValue(f"unknown mode {config.mode!r}", field="mode", line=_line_of_key(text, "mode"))
    if config.continuous is not None and config.mode in DISCRETE_MODES:
        raise InvalidValue(
            f"mode {config.mode!r} needs a discrete prior",
            field="continuous",
            line=_line_of_key(text, "continuous"),
        )
    if config.discrete is not None and config.mode in CONTINUOUS_MODES:
        raise InvalidValue(
            f"mode {config.mode!r} needs a continuous prior",
            field="discrete",
            line=_line_of_key(text, "discrete"),
        )
    needs_horizon = config.mode != "rates" or config.limited_horizon
    if needs_horizon and config.horizon is None:
        raise MissingKey(f"mode {config.mode!r} requires a horizon", field="horizon")


def parse_config(text: str) -> RunConfig:
    return RunConfig.from_mapping(_parse_json_object(text, "config"), text)


__all__ = [
    "MODES",
    "CONTINUOUS_FAMILIES",
    "DiscretePriorSpec",
    "ContinuousPriorSpec",
    "RunConfig",
    "parse_config",
]
