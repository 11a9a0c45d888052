from __future__ import annotations

from .models import (
    CONTINUOUS_FAMILIES,
    MODES,
    ContinuousPriorSpec,
    DiscretePriorSpec,
    RunConfig,
    parse_config,
)
from .paths import APP_NAME, DEFAULT_OUT_DIRNAME, VERSION, RuntimePaths, _build_runtime_paths, get_runtime_paths
from .storage import (
    THREADS_ENV_VAR,
    _atomic_write_text,
    _json_with_trailing_newline,
    _load_json_object,
    _parse_json_object,
    threads_from_env,
)
from .warnings import _push_load_warning, consume_load_warnings

__all__ = [
    "VERSION",
    "APP_NAME",
    "DEFAULT_OUT_DIRNAME",
    "MODES",
    "CONTINUOUS_FAMILIES",
    "THREADS_ENV_VAR",
    "RuntimePaths",
    "DiscretePriorSpec",
    "ContinuousPriorSpec",
    "RunConfig",
    "parse_config",
    "get_runtime_paths",
    "threads_from_env",
    "consume_load_warnings",
]
