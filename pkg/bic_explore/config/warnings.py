"""Non-fatal findings from config parsing, queued until the CLI's logger exists."""

from __future__ import annotations

import threading
from typing import List

_LOAD_WARNINGS: List[str] = []
_LOAD_WARNINGS_LOCK = threading.Lock()


def _push_load_warning(message: str) -> None:
    with _LOAD_WARNINGS_LOCK:
        _LOAD_WARNINGS.append(message)


def warn_clamped(field: str, value: object, clamped: object, allowed: str) -> None:
    """Record a config knob that parsed but fell outside its recommended range."""
    _push_load_warning(f"{field}={value!r} {allowed}; clamped to {clamped!r}")


def warn_env_ignored(variable: str, raw: object, reason: str) -> None:
    _push_load_warning(f"{variable}={raw} {reason}; ignored")


def consume_load_warnings() -> List[str]:
    """Drain the queue; the CLI logs each entry once, before and after the run."""
    with _LOAD_WARNINGS_LOCK:
        out = list(_LOAD_WARNINGS)
        _LOAD_WARNINGS.clear()
        return out
