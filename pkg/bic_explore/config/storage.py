from __future__ import annotations

import json
import os
import tempfile
from typing import Any, Optional, Sequence

from ..errors import ConfigError, TypeMismatch, UnknownKey
from .warnings import warn_clamped, warn_env_ignored

THREADS_ENV_VAR = "BIC_EXPLORE_THREADS"


def _line_of_key(text: str | None, key: str) -> Optional[int]:
    if not text:
        return None
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def _type_name(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, list):
        return "array"
    if isinstance(value, dict):
        return "object"
    return type(value).__name__


def _mismatch(field: str, expected: str, value: Any, text: str | None) -> TypeMismatch:
    key = field.rsplit(".", 1)[-1]
    return TypeMismatch(f"expected {expected}, got {_type_name(value)}", field=field, line=_line_of_key(text, key))


def _expect_int(value: Any, field: str, text: str | None = None, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _mismatch(field, "integer", value, text)
    if minimum is not None and value < minimum:
        raise TypeMismatch(f"must be >= {minimum}, got {value}", field=field, line=_line_of_key(text, field.rsplit(".", 1)[-1]))
    return value


def _expect_float(value: Any, field: str, text: str | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _mismatch(field, "number", value, text)
    return float(value)


def _expect_bool(value: Any, field: str, text: str | None = None) -> bool:
    if not isinstance(value, bool):
        raise _mismatch(field, "boolean", value, text)
    return value


def _expect_str(value: Any, field: str, text: str | None = None) -> str:
    if not isinstance(value, str):
        raise _mismatch(field, "string", value, text)
    return value


def _expect_float_list(value: Any, field: str, text: str | None = None) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise _mismatch(field, "array of numbers", value, text)
    return tuple(_expect_float(item, f"{field}[{index}]", text) for index, item in enumerate(value))


def _expect_object(value: Any, field: str, text: str | None = None) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise _mismatch(field, "object", value, text)
    return value


def _clamp_float(value: float, field: str, minimum: float, maximum: float) -> float:
    clamped = min(max(value, minimum), maximum)
    if clamped != value:
        warn_clamped(field, value, clamped, f"outside [{minimum!r}, {maximum!r}]")
    return clamped


def _clamp_int(value: int, field: str, minimum: int) -> int:
    if value < minimum:
        warn_clamped(field, value, minimum, f"below {minimum}")
        return minimum
    return value


def _reject_unknown_keys(raw: dict[str, Any], allowed: Sequence[str], prefix: str, text: str | None) -> None:
    for key in raw:
        if key not in allowed:
            field = f"{prefix}.{key}" if prefix else key
            raise UnknownKey("unknown key", field=field, line=_line_of_key(text, key))


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    prefix = f".{os.path.basename(path)}."
    fd, temp_path = tempfile.mkstemp(prefix=prefix, suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(temp_path, path)
    except Exception:
        try:
            os.unlink(temp_path)
        except Exception:
            pass
        raise


def _json_with_trailing_newline(text: str) -> str:
    return text if text.endswith("\n") else f"{text}\n"


def _parse_json_object(text: str, label: str) -> dict[str, Any]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{label}: invalid JSON ({exc.msg}, column {exc.colno})", line=exc.lineno) from exc
    if not isinstance(raw, dict):
        raise TypeMismatch(f"{label}: top-level value must be an object, got {_type_name(raw)}", line=1)
    return raw


def _load_json_object(path: str, label: str) -> tuple[dict[str, Any], str]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"{label}: cannot read {path} ({exc.__class__.__name__})") from exc
    return _parse_json_object(text, label), text


def threads_from_env() -> Optional[int]:
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or not raw.strip():
        return None
    try:
        value = int(raw.strip())
    except ValueError:
        warn_env_ignored(THREADS_ENV_VAR, repr(raw), "is not an integer")
        return None
    if value < 1:
        warn_env_ignored(THREADS_ENV_VAR, value, "must be positive")
        return None
    return value
