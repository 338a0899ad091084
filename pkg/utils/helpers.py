"""Utility helpers for evidencia."""

import hashlib
import logging
import math
import os
import sys
from datetime import datetime, timezone
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Union

from services.errors import EvidenciaError

logger = logging.getLogger(__name__)

SOURCE_DATE_EPOCH = "SOURCE_DATE_EPOCH"


def handle_evidencia_errors(func: Callable[..., int]) -> Callable[..., int]:
    """Turn an EvidenciaError raised by a sub-command into its exit code."""
    @wraps(func)
    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except EvidenciaError as e:
            logger.debug("%s failed", func.__name__, exc_info=True)
            print(f"evidencia: error: {e}", file=sys.stderr)
            return e.exit_code
    return wrapper


def file_digest(path: Union[str, Path]) -> str:
    """sha256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def run_timestamp() -> str:
    """UTC ISO-8601 timestamp, pinned by SOURCE_DATE_EPOCH when set."""
    pinned = os.environ.get(SOURCE_DATE_EPOCH)
    if pinned:
        try:
            moment = datetime.fromtimestamp(int(pinned), tz=timezone.utc)
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", SOURCE_DATE_EPOCH, pinned)
            moment = datetime.now(timezone.utc)
    else:
        moment = datetime.now(timezone.utc)
    return moment.replace(microsecond=0).isoformat().replace("+00:00", "Z")


def json_safe(value: Any) -> Any:
    """Replace non-finite floats with None recursively (JSON has no inf)."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def format_error(value: float) -> str:
    if value == 0:
        return "0"
    if not math.isfinite(value):
        return str(value)
    return f"{value:.2e}"
