from .helpers import handle_evidencia_errors, file_digest, run_timestamp, json_safe

__all__ = [
    "handle_evidencia_errors",
    "file_digest",
    "run_timestamp",
    "json_safe",
]
