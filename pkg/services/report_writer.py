"""CSV / JSON writers for result tables and the run manifest.

CSV output goes through pandas with 17 significant digits; each CSV file is
accompanied by ``<output>.manifest.json``. JSON output embeds the manifest
and writes floats with repr precision, non-finite values as null.
"""

import json
import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from services import __version__
from services.errors import ConfigError
from utils.helpers import file_digest, json_safe, run_timestamp

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
MANIFEST_SUFFIX = ".manifest.json"

PathLike = Union[str, Path]


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"

    @classmethod
    def parse(cls, name: str) -> "OutputFormat":
        try:
            return cls(name.lower())
        except ValueError as exc:
            raise ConfigError(f"unknown output format '{name}' (choose csv or json)") from exc


class RunManifest(BaseModel):
    """Everything needed to reproduce one output file."""

    model_config = ConfigDict(frozen=True)

    subcommand: str
    config: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    version: str = __version__
    input_digests: Dict[str, str] = Field(default_factory=dict)
    timestamp: str


def build_manifest(subcommand: str, config: Dict[str, Any], seed: Optional[int] = None,
                   inputs: Iterable[PathLike] = ()) -> RunManifest:
    digests = {str(path): file_digest(path) for path in inputs}
    return RunManifest(
        subcommand=subcommand,
        config=json_safe(config),
        seed=seed,
        input_digests=digests,
        timestamp=run_timestamp(),
    )


def _to_stdout(output: Optional[PathLike]) -> bool:
    return output is None or str(output) == "-"


def write_table(output: Optional[PathLike], rows: Sequence[Dict[str, Any]], columns: List[str],
                fmt: OutputFormat, manifest: RunManifest,
                summary: Optional[Dict[str, Any]] = None) -> None:
    """Write result rows; ``output`` of None or '-' means stdout.

    ``summary`` holds per-table scalars (e.g. selected K per criterion): CSV
    carries them as leading ``#`` comment lines, JSON as a "summary" object.
    """
    if fmt is OutputFormat.JSON:
        document = {
            "manifest": manifest.model_dump(),
            "summary": summary or {},
            "columns": columns,
            "rows": [{c: row[c] for c in columns} for row in rows],
        }
        text = json.dumps(json_safe(document), indent=2, allow_nan=False) + "\n"
        _emit(output, text)
        return

    header = "".join(f"# {key}: {value}\n" for key, value in (summary or {}).items())
    frame = pd.DataFrame(list(rows), columns=columns)
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    _emit(output, header + body)
    if _to_stdout(output):
        logger.info("CSV written to stdout; no manifest file")
        return
    write_manifest(Path(str(output) + MANIFEST_SUFFIX), manifest)


def write_manifest(path: PathLike, manifest: RunManifest) -> None:
    text = json.dumps(json_safe(manifest.model_dump()), indent=2, allow_nan=False) + "\n"
    _emit(path, text)


def _emit(output: Optional[PathLike], text: str) -> None:
    if _to_stdout(output):
        sys.stdout.write(text)
        return
    with open(output, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info("wrote %s", output)
