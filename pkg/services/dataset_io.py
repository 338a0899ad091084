"""CSV ingestion and emission for datasets and tabulated bases.

Dataset files carry a header row ``x,y,sigma``; lines starting with ``#``
are comments. Floats are written with 17 significant digits and read back
with pandas' round-trip parser, so an emitted dataset reloads bit-exactly.
"""

import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from services.errors import InputFormatError, InvalidUncertaintyError
from services.linmodel import BasisSpec, Dataset

logger = logging.getLogger(__name__)

DATASET_COLUMNS: List[str] = ["x", "y", "sigma"]
FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


def _read_frame(path: PathLike, what: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, comment="#", skipinitialspace=True,
                            float_precision="round_trip")
    except FileNotFoundError as exc:
        raise InputFormatError(f"{what} file '{path}' not found") from exc
    except pd.errors.EmptyDataError as exc:
        raise InputFormatError(f"{what} file '{path}' is empty") from exc
    except pd.errors.ParserError as exc:
        raise InputFormatError(f"{what} file '{path}' is not valid CSV: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"{what} file '{path}' is not UTF-8 text") from exc
    frame.columns = [str(c).strip() for c in frame.columns]
    if frame.empty:
        raise InputFormatError(f"{what} file '{path}' has a header but no rows")
    return frame


def _numeric_column(frame: pd.DataFrame, column: str, path: PathLike) -> np.ndarray:
    raw = frame[column]
    if pd.api.types.is_numeric_dtype(raw):
        values = raw.to_numpy(dtype=float)
    else:
        values = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        row = int(bad[0])
        raise InputFormatError(
            f"{path}: row {row + 1}, column '{column}': value {raw.iloc[row]!r} is not a finite number"
        )
    return values


def read_dataset(path: PathLike) -> Dataset:
    """Load an ``x,y,sigma`` CSV file.

    Raises:
        InputFormatError: unreadable file, missing column or non-numeric value
        InvalidUncertaintyError: a sigma entry is not strictly positive
    """
    frame = _read_frame(path, "dataset")
    for column in DATASET_COLUMNS:
        if column not in frame.columns:
            raise InputFormatError(f"column '{column}' not found in {path}")
    x, y, sigma = (_numeric_column(frame, c, path) for c in DATASET_COLUMNS)
    bad = np.flatnonzero(~(sigma > 0))
    if bad.size:
        row = int(bad[0])
        raise InvalidUncertaintyError(
            f"{path}: row {row + 1}, column 'sigma': {sigma[row]!r} is not strictly positive"
        )
    logger.info("read %d points from %s", len(x), path)
    return Dataset(x=x, y=y, sigma=sigma)


def read_basis_table(path: PathLike, n_points: int) -> BasisSpec:
    """Load an N x M table of basis values f_k(x_n), one row per data point."""
    frame = _read_frame(path, "basis")
    if len(frame) != n_points:
        raise InputFormatError(
            f"basis table {path} has {len(frame)} rows but the dataset has {n_points} points"
        )
    columns = [_numeric_column(frame, c, path) for c in frame.columns]
    table = np.column_stack(columns)
    try:
        return BasisSpec.from_table(table)
    except ValueError as exc:
        raise InputFormatError(f"basis table {path}: {exc}") from exc


def write_dataset(path: PathLike, dataset: Dataset) -> None:
    """Write a dataset as ``x,y,sigma`` with round-trip precision."""
    frame = pd.DataFrame({"x": dataset.x, "y": dataset.y, "sigma": dataset.sigma},
                         columns=DATASET_COLUMNS)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("wrote %d points to %s", dataset.n_points, path)
