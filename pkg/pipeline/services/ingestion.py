"""
Validated loading of external (pre-processed) datasets from CSV.

X is an n x p numeric matrix, y a single numeric column (binary 0/1 is
fine), and an optional truth file lists active column indices (0-based),
one per line.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from trex_toolkit.exceptions import (
    DataValidationError,
    DegenerateInputError,
    DimensionError,
    NonNumericCellError,
    RowMismatchError,
)

logger = logging.getLogger(__name__)


@dataclass
class ExternalDataset:
    X: np.ndarray
    y: np.ndarray
    truth: Optional[Tuple[int, ...]]
    x_path: Path
    y_path: Path

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def p(self) -> int:
        return int(self.X.shape[1])

    @property
    def is_binary(self) -> bool:
        return bool(np.all(np.isin(self.y, (0.0, 1.0))))


def _read_numeric_csv(path: Path, has_header: bool) -> np.ndarray:
    if not path.exists():
        raise DataValidationError(f"File not found: {path}")
    try:
        raw = pd.read_csv(path, header=0 if has_header else None, dtype=str, keep_default_na=False,
                          skip_blank_lines=True, encoding='utf-8')
    except UnicodeDecodeError as e:
        raise DataValidationError(f"{path}: not UTF-8 text (byte {e.start}: {e.reason})") from e
    except pd.errors.EmptyDataError as e:
        raise DataValidationError(f"{path}: file is empty") from e
    except pd.errors.ParserError as e:
        raise DataValidationError(f"{path}: malformed CSV ({e})") from e

    if raw.shape[0] == 0 or raw.shape[1] == 0:
        raise DataValidationError(f"{path}: no data rows")

    values = raw.apply(lambda col: pd.to_numeric(col.str.strip(), errors='coerce'))
    bad = values.isna().to_numpy() | ~np.isfinite(values.to_numpy(dtype=float, na_value=np.nan))
    if bad.any():
        row, col = (int(i) for i in np.argwhere(bad)[0])
        line = row + (2 if has_header else 1)
        cell = raw.iat[row, col]
        raise NonNumericCellError(
            f"{path}: line {line}, column {col}: {'missing value' if pd.isna(cell) else repr(cell)} "
            f"is not a finite number",
            line=line, column=col,
        )
    return values.to_numpy(dtype=float)


def read_truth_file(path, p: int) -> Tuple[int, ...]:
    path = Path(path)
    if not path.exists():
        raise DataValidationError(f"Truth file not found: {path}")
    indices = []
    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except UnicodeDecodeError as e:
        raise DataValidationError(f"{path}: not UTF-8 text (byte {e.start}: {e.reason})") from e
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            j = int(text)
        except ValueError:
            raise NonNumericCellError(f"{path}: line {lineno}: {text!r} is not a column index",
                                      line=lineno, column=0)
        if not 0 <= j < p:
            raise DataValidationError(f"{path}: line {lineno}: index {j} outside [0, {p})")
        indices.append(j)
    return tuple(sorted(set(indices)))


def ingest_csv(x_path, y_path, has_header: bool = False, truth_path=None,
               p_max: Optional[int] = None) -> ExternalDataset:
    x_path, y_path = Path(x_path), Path(y_path)
    X = _read_numeric_csv(x_path, has_header)
    y_table = _read_numeric_csv(y_path, has_header)

    if y_table.shape[1] != 1:
        raise DataValidationError(f"{y_path}: expected a single response column, found {y_table.shape[1]}")
    y = y_table[:, 0]

    if X.shape[0] != y.size:
        raise RowMismatchError(f"Row counts differ: {x_path} has {X.shape[0]} rows, {y_path} has {y.size}")

    spread = np.ptp(X, axis=0)
    constant = np.flatnonzero(spread == 0)
    if constant.size:
        j = int(constant[0])
        raise DegenerateInputError(f"{x_path}: column {j} is constant ({float(X[0, j])!r})", column=j)
    if np.ptp(y) == 0:
        raise DegenerateInputError(f"{y_path}: response is constant")

    if p_max is not None and X.shape[1] > p_max:
        raise DimensionError(f"{x_path}: p={X.shape[1]} exceeds the model's p_max={p_max}")

    truth = read_truth_file(truth_path, X.shape[1]) if truth_path is not None else None
    dataset = ExternalDataset(X=X, y=y, truth=truth, x_path=x_path, y_path=y_path)
    logger.info(f"Ingested {x_path.name}: n={dataset.n}, p={dataset.p}"
                f"{', binary response' if dataset.is_binary else ''}"
                f"{f', {len(truth)} true actives' if truth is not None else ''}")
    return dataset
