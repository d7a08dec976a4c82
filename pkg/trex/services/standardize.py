import logging
from dataclasses import dataclass

import numpy as np

from trex_toolkit.exceptions import DegenerateInputError, DimensionError, ParameterError

logger = logging.getLogger(__name__)


@dataclass
class StandardizedData:
    Xs: np.ndarray
    ys: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    p: int

    @property
    def n(self) -> int:
        return self.Xs.shape[0]


def standardize_columns(M: np.ndarray):
    """Center every column and scale it to unit Euclidean norm."""
    means = M.mean(axis=0)
    centered = M - means
    scales = np.linalg.norm(centered, axis=0)
    return centered / scales, means, scales


def standardize(X, y) -> StandardizedData:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()

    if X.ndim != 2:
        raise DimensionError(f"X must be a 2-D matrix, got shape {X.shape}")
    n, p = X.shape
    if n < 2:
        raise ParameterError(f"Need at least 2 samples, got n={n}")
    if y.size != n:
        raise DimensionError(f"y has {y.size} entries but X has {n} rows")

    spread = np.ptp(X, axis=0)
    constant = np.flatnonzero(spread == 0)
    if constant.size:
        j = int(constant[0])
        raise DegenerateInputError(f"Column {j} is constant (value {float(X[0, j])!r})", column=j)

    if np.ptp(y) == 0:
        raise DegenerateInputError("Response y is constant")

    Xs, means, scales = standardize_columns(X)
    ys = y - y.mean()
    return StandardizedData(Xs=Xs, ys=ys, column_means=means, column_scales=scales, p=p)
