"""
End-to-end T-Rex selection: K dummy-augmented LARS runs, occurrence
aggregation, calibration with a pluggable FDP estimator.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from trex_toolkit.exceptions import ParameterError
from trex_toolkit.utils import derive_seed

from .calibration import CalibrationGrid, SelectionResult, calibrate
from .lars import ExperimentResult, lars_run
from .occurrences import OccurrenceTable, build_occurrence_table
from .standardize import StandardizedData, standardize, standardize_columns

logger = logging.getLogger(__name__)


def generate_dummies(n: int, L: int, seed: int) -> np.ndarray:
    """n x L matrix of i.i.d. standard Gaussian dummies."""
    if n < 1 or L < 1:
        raise ParameterError(f"Dummy shape must be positive, got n={n}, L={L}")
    return np.random.default_rng(seed).standard_normal((n, L))


def run_experiments(data: StandardizedData, K: int, L: int, T_max: int, seed: int,
                    threads: int = 1) -> List[ExperimentResult]:
    """K independent runs with fresh dummies; the result list is ordered by k."""
    if K < 1:
        raise ParameterError(f"K must be >= 1, got {K}")

    def experiment(k):
        dummies, _, _ = standardize_columns(generate_dummies(data.n, L, derive_seed(seed, 'experiment', k)))
        return lars_run(data, dummies, T_max, k=k)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(experiment, range(K)))
    return [experiment(k) for k in range(K)]


def occurrence_table(X, y, K: int, L: Optional[int], T_max: int, seed: int,
                     deflation: str = 'linear', threads: int = 1) -> OccurrenceTable:
    data = standardize(X, y)
    L = data.p if L is None else L
    if T_max > L:
        raise ParameterError(f"T_max={T_max} exceeds the number of dummies L={L}")
    results = run_experiments(data, K, L, T_max, seed, threads=threads)
    return build_occurrence_table(results, T_max, data.p, L, rule=deflation)


@dataclass
class TRexOutcome:
    selection: SelectionResult
    table: OccurrenceTable


def trex_select(X, y, K: int, L: Optional[int], grid: CalibrationGrid, estimator, seed: int,
                deflation: str = 'linear', threads: int = 1) -> TRexOutcome:
    table = occurrence_table(X, y, K, L, grid.T_max, seed, deflation=deflation, threads=threads)
    selection = calibrate(table, grid, estimator)
    logger.debug(
        f"Calibrated with {selection.estimator}: v*={selection.v_star}, T*={selection.T_star}, "
        f"|A|={len(selection.selected)}, feasible={selection.feasible}"
    )
    return TRexOutcome(selection=selection, table=table)
