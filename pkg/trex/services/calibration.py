"""
Grid-search calibration of the voting threshold v and termination count T.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from trex_toolkit.exceptions import ParameterError

from .occurrences import OccurrenceTable

logger = logging.getLogger(__name__)

# Phi values are multiples of 1/K; comparisons against v tolerate rounding.
VOTE_TOLERANCE = 1e-12


def default_v_grid() -> Tuple[float, ...]:
    return tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class CalibrationGrid:
    v_grid: Tuple[float, ...]
    T_max: int
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, 'v_grid', tuple(float(v) for v in self.v_grid))
        if not self.v_grid:
            raise ParameterError("v_grid must not be empty")
        if any(not 0.5 <= v < 1.0 for v in self.v_grid):
            raise ParameterError(f"v_grid values must lie in [0.5, 1), got {self.v_grid}")
        if any(b <= a for a, b in zip(self.v_grid, self.v_grid[1:])):
            raise ParameterError(f"v_grid must be strictly increasing, got {self.v_grid}")
        if self.T_max < 1:
            raise ParameterError(f"T_max must be >= 1, got {self.T_max}")
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def T_grid(self) -> range:
        return range(1, self.T_max + 1)

    def cells(self):
        for T in self.T_grid:
            for v in self.v_grid:
                yield v, T


def select_variables(table: OccurrenceTable, v: float, T: int) -> Tuple[int, ...]:
    """A(v, T) = {j : phi[T, j] > v}."""
    return tuple(int(j) for j in np.flatnonzero(table.row(T) > v + VOTE_TOLERANCE))


def analytical_fdp(table: OccurrenceTable, v: float, T: int) -> float:
    selected = select_variables(table, v, T)
    if not selected:
        return 0.0
    deflated = table.phi_deflated[T - 1, list(selected)]
    return float(np.sum(1.0 - deflated) / max(1, len(selected)))


def dummy_count_bound(table: OccurrenceTable, v: float, T: int) -> float:
    """
    FDP bound from the dummy count alone: min(1, T * p / ((L + 1) * v * |A|)).

    Nulls and dummies are exchangeable, so an experiment holds T * p / (L + 1)
    null originals in expectation when its T-th dummy enters. A null voted in
    at threshold v carries more than v of that mass even when it enters every
    experiment, which caps the selected nulls at T * p / ((L + 1) * v).
    """
    selected = select_variables(table, v, T)
    if not selected:
        return 0.0
    return float(min(1.0, T * table.p / ((table.L + 1) * v * len(selected))))


class AnalyticalEstimator:
    """
    Deflated-occurrence estimate, raised to the dummy-count bound.

    The deflated estimate alone undershoots when a null correlates with the
    response by chance and enters most experiments (small n); the bound keeps
    the estimate conservative there. ``dummy_bound=False`` gives the bare
    deflated estimate.
    """
    label = 'analytical'

    def __init__(self, dummy_bound: bool = True):
        self.dummy_bound = dummy_bound

    def __call__(self, table: OccurrenceTable, v: float, T: int) -> float:
        estimate = analytical_fdp(table, v, T)
        if self.dummy_bound:
            estimate = max(estimate, dummy_count_bound(table, v, T))
        return estimate


@dataclass
class SelectionResult:
    selected: Tuple[int, ...]
    v_star: Optional[float]
    T_star: Optional[int]
    fdp_estimate_at_choice: Optional[float]
    estimator: str
    feasible: bool

    def to_dict(self) -> dict:
        return {
            'selected': list(self.selected),
            'v_star': self.v_star,
            'T_star': self.T_star,
            'fdp_estimate': self.fdp_estimate_at_choice,
            'estimator': self.estimator,
            'feasible': self.feasible,
        }


def estimate_surface(table: OccurrenceTable, grid: CalibrationGrid, estimator) -> np.ndarray:
    """Estimates for every cell as a (T_max, |v_grid|) array."""
    if hasattr(estimator, 'surface'):
        return np.asarray(estimator.surface(table, grid), dtype=float)
    surface = np.empty((grid.T_max, len(grid.v_grid)))
    for t_idx, T in enumerate(grid.T_grid):
        for v_idx, v in enumerate(grid.v_grid):
            surface[t_idx, v_idx] = estimator(table, v, T)
    return surface


def calibrate(table: OccurrenceTable, grid: CalibrationGrid, estimator) -> SelectionResult:
    """
    Largest selection whose estimated FDP stays at or below alpha.

    Ties: smaller estimate, then smaller T, then larger v.
    """
    if grid.T_max > table.T_max:
        raise ParameterError(f"Grid T_max={grid.T_max} exceeds table T_max={table.T_max}")

    label = getattr(estimator, 'label', 'custom')
    surface = estimate_surface(table, grid, estimator)

    best_key = None
    best = None
    for t_idx, T in enumerate(grid.T_grid):
        for v_idx, v in enumerate(grid.v_grid):
            estimate = float(surface[t_idx, v_idx])
            if estimate > grid.alpha:
                continue
            selected = select_variables(table, v, T)
            key = (-len(selected), estimate, T, -v)
            if best_key is None or key < best_key:
                best_key = key
                best = (selected, v, T, estimate)

    if best is None:
        return SelectionResult(selected=(), v_star=None, T_star=None, fdp_estimate_at_choice=None,
                               estimator=label, feasible=False)

    selected, v, T, estimate = best
    return SelectionResult(selected=selected, v_star=v, T_star=T, fdp_estimate_at_choice=estimate,
                           estimator=label, feasible=True)
