import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from synthdata.services.generator import CorpusEntry
from trex.services.calibration import CalibrationGrid

from .evaluation import SystemEvaluation, evaluate_system
from .workers import map_ordered

logger = logging.getLogger(__name__)


@dataclass
class SurfaceReport:
    """Mean predicted and mean true FDP per (T, v) cell, shaped (T_max, |v_grid|)."""
    v_grid: tuple
    T_max: int
    mean_pred: np.ndarray
    mean_true: np.ndarray
    method: str

    @property
    def overestimation_fraction(self) -> float:
        """Share of cells with mean prediction >= mean truth (ties count as overestimation)."""
        return float(np.mean(self.mean_pred >= self.mean_true))

    def rows(self):
        for t_idx in range(self.T_max):
            for v_idx, v in enumerate(self.v_grid):
                yield v, t_idx + 1, float(self.mean_pred[t_idx, v_idx]), float(self.mean_true[t_idx, v_idx])


def surface_from_evaluations(evaluations: List[SystemEvaluation], method: str,
                             grid: CalibrationGrid) -> SurfaceReport:
    if not evaluations:
        shape = (grid.T_max, len(grid.v_grid))
        return SurfaceReport(v_grid=grid.v_grid, T_max=grid.T_max, mean_pred=np.zeros(shape),
                             mean_true=np.zeros(shape), method=method)
    pred = np.mean([ev.estimated_surfaces[method] for ev in evaluations], axis=0)
    true = np.mean([ev.true_surface for ev in evaluations], axis=0)
    report = SurfaceReport(v_grid=grid.v_grid, T_max=grid.T_max, mean_pred=pred, mean_true=true, method=method)
    logger.info(f"{method}: mean prediction >= mean truth in "
                f"{report.overestimation_fraction:.1%} of grid cells")
    return report


def surface_report(entries: List[CorpusEntry], estimator, grid: CalibrationGrid, K: int, L: Optional[int],
                   master_seed: int, deflation: str = 'linear', threads: int = 1) -> SurfaceReport:
    method = getattr(estimator, 'label', 'custom')
    evaluations = map_ordered(
        lambda e: evaluate_system(e, {method: estimator}, grid, K, L, master_seed, deflation=deflation),
        entries, threads=threads,
    )
    return surface_from_evaluations(evaluations, method, grid)
