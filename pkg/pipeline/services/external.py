import logging
from dataclasses import dataclass
from typing import Optional

from trex.services.calibration import CalibrationGrid, SelectionResult
from trex.services.metrics import fdp_tpp
from trex.services.occurrences import OccurrenceTable
from trex.services.reports import selection_report
from trex.services.selector import trex_select

from .ingestion import ExternalDataset

logger = logging.getLogger(__name__)


@dataclass
class ExternalReport:
    selection: SelectionResult
    table: OccurrenceTable
    seed: int
    fdp: Optional[float] = None
    tpp: Optional[float] = None

    def to_dict(self, dataset: ExternalDataset, alpha: float) -> dict:
        extra = {
            'alpha': alpha,
            'n': dataset.n,
            'p': dataset.p,
            'K': self.table.K,
            'L': self.table.L,
            'T_max': self.table.T_max,
            'deflation': self.table.deflation,
            'x_path': str(dataset.x_path),
            'y_path': str(dataset.y_path),
        }
        if dataset.truth is not None:
            extra.update({'fdp': self.fdp, 'tpp': self.tpp, 'n_true': len(dataset.truth)})
        return selection_report(self.selection, self.seed, **extra)


def select_external(dataset: ExternalDataset, estimator, K: int, L: Optional[int], grid: CalibrationGrid,
                    seed: int, deflation: str = 'linear', threads: int = 1) -> ExternalReport:
    outcome = trex_select(dataset.X, dataset.y, K, L, grid, estimator, seed, deflation=deflation,
                          threads=threads)
    report = ExternalReport(selection=outcome.selection, table=outcome.table, seed=seed)
    if dataset.truth is not None:
        report.fdp, report.tpp = fdp_tpp(outcome.selection.selected, dataset.truth)
        logger.info(f"Realized FDP={report.fdp:.3f}, TPP={report.tpp:.3f} "
                    f"with {len(outcome.selection.selected)} selected")
    return report
