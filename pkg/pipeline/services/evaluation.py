"""
SNR-sweep evaluation of FDP estimators on synthetic systems with known truth.
"""
import logging
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional

import numpy as np

from synthdata.services.distributions import Family
from synthdata.services.generator import CorpusEntry, CorpusSampler
from trex.services.calibration import CalibrationGrid, calibrate, estimate_surface, select_variables
from trex.services.metrics import fdp_tpp
from trex.services.occurrences import OccurrenceTable
from trex.services.selector import occurrence_table
from trex_toolkit.exceptions import ParameterError

from .training_set import trex_seed
from .workers import celery_map, entry_payload, execution_backend, map_ordered

logger = logging.getLogger(__name__)


def held_out_sampler(n: int, p: int, sparsity: int, snr_values, beta_magnitude_range=(1.0, 3.0)) -> CorpusSampler:
    """Gaussian-mixture designs, SNR cycled over ``snr_values`` by index."""
    return CorpusSampler(n=n, p=p, sparsity=sparsity, snr_values=list(snr_values),
                         families=[Family.GAUSSIAN_MIXTURE],
                         beta_magnitude_range=tuple(beta_magnitude_range), cycle_snr=True)


@dataclass
class EvaluationRecord:
    method: str
    snr: float
    seed: int
    fdp: float
    tpp: float
    v_star: Optional[float]
    T_star: Optional[int]
    n_selected: int
    feasible: bool
    index: int = -1

    def to_payload(self) -> dict:
        return asdict(self)


@dataclass
class SystemEvaluation:
    """Records of one system plus its estimated and true FDP surfaces."""
    index: int
    records: List[EvaluationRecord]
    true_surface: np.ndarray
    estimated_surfaces: Dict[str, np.ndarray] = field(default_factory=dict)

    def to_payload(self) -> dict:
        return {
            'index': self.index,
            'records': [r.to_payload() for r in self.records],
            'true_surface': self.true_surface.tolist(),
            'estimated_surfaces': {k: v.tolist() for k, v in self.estimated_surfaces.items()},
        }

    @classmethod
    def from_payload(cls, data) -> 'SystemEvaluation':
        return cls(
            index=int(data['index']),
            records=[EvaluationRecord(**r) for r in data['records']],
            true_surface=np.asarray(data['true_surface'], dtype=float),
            estimated_surfaces={k: np.asarray(v, dtype=float) for k, v in data['estimated_surfaces'].items()},
        )


@dataclass
class AggregateRow:
    method: str
    snr: float
    fdr_mean: float
    fdr_std: float
    tpr_mean: float
    tpr_std: float
    n_systems: int


@dataclass
class SweepResult:
    records: List[EvaluationRecord]
    aggregates: List[AggregateRow]
    evaluations: List[SystemEvaluation]


def true_fdp_surface(table: OccurrenceTable, grid: CalibrationGrid, truth) -> np.ndarray:
    surface = np.empty((grid.T_max, len(grid.v_grid)))
    for t_idx, T in enumerate(grid.T_grid):
        for v_idx, v in enumerate(grid.v_grid):
            surface[t_idx, v_idx], _ = fdp_tpp(select_variables(table, v, T), truth)
    return surface


def evaluate_system(entry: CorpusEntry, estimators: Mapping[str, object], grid: CalibrationGrid,
                    K: int, L: Optional[int], master_seed: int, deflation: str = 'linear') -> SystemEvaluation:
    system = entry.generate()
    table = occurrence_table(system.X, system.y, K, L, grid.T_max, trex_seed(master_seed, entry.index),
                             deflation=deflation)
    records = []
    surfaces = {}
    for method, estimator in estimators.items():
        surfaces[method] = estimate_surface(table, grid, estimator)
        selection = calibrate(table, grid, estimator)
        fdp, tpp = fdp_tpp(selection.selected, system.active_set)
        records.append(EvaluationRecord(
            method=method,
            snr=system.config.snr,
            seed=entry.seed,
            fdp=fdp,
            tpp=tpp,
            v_star=selection.v_star,
            T_star=selection.T_star,
            n_selected=len(selection.selected),
            feasible=selection.feasible,
            index=entry.index,
        ))
    return SystemEvaluation(index=entry.index, records=records,
                            true_surface=true_fdp_surface(table, grid, system.active_set),
                            estimated_surfaces=surfaces)


def aggregate_records(records: List[EvaluationRecord]) -> List[AggregateRow]:
    """Mean and population std of FDP/TPP per (method, snr); methods keep first-seen order."""
    groups = OrderedDict()
    for record in records:
        groups.setdefault(record.method, {}).setdefault(record.snr, []).append(record)

    rows = []
    for method, by_snr in groups.items():
        for snr in sorted(by_snr):
            fdp = np.array([r.fdp for r in by_snr[snr]])
            tpp = np.array([r.tpp for r in by_snr[snr]])
            rows.append(AggregateRow(
                method=method,
                snr=snr,
                fdr_mean=float(fdp.mean()),
                fdr_std=float(fdp.std()),
                tpr_mean=float(tpp.mean()),
                tpr_std=float(tpp.std()),
                n_systems=int(fdp.size),
            ))
    return rows


def evaluate_sweep(entries: List[CorpusEntry], estimators: Mapping[str, object], grid: CalibrationGrid,
                   K: int, L: Optional[int], master_seed: int, deflation: str = 'linear',
                   threads: int = 1, model_path=None) -> SweepResult:
    """
    Run every estimator on every system; records are sorted by system index
    and keep the estimator order within a system.

    ``model_path`` is only needed by the Celery backend, whose workers load the
    learned model themselves.
    """
    if not estimators:
        raise ParameterError("evaluate_sweep needs at least one estimator")
    logger.info(f"Evaluating {len(entries)} systems with {', '.join(estimators)}")

    if execution_backend() == 'celery':
        from pipeline.tasks import evaluate_system_task

        if 'learned' in estimators and model_path is None:
            raise ParameterError("The Celery backend needs a model path for the learned estimator")
        unknown = set(estimators) - {'analytical', 'learned'}
        if unknown:
            raise ParameterError(f"The Celery backend only rebuilds the analytical and learned estimators, "
                                 f"got {sorted(unknown)}")
        model = str(model_path) if model_path is not None else None
        payloads = celery_map(evaluate_system_task, [
            (entry_payload(e), list(estimators), model, list(grid.v_grid), grid.T_max, grid.alpha,
             K, L, master_seed, deflation)
            for e in entries
        ])
        evaluations = [SystemEvaluation.from_payload(p) for p in payloads]
    else:
        evaluations = map_ordered(
            lambda e: evaluate_system(e, estimators, grid, K, L, master_seed, deflation=deflation),
            entries, threads=threads,
        )

    evaluations.sort(key=lambda ev: ev.index)
    records = [record for ev in evaluations for record in ev.records]
    return SweepResult(records=records, aggregates=aggregate_records(records), evaluations=evaluations)
