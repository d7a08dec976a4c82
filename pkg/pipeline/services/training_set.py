"""
Labelled (Phi, v, T, L) examples from synthetic systems with known truth.

Every system is run once to depth T_max; every (v, T) cell of the grid then
yields one example whose label is the realized FDP of A(v, T).
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from fdpnet.services.training import TrainingRecord
from synthdata.services.generator import CorpusEntry, CorpusSampler, plan_corpus
from trex.services.calibration import default_v_grid, select_variables
from trex.services.metrics import fdp_tpp
from trex.services.selector import occurrence_table
from trex_toolkit.exceptions import ParameterError
from trex_toolkit.utils import derive_seed

from .workers import celery_map, entry_payload, execution_backend, map_ordered

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingSetSpec:
    sampler: CorpusSampler
    count: int
    K: int = 20
    L: Optional[int] = None  # None means L = p
    T_max: int = 10
    v_grid: Tuple[float, ...] = default_v_grid()

    def validate(self) -> None:
        if self.count < 1:
            raise ParameterError(f"count must be >= 1, got {self.count}")
        if self.K < 1:
            raise ParameterError(f"K must be >= 1, got {self.K}")
        L = self.sampler.p if self.L is None else self.L
        if not 1 <= self.T_max <= L:
            raise ParameterError(f"T_max must lie in [1, L={L}], got {self.T_max}")
        if not self.v_grid or any(not 0.5 <= v < 1.0 for v in self.v_grid):
            raise ParameterError(f"v_grid values must lie in [0.5, 1), got {self.v_grid}")


def trex_seed(master_seed: int, index: int) -> int:
    return derive_seed(master_seed, 'trex', index)


def system_training_records(entry: CorpusEntry, K: int, L: Optional[int], T_max: int, v_grid,
                            master_seed: int, deflation: str = 'linear') -> List[TrainingRecord]:
    system = entry.generate()
    table = occurrence_table(system.X, system.y, K, L, T_max, trex_seed(master_seed, entry.index),
                             deflation=deflation)
    records = []
    for T in range(1, T_max + 1):
        phi_row = table.row(T).copy()
        for v in v_grid:
            fdp, _ = fdp_tpp(select_variables(table, v, T), system.active_set)
            records.append(TrainingRecord(label=fdp, v=float(v), T=T, L=table.L, phi_row=phi_row,
                                          system=entry.index))
    return records


def training_records_for(entries: List[CorpusEntry], K: int, L: Optional[int], T_max: int, v_grid,
                         master_seed: int, threads: int = 1) -> List[TrainingRecord]:
    """Records of the given corpus entries, ordered by system, then T, then v."""
    v_grid = [float(v) for v in v_grid]
    logger.info(f"Extracting training examples from {len(entries)} systems "
                f"(K={K}, T_max={T_max}, |v_grid|={len(v_grid)})")

    if execution_backend() == 'celery':
        from pipeline.tasks import extract_training_records

        payloads = celery_map(extract_training_records, [
            (entry_payload(e), K, L, T_max, v_grid, master_seed) for e in entries
        ])
        per_system = [[TrainingRecord.from_payload(r) for r in chunk] for chunk in payloads]
    else:
        per_system = map_ordered(
            lambda e: system_training_records(e, K, L, T_max, v_grid, master_seed),
            entries, threads=threads,
        )

    records = [record for chunk in per_system for record in chunk]
    logger.info(f"Built {len(records)} training examples")
    return records


def build_training_set(spec: TrainingSetSpec, master_seed: int, threads: int = 1) -> List[TrainingRecord]:
    """``count * T_max * |v_grid|`` records from a freshly planned corpus."""
    spec.validate()
    entries = plan_corpus(spec.sampler, spec.count, master_seed)
    return training_records_for(entries, spec.K, spec.L, spec.T_max, spec.v_grid, master_seed, threads=threads)
