from .evaluation import (
    AggregateRow,
    EvaluationRecord,
    SweepResult,
    SystemEvaluation,
    aggregate_records,
    evaluate_sweep,
    evaluate_system,
    held_out_sampler,
    true_fdp_surface,
)
from .exports import write_aggregate_csv, write_results_csv, write_surface_csv
from .external import ExternalReport, select_external
from .ingestion import ExternalDataset, ingest_csv, read_truth_file
from .surface import SurfaceReport, surface_from_evaluations, surface_report
from .training_set import (
    TrainingSetSpec,
    build_training_set,
    system_training_records,
    training_records_for,
    trex_seed,
)

__all__ = [
    'AggregateRow', 'EvaluationRecord', 'SweepResult', 'SystemEvaluation', 'aggregate_records',
    'evaluate_sweep', 'evaluate_system', 'held_out_sampler', 'true_fdp_surface',
    'write_aggregate_csv', 'write_results_csv', 'write_surface_csv',
    'ExternalReport', 'select_external',
    'ExternalDataset', 'ingest_csv', 'read_truth_file',
    'SurfaceReport', 'surface_from_evaluations', 'surface_report',
    'TrainingSetSpec', 'build_training_set', 'system_training_records', 'training_records_for', 'trex_seed',
]
