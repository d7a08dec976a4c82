from .calibration import (
    AnalyticalEstimator,
    CalibrationGrid,
    SelectionResult,
    analytical_fdp,
    calibrate,
    default_v_grid,
    dummy_count_bound,
    estimate_surface,
    select_variables,
)
from .lars import Entry, ExperimentResult, candidate_set, lars_run
from .metrics import fdp_tpp
from .occurrences import (
    DEFLATION_RULES,
    OccurrenceTable,
    build_occurrence_table,
    deflate_occurrences,
    relative_occurrences,
)
from .reports import selection_report, write_occurrence_csv, write_selection_report
from .selector import TRexOutcome, generate_dummies, occurrence_table, run_experiments, trex_select
from .standardize import StandardizedData, standardize, standardize_columns

__all__ = [
    'AnalyticalEstimator', 'CalibrationGrid', 'SelectionResult', 'analytical_fdp', 'calibrate',
    'default_v_grid', 'dummy_count_bound', 'estimate_surface', 'select_variables',
    'Entry', 'ExperimentResult', 'candidate_set', 'lars_run',
    'fdp_tpp',
    'DEFLATION_RULES', 'OccurrenceTable', 'build_occurrence_table', 'deflate_occurrences',
    'relative_occurrences',
    'selection_report', 'write_occurrence_csv', 'write_selection_report',
    'TRexOutcome', 'generate_dummies', 'occurrence_table', 'run_experiments', 'trex_select',
    'StandardizedData', 'standardize', 'standardize_columns',
]
