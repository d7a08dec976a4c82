"""
CSV contracts of the evaluation outputs. Floats are written in their
shortest round-trip form so repeat runs are byte-identical.
"""
import csv
from typing import List

from trex_toolkit.utils import format_float

from .evaluation import AggregateRow, EvaluationRecord
from .surface import SurfaceReport

RESULTS_COLUMNS = ['method', 'snr', 'seed', 'fdp', 'tpp', 'v_star', 'T_star', 'n_selected', 'feasible']
AGGREGATE_COLUMNS = ['method', 'snr', 'fdr_mean', 'fdr_std', 'tpr_mean', 'tpr_std', 'n_systems']
SURFACE_COLUMNS = ['v', 'T', 'mean_pred_fdp', 'mean_true_fdp']


def _optional(value, fmt=str) -> str:
    return '' if value is None else fmt(value)


def write_results_csv(records: List[EvaluationRecord], path) -> None:
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(RESULTS_COLUMNS)
        for r in records:
            writer.writerow([
                r.method,
                format_float(r.snr),
                r.seed,
                format_float(r.fdp),
                format_float(r.tpp),
                _optional(r.v_star, format_float),
                _optional(r.T_star),
                r.n_selected,
                'true' if r.feasible else 'false',
            ])


def write_aggregate_csv(rows: List[AggregateRow], path) -> None:
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(AGGREGATE_COLUMNS)
        for r in rows:
            writer.writerow([
                r.method,
                format_float(r.snr),
                format_float(r.fdr_mean),
                format_float(r.fdr_std),
                format_float(r.tpr_mean),
                format_float(r.tpr_std),
                r.n_systems,
            ])


def write_surface_csv(report: SurfaceReport, path) -> None:
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(SURFACE_COLUMNS)
        for v, T, pred, true in report.rows():
            writer.writerow([format_float(v), T, format_float(pred), format_float(true)])
