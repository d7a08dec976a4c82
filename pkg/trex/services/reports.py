import csv

from trex_toolkit.utils import format_float, write_json

from .calibration import SelectionResult
from .occurrences import OccurrenceTable

OCCURRENCE_COLUMNS = ['T', 'j', 'phi', 'phi_deflated']


def write_occurrence_csv(table: OccurrenceTable, path) -> None:
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(OCCURRENCE_COLUMNS)
        for t_idx in range(table.T_max):
            for j in range(table.p):
                writer.writerow([
                    t_idx + 1,
                    j,
                    format_float(table.phi[t_idx, j]),
                    format_float(table.phi_deflated[t_idx, j]),
                ])


def selection_report(selection: SelectionResult, seed: int, **extra) -> dict:
    report = selection.to_dict()
    report['seed'] = seed
    report.update(extra)
    return report


def write_selection_report(report: dict, path) -> None:
    write_json(path, report)
