from fdpnet.services.estimator import LearnedEstimator
from fdpnet.services.persistence import load_model
from pipeline.services.external import select_external
from pipeline.services.ingestion import ingest_csv
from trex.services.calibration import AnalyticalEstimator, CalibrationGrid
from trex.services.reports import write_occurrence_csv, write_selection_report
from trex_toolkit.commands import ToolkitCommand
from trex_toolkit.exceptions import ParameterError

SELECTION_REPORT = 'selection_report.json'
OCCURRENCES = 'occurrences.csv'


class Command(ToolkitCommand):
    help = ('Ingests an external dataset (numeric CSVs) and runs the calibrated T-Rex selector on it. '
            'Realized FDP/TPP are reported when a truth file is given.')
    config_keys = ('K', 'L', 'T_max', 'v_grid', 'alpha', 'deflation')

    def add_command_arguments(self, parser):
        parser.add_argument('--x', dest='x_path', required=True, help='Design matrix CSV (n rows, p columns)')
        parser.add_argument('--y', dest='y_path', required=True, help='Response CSV (one column, n rows)')
        parser.add_argument('--truth', dest='truth_path',
                            help='Optional file of true active column indices (0-based, one per line)')
        parser.add_argument('--header', action='store_true', help='The CSV files start with a header row')
        parser.add_argument('--model', help='Model file written by train; enables the learned estimator')
        parser.add_argument(
            '--method',
            choices=['analytical', 'learned'],
            help='FDP estimator used for calibration (default: learned with --model, else analytical)',
        )

    def _method(self, options):
        return options.get('method') or ('learned' if options.get('model') else 'analytical')

    def check_options(self, config, options):
        if self._method(options) == 'learned' and not options.get('model'):
            raise ParameterError("select: the learned method needs --model PATH (a model file written by train)")
        if config['alpha'] is None:
            raise ParameterError("select: --alpha is required (target FDR in (0, 1])")

    def manifest_inputs(self, options):
        return {key: options.get(key) for key in ('x_path', 'y_path', 'truth_path', 'header', 'model')}

    def execute_run(self, config, options, staged):
        method = self._method(options)
        grid = CalibrationGrid(v_grid=tuple(config['v_grid']), T_max=config['T_max'], alpha=config['alpha'])

        if method == 'learned':
            params = load_model(options['model'])
            estimator = LearnedEstimator(params)
            p_max = params.p_max
        else:
            estimator = AnalyticalEstimator()
            p_max = None

        dataset = ingest_csv(options['x_path'], options['y_path'], has_header=options['header'],
                             truth_path=options.get('truth_path'), p_max=p_max)
        report = select_external(dataset, estimator, config['K'], config['L'], grid, config['seed'],
                                 deflation=config['deflation'], threads=config['threads'])

        write_selection_report(report.to_dict(dataset, grid.alpha), staged.path(SELECTION_REPORT))
        write_occurrence_csv(report.table, staged.path(OCCURRENCES))

        summary = {
            'method': method,
            'selected': len(report.selection.selected),
            'feasible': report.selection.feasible,
            'v_star': report.selection.v_star,
            'T_star': report.selection.T_star,
        }
        if dataset.truth is not None:
            summary.update({'fdp': report.fdp, 'tpp': report.tpp})
        return summary
