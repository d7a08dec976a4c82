import logging

from fdpnet.services.estimator import LearnedEstimator
from fdpnet.services.persistence import load_model
from pipeline.services.evaluation import evaluate_sweep, held_out_sampler
from pipeline.services.exports import write_aggregate_csv, write_results_csv, write_surface_csv
from pipeline.services.surface import surface_from_evaluations
from synthdata.services.generator import plan_corpus
from synthdata.services.manifest import read_manifest
from trex.services.calibration import AnalyticalEstimator, CalibrationGrid
from trex_toolkit.commands import ToolkitCommand
from trex_toolkit.exceptions import DataValidationError, ParameterError

logger = logging.getLogger(__name__)

METHODS = ('analytical', 'learned')
RESULTS = 'results.csv'
AGGREGATE = 'aggregate.csv'
SURFACE = 'surface.csv'


class Command(ToolkitCommand):
    help = ('Evaluates the analytical and learned FDP estimators on a held-out corpus: '
            'per-system results, mean/std aggregates per (method, SNR), and the mean '
            'predicted vs. true FDP surface.')
    config_keys = ('K', 'L', 'T_max', 'v_grid', 'alpha', 'deflation', 'n', 'p', 's', 'snr_values',
                   'beta_magnitude_range', 'count')

    def add_command_arguments(self, parser):
        parser.add_argument('--model', help='Model file written by train (required for the learned method)')
        parser.add_argument(
            '--methods',
            default=','.join(METHODS),
            help=f"Comma-separated estimators to compare (default: {','.join(METHODS)})",
        )
        parser.add_argument(
            '--corpus',
            help='Corpus manifest written by datagen; without it a Gaussian-mixture corpus '
                 'with the configured SNR values is planned',
        )

    def _methods(self, options):
        methods = [m.strip() for m in options['methods'].split(',') if m.strip()]
        unknown = [m for m in methods if m not in METHODS]
        if not methods or unknown:
            raise ParameterError(f"--methods must name estimators from {', '.join(METHODS)}, got {options['methods']!r}")
        return list(dict.fromkeys(methods))

    def check_options(self, config, options):
        methods = self._methods(options)
        if 'learned' in methods and not options.get('model'):
            raise ParameterError("evaluate: the learned method needs --model PATH (a model file written by train)")
        if config['alpha'] is None:
            raise ParameterError("evaluate: --alpha is required (target FDR in (0, 1])")

    def manifest_inputs(self, options):
        return {'model': options.get('model'), 'corpus': options.get('corpus'), 'methods': options['methods']}

    def execute_run(self, config, options, staged):
        methods = self._methods(options)
        grid = CalibrationGrid(v_grid=tuple(config['v_grid']), T_max=config['T_max'], alpha=config['alpha'])

        estimators = {}
        for method in methods:
            if method == 'analytical':
                estimators[method] = AnalyticalEstimator()
            else:
                estimators[method] = LearnedEstimator(load_model(options['model']))

        if options.get('corpus'):
            entries = read_manifest(options['corpus'])
            if not entries:
                raise DataValidationError(f"{options['corpus']}: corpus manifest has no systems")
        else:
            sampler = held_out_sampler(config['n'], config['p'], config['s'], config['snr_values'],
                                       beta_magnitude_range=config['beta_magnitude_range'])
            entries = plan_corpus(sampler, config['count'], config['seed'])

        sweep = evaluate_sweep(entries, estimators, grid, config['K'], config['L'], config['seed'],
                               deflation=config['deflation'], threads=config['threads'],
                               model_path=options.get('model'))
        surface_method = 'learned' if 'learned' in estimators else methods[0]
        surface = surface_from_evaluations(sweep.evaluations, surface_method, grid)

        write_results_csv(sweep.records, staged.path(RESULTS))
        write_aggregate_csv(sweep.aggregates, staged.path(AGGREGATE))
        write_surface_csv(surface, staged.path(SURFACE))

        summary = {'systems': len(entries), 'records': len(sweep.records)}
        for row in sweep.aggregates:
            logger.info(f"{row.method} snr={row.snr:g}: FDR {row.fdr_mean:.3f} +/- {row.fdr_std:.3f}, "
                        f"TPR {row.tpr_mean:.3f} +/- {row.tpr_std:.3f} over {row.n_systems} systems")
        summary[f'{surface_method}_overestimation_fraction'] = round(surface.overestimation_fraction, 6)
        return summary
