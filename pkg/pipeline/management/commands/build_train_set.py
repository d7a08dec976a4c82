from fdpnet.services.training import write_training_records
from pipeline.services.training_set import TrainingSetSpec, build_training_set, training_records_for
from synthdata.services.distributions import TRAINING_FAMILIES
from synthdata.services.generator import CorpusSampler
from synthdata.services.manifest import read_manifest
from trex_toolkit.commands import ToolkitCommand
from trex_toolkit.exceptions import DataValidationError

TRAIN_SET = 'train_set.csv'


class Command(ToolkitCommand):
    help = ('Runs T-Rex on every corpus system once and writes one labelled example '
            '(true FDP, v, T, L, Phi row) per (v, T) grid cell.')
    config_keys = ('K', 'L', 'T_max', 'v_grid', 'n', 'p', 's', 'snr_values', 'beta_magnitude_range',
                   'count', 'families')

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--corpus',
            help='Corpus manifest written by datagen; without it a corpus is planned from the config',
        )

    def manifest_inputs(self, options):
        return {'corpus': options.get('corpus')}

    def execute_run(self, config, options, staged):
        if options.get('corpus'):
            entries = read_manifest(options['corpus'])
            if not entries:
                raise DataValidationError(f"{options['corpus']}: corpus manifest has no systems")
            records = training_records_for(entries, config['K'], config['L'], config['T_max'], config['v_grid'],
                                           config['seed'], threads=config['threads'])
            systems = len(entries)
        else:
            sampler = CorpusSampler(
                n=config['n'],
                p=config['p'],
                sparsity=config['s'],
                snr_values=config['snr_values'],
                families=config['families'] or list(TRAINING_FAMILIES),
                beta_magnitude_range=tuple(config['beta_magnitude_range']),
            )
            spec = TrainingSetSpec(sampler=sampler, count=config['count'], K=config['K'], L=config['L'],
                                   T_max=config['T_max'], v_grid=tuple(config['v_grid']))
            records = build_training_set(spec, config['seed'], threads=config['threads'])
            systems = spec.count

        write_training_records(records, staged.path(TRAIN_SET))
        return {'systems': systems, 'examples': len(records), 'train_set': TRAIN_SET}
