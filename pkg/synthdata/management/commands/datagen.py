import logging

from synthdata.services.distributions import TRAINING_FAMILIES, Family
from synthdata.services.generator import CorpusSampler, case_control_response, plan_corpus
from synthdata.services.manifest import dump_system_csv, write_manifest
from trex_toolkit.commands import ToolkitCommand

logger = logging.getLogger(__name__)

CORPUS_MANIFEST = 'corpus_manifest.jsonl'


class Command(ToolkitCommand):
    help = ('Plans a synthetic corpus and writes its manifest (one JSON line per system: family, '
            'parameters, shape, SNR, seed). Systems regenerate bit-identically from the manifest.')
    config_keys = ('n', 'p', 's', 'snr_values', 'beta_magnitude_range', 'count', 'families')

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--held-out',
            action='store_true',
            help='Draw Gaussian-mixture designs and cycle the SNR values by index (evaluation corpus)',
        )
        parser.add_argument(
            '--dump-raw',
            action='store_true',
            help='Also write X, y and truth CSVs for every system under raw/',
        )
        parser.add_argument(
            '--case-control',
            action='store_true',
            help='With --dump-raw, write a binary case/control response instead of the continuous one',
        )

    def execute_run(self, config, options, staged):
        if options['held_out']:
            families = [Family.GAUSSIAN_MIXTURE]
        else:
            families = config['families'] or list(TRAINING_FAMILIES)
        sampler = CorpusSampler(
            n=config['n'],
            p=config['p'],
            sparsity=config['s'],
            snr_values=config['snr_values'],
            families=families,
            beta_magnitude_range=tuple(config['beta_magnitude_range']),
            cycle_snr=options['held_out'],
        )
        entries = plan_corpus(sampler, config['count'], config['seed'])
        write_manifest(entries, staged.path(CORPUS_MANIFEST))

        if options['dump_raw']:
            raw_dir = staged.path('raw')
            for entry in entries:
                system = entry.generate()
                y = case_control_response(system.y) if options['case_control'] else None
                dump_system_csv(system, raw_dir, y=y)
                if (entry.index + 1) % 100 == 0 or entry.index + 1 == len(entries):
                    logger.info(f"Dumped system {entry.index + 1}/{len(entries)}")
        elif options['case_control']:
            self.stdout.write(self.style.WARNING('--case-control only affects --dump-raw output; ignored'))

        return {
            'systems': len(entries),
            'families': ','.join(f.value for f in sampler.families),
            'manifest': CORPUS_MANIFEST,
        }
