"""
Shared plumbing for the toolkit's management commands: common flags,
config layering and validation, staged outputs, the run manifest, and the
mapping of toolkit errors onto exit codes.
"""
import logging
from enum import Enum
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.utils import timezone

from . import __version__
from .config import merge_run_config, read_config_file
from .exceptions import NumericalError, ParameterError, ToolkitError, exit_code_for
from .utils import staged_output, write_json

logger = logging.getLogger(__name__)

RUN_MANIFEST = 'run_manifest.json'


def _list_of(item_type):
    def parse(text):
        return [item_type(part) for part in (p.strip() for p in text.split(',')) if part]
    parse.__name__ = f"{item_type.__name__} list"
    return parse


# config key -> (flag, type, help)
CONFIG_FLAGS = {
    'K': ('--K', int, 'Number of random experiments'),
    'L': ('--L', int, 'Number of dummies per experiment (default: p)'),
    'T_max': ('--T-max', int, 'Largest number of included dummies considered'),
    'v_grid': ('--v-grid', _list_of(float), 'Comma-separated voting thresholds in [0.5, 1)'),
    'alpha': ('--alpha', float, 'Target FDR level in (0, 1]'),
    'deflation': ('--deflation', str, 'Deflation rule for the analytical estimator: linear or dummy_ratio'),
    'n': ('--n', int, 'Samples per synthetic system'),
    'p': ('--p', int, 'Candidate predictors per synthetic system'),
    's': ('--s', int, 'True actives per synthetic system'),
    'snr_values': ('--snr-values', _list_of(float), 'Comma-separated signal-to-noise ratios'),
    'beta_magnitude_range': ('--beta-magnitude-range', _list_of(float), 'Low,high magnitude of active coefficients'),
    'count': ('--count', int, 'Number of synthetic systems'),
    'families': ('--families', _list_of(str), 'Comma-separated design families (default: the training families)'),
    'epochs': ('--epochs', int, 'Training epochs'),
    'lr': ('--lr', float, 'Adam learning rate'),
    'batch_size': ('--batch-size', int, 'Mini-batch size'),
    'loss_weight': ('--w', float, 'Asymmetric loss weight on underestimation (> 1)'),
    'hidden_dims': ('--hidden-dims', _list_of(int), 'Comma-separated hidden layer widths'),
    'p_max': ('--p-max', int, 'Network input width for Phi (default: largest p in the training set)'),
}


def _format_default(value) -> str:
    if value is None:
        return 'none'
    if isinstance(value, (list, tuple)):
        return ','.join(str(v) for v in value)
    return str(value)


def _json_safe(value):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, np.generic):
        return value.item()
    return value


class ToolkitCommand(BaseCommand):
    """
    Base for every subcommand.

    Subclasses list the config keys they accept in ``config_keys`` and
    implement ``execute_run(config, options, staged)``, writing outputs only
    through ``staged.path(name)``.
    """
    config_keys = ()
    requires_seed = True
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Key-value config file; flags override its values')
        parser.add_argument('--seed', type=int, help='Master seed (required for stochastic subcommands)')
        parser.add_argument('--output-dir', default='output', help='Directory for the output set (default: output)')
        parser.add_argument('--threads', type=int,
                            help=f"Worker cap (default: {settings.TREX_DEFAULTS['threads']})")
        for key in self.config_keys:
            flag, parse, text = CONFIG_FLAGS[key]
            default = settings.TREX_DEFAULTS.get(key)
            parser.add_argument(flag, dest=key, type=parse, help=f"{text} (default: {_format_default(default)})")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def load_config(self, options) -> dict:
        from pipeline.forms import validate_run_config

        file_values = read_config_file(options['config']) if options.get('config') else {}
        overrides = {key: options.get(key) for key in self.config_keys}
        overrides['seed'] = options.get('seed')
        overrides['threads'] = options.get('threads')
        config = validate_run_config(merge_run_config(file_values, overrides))
        if self.requires_seed and config.get('seed') is None:
            raise ParameterError(f"{self.command_name()} needs a master seed (--seed or 'seed' in the config file)")
        return config

    def command_name(self) -> str:
        return self.__module__.rsplit('.', 1)[-1]

    def handle(self, *args, **options):
        started = timezone.now()
        try:
            config = self.load_config(options)
            self.check_options(config, options)
            with staged_output(options['output_dir']) as staged:
                summary = self.execute_run(config, options, staged) or {}
                write_json(staged.path(RUN_MANIFEST), {
                    'command': self.command_name(),
                    'version': __version__,
                    'seed': config.get('seed'),
                    'config': _json_safe({k: v for k, v in config.items() if k != 'seed'}),
                    'inputs': _json_safe(self.manifest_inputs(options)),
                    'summary': _json_safe(summary),
                    'started_at': started.isoformat(),
                    'finished_at': timezone.now().isoformat(),
                })
        except ToolkitError as e:
            logger.debug(f"{self.command_name()} failed", exc_info=True)
            raise CommandError(str(e), returncode=exit_code_for(e)) from e
        except np.linalg.LinAlgError as e:
            error = NumericalError(f"Linear algebra failure: {e}")
            raise CommandError(str(error), returncode=exit_code_for(error)) from e

        self.stdout.write(self.style.SUCCESS(
            f"{self.command_name()} finished; outputs in {options['output_dir']}"
        ))
        for key, value in summary.items():
            self.stdout.write(f"  {key}: {value}")

    def check_options(self, config, options):
        """Validate command-specific options before any work starts."""

    def manifest_inputs(self, options) -> dict:
        return {}

    def execute_run(self, config, options, staged):
        raise NotImplementedError
