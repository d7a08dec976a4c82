import csv

from fdpnet.services.features import FeatureSpec
from fdpnet.services.loss import LossSpec
from fdpnet.services.persistence import save_model
from fdpnet.services.training import TrainingSet, read_training_records, train
from trex_toolkit.commands import ToolkitCommand
from trex_toolkit.exceptions import DataValidationError, DimensionError
from trex_toolkit.utils import format_float

MODEL_FILE = 'fdp_model.bin'
LOSS_TRACE = 'loss_trace.csv'


class Command(ToolkitCommand):
    help = ('Trains the FDP network on a training set with the asymmetric loss and Adam; '
            'writes the model file and the per-epoch loss trace.')
    config_keys = ('epochs', 'lr', 'batch_size', 'loss_weight', 'hidden_dims', 'p_max')

    def add_command_arguments(self, parser):
        parser.add_argument('--train-set', required=True, help='Training set written by build-train-set')

    def manifest_inputs(self, options):
        return {'train_set': options['train_set']}

    def execute_run(self, config, options, staged):
        records = read_training_records(options['train_set'])
        if not records:
            raise DataValidationError(f"{options['train_set']}: training set is empty")

        widest = max(r.p for r in records)
        p_max = config['p_max'] or widest
        if widest > p_max:
            raise DimensionError(f"Training set has p={widest} > p_max={p_max}")
        meta = FeatureSpec(p_max=p_max, T_max_norm=float(max(r.T for r in records)))

        run = train(
            TrainingSet.from_records(records, meta),
            epochs=config['epochs'],
            lr=config['lr'],
            batch_size=config['batch_size'],
            spec=LossSpec(w=config['loss_weight']),
            seed=config['seed'],
            hidden_dims=tuple(config['hidden_dims']),
        )

        save_model(run.params, staged.path(MODEL_FILE))
        with open(staged.path(LOSS_TRACE), 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(['epoch', 'mean_loss'])
            for epoch, loss in enumerate(run.loss_trace, start=1):
                writer.writerow([epoch, format_float(loss)])

        return {
            'examples': len(records),
            'layer_dims': 'x'.join(str(d) for d in run.params.layer_dims),
            'final_loss': format_float(run.loss_trace[-1]) if run.loss_trace else 'n/a',
            'model': MODEL_FILE,
        }
