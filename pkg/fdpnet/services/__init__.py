from .estimator import LearnedEstimator, predict_fdp
from .features import FeatureSpec, featurize, featurize_rows
from .loss import LossSpec, asym_loss, asym_loss_grad
from .mlp import (
    DEFAULT_HIDDEN_DIMS,
    MlpParams,
    backprop,
    init_params,
    mlp_forward,
    mlp_forward_batch,
    zero_params,
)
from .optimizer import OptimizerState, adam_step
from .persistence import ModelStore, load_model, save_model
from .training import (
    TrainingRecord,
    TrainingRun,
    TrainingSet,
    read_training_records,
    train,
    write_training_records,
)

__all__ = [
    'LearnedEstimator', 'predict_fdp',
    'FeatureSpec', 'featurize', 'featurize_rows',
    'LossSpec', 'asym_loss', 'asym_loss_grad',
    'DEFAULT_HIDDEN_DIMS', 'MlpParams', 'backprop', 'init_params', 'mlp_forward', 'mlp_forward_batch',
    'zero_params',
    'OptimizerState', 'adam_step',
    'ModelStore', 'load_model', 'save_model',
    'TrainingRecord', 'TrainingRun', 'TrainingSet', 'read_training_records', 'train',
    'write_training_records',
]
