"""
Dense ReLU network with a sigmoid output unit, written directly on numpy.

Weights are stored as (fan_in, fan_out) matrices so a batch of feature rows
goes through ``rows @ W + b``.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from scipy.special import expit

from trex_toolkit.exceptions import DimensionError, ParameterError

from .features import FeatureSpec
from .loss import LossSpec, asym_loss, asym_loss_grad

logger = logging.getLogger(__name__)

DEFAULT_HIDDEN_DIMS = (128, 64, 32)

# Keeps sigmoid outputs strictly inside (0, 1) once they round to an endpoint.
OUTPUT_EPS = np.finfo(float).eps


@dataclass
class MlpParams:
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    p_max: int
    T_max_norm: float
    loss_weight: float = 1.1
    training: dict = field(default_factory=dict)

    @property
    def layer_dims(self) -> List[int]:
        return [self.weights[0].shape[0]] + [W.shape[1] for W in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def feature_spec(self) -> FeatureSpec:
        return FeatureSpec(p_max=self.p_max, T_max_norm=self.T_max_norm)

    def validate(self) -> None:
        if len(self.weights) != len(self.biases) or not self.weights:
            raise DimensionError("Weights and biases must be non-empty lists of equal length")
        if self.input_dim != self.p_max + 3:
            raise DimensionError(f"Input dim {self.input_dim} does not match p_max + 3 = {self.p_max + 3}")
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.ndim != 2 or b.shape != (W.shape[1],):
                raise DimensionError(f"Layer {i}: weight {W.shape} and bias {b.shape} disagree")
            if i and W.shape[0] != self.weights[i - 1].shape[1]:
                raise DimensionError(f"Layer {i} expects {W.shape[0]} inputs, previous layer gives "
                                     f"{self.weights[i - 1].shape[1]}")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise ParameterError(f"Layer {i} holds non-finite values")
        if self.weights[-1].shape[1] != 1:
            raise DimensionError("The output layer must have a single unit")

    def arrays(self) -> List[np.ndarray]:
        """Flat view in storage order: W0, b0, W1, b1, ..."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out.extend((W, b))
        return out

    def with_arrays(self, arrays: Sequence[np.ndarray]) -> 'MlpParams':
        return MlpParams(
            weights=[np.array(a) for a in arrays[0::2]],
            biases=[np.array(a) for a in arrays[1::2]],
            p_max=self.p_max,
            T_max_norm=self.T_max_norm,
            loss_weight=self.loss_weight,
            training=dict(self.training),
        )

    def copy(self) -> 'MlpParams':
        return self.with_arrays(self.arrays())


def init_params(meta: FeatureSpec, seed: int, hidden_dims=DEFAULT_HIDDEN_DIMS,
                loss_weight: float = 1.1) -> MlpParams:
    """He-style uniform init, U(-sqrt(6/fan_in), sqrt(6/fan_in)); zero biases."""
    rng = np.random.default_rng(seed)
    dims = [meta.input_dim] + list(hidden_dims) + [1]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights=weights, biases=biases, p_max=meta.p_max, T_max_norm=meta.T_max_norm,
                     loss_weight=loss_weight)


def zero_params(meta: FeatureSpec, hidden_dims=DEFAULT_HIDDEN_DIMS, loss_weight: float = 1.1) -> MlpParams:
    dims = [meta.input_dim] + list(hidden_dims) + [1]
    return MlpParams(
        weights=[np.zeros((a, b)) for a, b in zip(dims[:-1], dims[1:])],
        biases=[np.zeros(b) for b in dims[1:]],
        p_max=meta.p_max,
        T_max_norm=meta.T_max_norm,
        loss_weight=loss_weight,
    )


def _check_input(params: MlpParams, rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[None, :]
    if rows.shape[1] != params.input_dim:
        raise DimensionError(f"Feature length {rows.shape[1]} does not match input dim {params.input_dim}")
    return rows


def _forward_cache(params: MlpParams, rows: np.ndarray):
    activations = [rows]
    pre_activations = []
    a = rows
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ W + b
        pre_activations.append(z)
        if i < last:
            a = np.maximum(z, 0.0)
            activations.append(a)
    out = expit(pre_activations[-1][:, 0])
    return activations, pre_activations, np.clip(out, OUTPUT_EPS, 1.0 - OUTPUT_EPS)


def mlp_forward_batch(params: MlpParams, rows) -> np.ndarray:
    rows = _check_input(params, rows)
    _, _, out = _forward_cache(params, rows)
    return out


def mlp_forward(params: MlpParams, features) -> float:
    features = np.asarray(features, dtype=float)
    if features.ndim != 1:
        raise DimensionError(f"Expected a single feature vector, got shape {features.shape}")
    return float(mlp_forward_batch(params, features)[0])


def backprop(params: MlpParams, rows, labels, spec: LossSpec):
    """
    Exact gradients of the mean asymmetric loss over the batch.

    Returns ``(grads, mean_loss)`` with ``grads`` ordered like
    ``params.arrays()``.
    """
    rows = _check_input(params, rows)
    labels = np.asarray(labels, dtype=float).ravel()
    batch = rows.shape[0]
    if batch == 0:
        raise ParameterError("Batch must not be empty")
    if labels.size != batch:
        raise DimensionError(f"{labels.size} labels for {batch} feature rows")

    activations, pre_activations, out = _forward_cache(params, rows)
    mean_loss = float(np.mean(asym_loss(out, labels, spec)))

    sig = expit(pre_activations[-1][:, 0])
    delta = (asym_loss_grad(out, labels, spec) / batch * sig * (1.0 - sig))[:, None]

    n_layers = len(params.weights)
    grads_W = [None] * n_layers
    grads_b = [None] * n_layers
    for i in reversed(range(n_layers)):
        grads_W[i] = activations[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ params.weights[i].T) * (pre_activations[i - 1] > 0)

    grads = []
    for gW, gb in zip(grads_W, grads_b):
        grads.extend((gW, gb))
    return grads, mean_loss
