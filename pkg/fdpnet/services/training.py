"""
Training data containers and the mini-batch training loop.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from trex_toolkit.exceptions import DataValidationError, DimensionError, ParameterError
from trex_toolkit.utils import derive_seed, format_float

from .features import FeatureSpec, featurize_rows
from .loss import LossSpec
from .mlp import DEFAULT_HIDDEN_DIMS, MlpParams, backprop, init_params
from .optimizer import OptimizerState, adam_step

logger = logging.getLogger(__name__)


@dataclass
class TrainingRecord:
    """Raw (Phi row, v, T, L) with its true-FDP label and provenance."""
    label: float
    v: float
    T: int
    L: int
    phi_row: np.ndarray
    system: int = -1

    @property
    def p(self) -> int:
        return int(self.phi_row.size)

    def to_payload(self) -> dict:
        return {
            'label': self.label,
            'v': self.v,
            'T': self.T,
            'L': self.L,
            'phi_row': [float(x) for x in self.phi_row],
            'system': self.system,
        }

    @classmethod
    def from_payload(cls, data) -> 'TrainingRecord':
        return cls(
            label=float(data['label']),
            v=float(data['v']),
            T=int(data['T']),
            L=int(data['L']),
            phi_row=np.asarray(data['phi_row'], dtype=float),
            system=int(data.get('system', -1)),
        )


@dataclass
class TrainingSet:
    """Featurized examples: one row of ``features`` per label."""
    features: np.ndarray
    labels: np.ndarray
    meta: FeatureSpec
    provenance: List[tuple] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.labels.size)

    @classmethod
    def from_records(cls, records: Sequence[TrainingRecord], meta: FeatureSpec) -> 'TrainingSet':
        if not records:
            return cls(features=np.zeros((0, meta.input_dim)), labels=np.zeros(0), meta=meta)
        widest = max(r.p for r in records)
        if widest > meta.p_max:
            raise DimensionError(f"Training records have p={widest} > p_max={meta.p_max}")
        padded = np.zeros((len(records), meta.p_max))
        for i, record in enumerate(records):
            padded[i, :record.p] = record.phi_row
        features = featurize_rows(
            padded,
            [r.v for r in records],
            [r.T for r in records],
            [r.L for r in records],
            [r.p for r in records],
            meta,
        )
        labels = np.array([r.label for r in records], dtype=float)
        if not np.all((labels >= 0) & (labels <= 1)):
            raise DataValidationError("Training labels must be finite and lie in [0, 1]")
        if not np.all(np.isfinite(features)):
            raise DataValidationError("Training features must be finite")
        provenance = [(r.system, r.v, r.T, r.L) for r in records]
        return cls(features=features, labels=labels, meta=meta, provenance=provenance)


def write_training_records(records: Sequence[TrainingRecord], path) -> None:
    """One record per line: label, v, T, L, p, then the p Phi values."""
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        for r in records:
            writer.writerow(
                [format_float(r.label), format_float(r.v), r.T, r.L, r.p]
                + [format_float(x) for x in r.phi_row]
            )


def read_training_records(path) -> List[TrainingRecord]:
    if not Path(path).exists():
        raise DataValidationError(f"Training set not found: {path}")
    try:
        text = Path(path).read_text(encoding='utf-8')
    except UnicodeDecodeError as e:
        raise DataValidationError(f"{path}: not UTF-8 text (byte {e.start}: {e.reason})") from e

    records = []
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row:
            continue
        try:
            label, v, T, L, p = float(row[0]), float(row[1]), int(row[2]), int(row[3]), int(row[4])
            phi_row = np.array([float(x) for x in row[5:]])
        except (IndexError, ValueError) as e:
            raise DataValidationError(f"{path}:{lineno}: malformed training record ({e})") from e
        if phi_row.size != p:
            raise DataValidationError(f"{path}:{lineno}: declared p={p} but found {phi_row.size} Phi values")
        if not (np.isfinite(label) and np.isfinite(v) and np.all(np.isfinite(phi_row))):
            raise DataValidationError(f"{path}:{lineno}: label, v and Phi values must be finite")
        records.append(TrainingRecord(label=label, v=v, T=T, L=L, phi_row=phi_row))
    logger.info(f"Read {len(records)} training records from {path}")
    return records


@dataclass
class TrainingRun:
    params: MlpParams
    loss_trace: List[float]


def train(dataset: TrainingSet, epochs: int, lr: float, batch_size: int, spec: LossSpec, seed: int,
          hidden_dims=DEFAULT_HIDDEN_DIMS, initial: Optional[MlpParams] = None) -> TrainingRun:
    """
    Shuffled mini-batch Adam training; a pure function of its arguments.

    ``loss_trace`` holds the mean training loss of every epoch.
    """
    if len(dataset) == 0:
        raise ParameterError("Cannot train on an empty dataset")
    if epochs < 0:
        raise ParameterError(f"epochs must be >= 0, got {epochs}")
    if batch_size < 1:
        raise ParameterError(f"batch_size must be >= 1, got {batch_size}")

    params = initial.copy() if initial is not None else init_params(
        dataset.meta, derive_seed(seed, 'init'), hidden_dims=hidden_dims, loss_weight=spec.w)
    params.loss_weight = spec.w
    params.training = {
        'epochs': epochs,
        'lr': lr,
        'batch_size': batch_size,
        'seed': seed,
        'examples': len(dataset),
    }
    params.validate()

    state = OptimizerState.for_params(params, lr=lr)
    shuffle_rng = np.random.default_rng(derive_seed(seed, 'shuffle'))
    loss_trace = []

    for epoch in range(1, epochs + 1):
        order = shuffle_rng.permutation(len(dataset))
        weighted_loss = 0.0
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            grads, batch_loss = backprop(params, dataset.features[idx], dataset.labels[idx], spec)
            params, state = adam_step(params, grads, state)
            weighted_loss += batch_loss * idx.size
        epoch_loss = weighted_loss / len(dataset)
        loss_trace.append(epoch_loss)
        logger.info(f"Epoch {epoch}/{epochs}: mean loss {epoch_loss:.6g}")

    return TrainingRun(params=params, loss_trace=loss_trace)
