"""
Sparse linear systems y = X beta + eps with known ground truth.

Every generator here is a pure function of its arguments and seed.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from trex_toolkit.exceptions import DegenerateInputError, ParameterError
from trex_toolkit.utils import derive_seed

from .distributions import (
    TRAINING_FAMILIES,
    DistributionSpec,
    Family,
    random_spec,
    sample_design,
    validate_params,
)

logger = logging.getLogger(__name__)

DEFAULT_MAGNITUDE_RANGE = (1.0, 3.0)
MAX_COLUMN_REDRAWS = 100


@dataclass(frozen=True)
class SystemConfig:
    n: int
    p: int
    sparsity: int
    snr: float
    distribution: DistributionSpec
    beta_magnitude_range: Tuple[float, float] = DEFAULT_MAGNITUDE_RANGE

    def validate(self) -> None:
        if self.n < 2:
            raise ParameterError(f"n must be >= 2, got {self.n}")
        if self.p < 1:
            raise ParameterError(f"p must be >= 1, got {self.p}")
        if not 0 <= self.sparsity <= self.p:
            raise ParameterError(f"sparsity must lie in [0, p={self.p}], got {self.sparsity}")
        if not self.snr > 0:
            raise ParameterError(f"snr must be > 0, got {self.snr}")
        lo, hi = self.beta_magnitude_range
        if not 0 < lo <= hi:
            raise ParameterError(f"beta magnitude range must satisfy 0 < lo <= hi, got {self.beta_magnitude_range}")
        validate_params(self.distribution)

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'p': self.p,
            's': self.sparsity,
            'snr': self.snr,
            'beta_magnitude_range': list(self.beta_magnitude_range),
            'distribution': self.distribution.to_dict(),
        }

    @classmethod
    def from_dict(cls, data) -> 'SystemConfig':
        return cls(
            n=int(data['n']),
            p=int(data['p']),
            sparsity=int(data['s']),
            snr=float(data['snr']),
            beta_magnitude_range=tuple(float(x) for x in data['beta_magnitude_range']),
            distribution=DistributionSpec.from_dict(data['distribution']),
        )


@dataclass
class SyntheticSystem:
    X: np.ndarray
    y: np.ndarray
    beta: np.ndarray
    active_set: Tuple[int, ...]
    noise_std: float
    config: SystemConfig
    seed: int
    index: Optional[int] = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def draw_sparse_beta(p: int, s: int, magnitude_range, seed: int):
    """
    Coefficient vector with exactly ``s`` nonzeros at uniformly chosen indices.

    Magnitudes are uniform on ``magnitude_range`` and signs are uniform +-1.
    Returns ``(beta, active_set)`` with the active set sorted ascending.
    """
    lo, hi = magnitude_range
    if s < 0 or s > p:
        raise ParameterError(f"Sparsity s={s} must lie in [0, p={p}]")
    if not 0 < lo <= hi:
        raise ParameterError(f"Magnitude range must satisfy 0 < lo <= hi, got ({lo}, {hi})")

    rng = np.random.default_rng(seed)
    beta = np.zeros(p)
    if s == 0:
        return beta, ()

    support = np.sort(rng.choice(p, size=s, replace=False))
    magnitudes = rng.uniform(lo, hi, size=s)
    signs = rng.choice(np.array([-1.0, 1.0]), size=s)
    beta[support] = signs * magnitudes
    return beta, tuple(int(j) for j in support)


def compute_noise_std(X: np.ndarray, beta: np.ndarray, snr: float) -> float:
    """sigma with sigma^2 = var(X beta) / snr; 1.0 for a signal without variance."""
    if not snr > 0:
        raise ParameterError(f"snr must be > 0, got {snr}")
    signal_var = float(np.var(X @ beta))
    if signal_var == 0.0:
        return 1.0
    return float(np.sqrt(signal_var / snr))


def _redraw_constant_columns(X, dist, seed):
    for j in range(X.shape[1]):
        attempt = 0
        while np.ptp(X[:, j]) == 0:
            if attempt >= MAX_COLUMN_REDRAWS:
                raise DegenerateInputError(
                    f"Column {j} stayed constant after {MAX_COLUMN_REDRAWS} redraws "
                    f"({dist.family.value} {dict(dist.params)})",
                    column=j,
                )
            X[:, j] = sample_design(dist, X.shape[0], 1, derive_seed(seed, 'redraw', j, attempt))[:, 0]
            attempt += 1
        if attempt:
            logger.warning(f"Redrew constant column {j} ({attempt} attempts, {dist.family.value})")
    return X


def generate_system(cfg: SystemConfig, seed: int, index: Optional[int] = None) -> SyntheticSystem:
    cfg.validate()

    X = sample_design(cfg.distribution, cfg.n, cfg.p, derive_seed(seed, 'design'))
    X = _redraw_constant_columns(X, cfg.distribution, seed)

    beta, active_set = draw_sparse_beta(cfg.p, cfg.sparsity, cfg.beta_magnitude_range,
                                        derive_seed(seed, 'beta'))
    noise_std = compute_noise_std(X, beta, cfg.snr)

    noise = np.random.default_rng(derive_seed(seed, 'noise')).normal(0.0, noise_std, size=cfg.n)
    y = X @ beta + noise

    return SyntheticSystem(
        X=X,
        y=y,
        beta=beta,
        active_set=active_set,
        noise_std=noise_std,
        config=cfg,
        seed=seed,
        index=index,
    )


def case_control_response(y: np.ndarray, case_fraction: float = 2.0 / 3.0) -> np.ndarray:
    """Binary status: the top ``case_fraction`` share of responses become cases (1)."""
    if not 0.0 < case_fraction < 1.0:
        raise ParameterError(f"case_fraction must lie in (0, 1), got {case_fraction}")
    n_cases = int(round(case_fraction * y.size))
    order = np.argsort(-y, kind='stable')
    status = np.zeros(y.size)
    status[order[:n_cases]] = 1.0
    return status


@dataclass
class CorpusSampler:
    """
    Draws one SystemConfig per corpus index.

    The family is drawn uniformly from ``families`` and its hyperparameters
    from the documented ranges. SNR is drawn from ``snr_values`` unless
    ``cycle_snr`` is set, in which case index ``i`` gets
    ``snr_values[i % len(snr_values)]`` (used for SNR sweeps).
    """
    n: int
    p: int
    sparsity: int
    snr_values: Sequence[float]
    families: Sequence[Family] = field(default_factory=lambda: list(TRAINING_FAMILIES))
    beta_magnitude_range: Tuple[float, float] = DEFAULT_MAGNITUDE_RANGE
    cycle_snr: bool = False

    def __post_init__(self):
        if not self.families:
            raise ParameterError("CorpusSampler needs at least one family")
        if not self.snr_values:
            raise ParameterError("CorpusSampler needs at least one SNR value")
        self.families = [Family(f) for f in self.families]

    def __call__(self, index: int, rng: np.random.Generator) -> SystemConfig:
        family = self.families[int(rng.integers(len(self.families)))]
        distribution = random_spec(family, rng)
        if self.cycle_snr:
            snr = self.snr_values[index % len(self.snr_values)]
        else:
            snr = self.snr_values[int(rng.integers(len(self.snr_values)))]
        return SystemConfig(
            n=self.n,
            p=self.p,
            sparsity=self.sparsity,
            snr=float(snr),
            distribution=distribution,
            beta_magnitude_range=tuple(self.beta_magnitude_range),
        )


@dataclass(frozen=True)
class CorpusEntry:
    """One planned corpus member: enough to regenerate the system anywhere."""
    index: int
    seed: int
    config: SystemConfig

    def generate(self) -> SyntheticSystem:
        return generate_system(self.config, self.seed, index=self.index)


def plan_corpus(sampler: Callable[[int, np.random.Generator], SystemConfig],
                count: int, master_seed: int) -> list:
    """Per-system seeds and configs, derived from ``master_seed`` and the index only."""
    if count < 1:
        raise ParameterError(f"Corpus count must be >= 1, got {count}")
    entries = []
    for index in range(count):
        seed = derive_seed(master_seed, 'system', index)
        cfg = sampler(index, np.random.default_rng(derive_seed(seed, 'config')))
        entries.append(CorpusEntry(index=index, seed=seed, config=cfg))
    return entries


def generate_corpus(sampler, count: int, master_seed: int) -> list:
    corpus = []
    for entry in plan_corpus(sampler, count, master_seed):
        corpus.append(entry.generate())
        if (entry.index + 1) % 100 == 0 or entry.index + 1 == count:
            logger.info(f"Generated system {entry.index + 1}/{count}")
    return corpus


