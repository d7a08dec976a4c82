"""
Column distributions for synthetic design matrices.

Fourteen families feed the training corpora; the Gaussian mixture is kept
apart as the held-out test family.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

import numpy as np

from trex_toolkit.exceptions import ParameterError

logger = logging.getLogger(__name__)


class Family(str, Enum):
    BETA = 'beta'
    BINOMIAL = 'binomial'
    CAUCHY = 'cauchy'
    CHI_SQUARED = 'chisquared'
    EXPONENTIAL = 'exponential'
    GAMMA = 'gamma'
    GAUSSIAN = 'gaussian'
    GUMBEL = 'gumbel'
    LAPLACE = 'laplace'
    LOG_NORMAL = 'lognormal'
    PARETO = 'pareto'
    STUDENT_T = 'studentt'
    UNIFORM = 'uniform'
    WEIBULL = 'weibull'
    GAUSSIAN_MIXTURE = 'gaussian_mixture'


TRAINING_FAMILIES = tuple(f for f in Family if f is not Family.GAUSSIAN_MIXTURE)

GMM_COMPONENTS = 3

# Hyperparameter ranges used when a family is drawn at random.
PARAM_RANGES = {
    Family.BETA: {'a': (0.5, 5.0), 'b': (0.5, 5.0)},
    Family.BINOMIAL: {'trials': (1, 4), 'prob': (0.2, 0.5)},
    Family.CAUCHY: {'loc': (-1.0, 1.0), 'scale': (0.5, 2.0)},
    Family.CHI_SQUARED: {'df': (1.0, 10.0)},
    Family.EXPONENTIAL: {'scale': (0.5, 2.0)},
    Family.GAMMA: {'shape': (0.5, 5.0), 'scale': (0.5, 2.0)},
    Family.GAUSSIAN: {'loc': (-1.0, 1.0), 'scale': (0.5, 2.0)},
    Family.GUMBEL: {'loc': (-1.0, 1.0), 'scale': (0.5, 2.0)},
    Family.LAPLACE: {'loc': (-1.0, 1.0), 'scale': (0.5, 2.0)},
    Family.LOG_NORMAL: {'mean': (-0.5, 0.5), 'sigma': (0.25, 1.0)},
    Family.PARETO: {'a': (2.0, 5.0), 'xm': (0.5, 2.0)},
    Family.STUDENT_T: {'df': (3.0, 30.0)},
    Family.UNIFORM: {'low': (-2.0, 0.0), 'width': (0.5, 4.0)},
    Family.WEIBULL: {'a': (0.5, 5.0), 'scale': (0.5, 2.0)},
    Family.GAUSSIAN_MIXTURE: {'means': (-3.0, 3.0), 'stds': (0.5, 2.0)},
}

REQUIRED_PARAMS = {
    Family.BETA: ('a', 'b'),
    Family.BINOMIAL: ('trials', 'prob'),
    Family.CAUCHY: ('loc', 'scale'),
    Family.CHI_SQUARED: ('df',),
    Family.EXPONENTIAL: ('scale',),
    Family.GAMMA: ('shape', 'scale'),
    Family.GAUSSIAN: ('loc', 'scale'),
    Family.GUMBEL: ('loc', 'scale'),
    Family.LAPLACE: ('loc', 'scale'),
    Family.LOG_NORMAL: ('mean', 'sigma'),
    Family.PARETO: ('a', 'xm'),
    Family.STUDENT_T: ('df',),
    Family.UNIFORM: ('low', 'high'),
    Family.WEIBULL: ('a', 'scale'),
    Family.GAUSSIAN_MIXTURE: ('weights', 'means', 'stds'),
}

POSITIVE_PARAMS = {'a', 'b', 'scale', 'df', 'shape', 'sigma', 'xm'}


@dataclass(frozen=True)
class DistributionSpec:
    family: Family
    params: Mapping[str, Any] = field(default_factory=dict)
    label: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'family', Family(self.family))

    def to_dict(self) -> dict:
        params = {k: (list(v) if isinstance(v, (list, tuple, np.ndarray)) else v)
                  for k, v in self.params.items()}
        return {'family': self.family.value, 'params': params, 'label': self.label}

    @classmethod
    def from_dict(cls, data: Mapping) -> 'DistributionSpec':
        return cls(family=Family(data['family']), params=dict(data.get('params', {})),
                   label=data.get('label', ''))


def parse_family(name: str) -> Family:
    try:
        return Family(name.strip().lower().replace('-', '_'))
    except ValueError:
        valid = ', '.join(f.value for f in Family)
        raise ParameterError(f"Unknown distribution family {name!r}. Valid: {valid}")


def _require_finite(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError) as e:
        raise ParameterError(f"'{name}' must be numeric, got {value!r}") from e
    if not math.isfinite(value):
        raise ParameterError(f"'{name}' must be finite, got {value}")
    return value


def validate_params(dist: DistributionSpec) -> None:
    """Raise ParameterError when params fall outside the family's valid range."""
    family = dist.family
    params = dist.params

    missing = set(REQUIRED_PARAMS[family]) - set(params)
    if missing:
        raise ParameterError(f"Missing parameters {sorted(missing)} for '{family.value}'")

    if family is Family.GAUSSIAN_MIXTURE:
        weights = np.asarray(params['weights'], dtype=float)
        means = np.asarray(params['means'], dtype=float)
        stds = np.asarray(params['stds'], dtype=float)
        if weights.ndim != 1 or weights.size < 2:
            raise ParameterError("gaussian_mixture needs at least 2 components")
        if means.shape != weights.shape or stds.shape != weights.shape:
            raise ParameterError("gaussian_mixture weights, means and stds must have equal length")
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(means)) and np.all(np.isfinite(stds))):
            raise ParameterError("gaussian_mixture parameters must be finite")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ParameterError(f"gaussian_mixture weights must be non-negative and sum to 1, got {weights.sum()!r}")
        if np.any(stds <= 0):
            raise ParameterError("gaussian_mixture stds must be > 0")
        return

    values = {name: _require_finite(name, params[name]) for name in REQUIRED_PARAMS[family]}

    for name, value in values.items():
        if name in POSITIVE_PARAMS and value <= 0:
            raise ParameterError(f"{family.value}: '{name}' must be > 0, got {value}")

    if family is Family.BINOMIAL:
        if values['trials'] < 1 or values['trials'] != int(values['trials']):
            raise ParameterError(f"binomial: 'trials' must be a positive integer, got {params['trials']}")
        if not 0.0 <= values['prob'] <= 1.0:
            raise ParameterError(f"binomial: 'prob' must lie in [0, 1], got {values['prob']}")
    elif family is Family.UNIFORM:
        if not values['low'] < values['high']:
            raise ParameterError(f"uniform: 'high' ({values['high']}) must be > 'low' ({values['low']})")


def _draw(dist: DistributionSpec, rng: np.random.Generator, size) -> np.ndarray:
    family = dist.family
    params = dist.params

    if family is Family.BETA:
        return rng.beta(params['a'], params['b'], size=size)
    if family is Family.BINOMIAL:
        return rng.binomial(int(params['trials']), params['prob'], size=size).astype(float)
    if family is Family.CAUCHY:
        return params['loc'] + params['scale'] * rng.standard_cauchy(size=size)
    if family is Family.CHI_SQUARED:
        return rng.chisquare(params['df'], size=size)
    if family is Family.EXPONENTIAL:
        return rng.exponential(params['scale'], size=size)
    if family is Family.GAMMA:
        return rng.gamma(params['shape'], params['scale'], size=size)
    if family is Family.GAUSSIAN:
        return rng.normal(params['loc'], params['scale'], size=size)
    if family is Family.GUMBEL:
        return rng.gumbel(params['loc'], params['scale'], size=size)
    if family is Family.LAPLACE:
        return rng.laplace(params['loc'], params['scale'], size=size)
    if family is Family.LOG_NORMAL:
        return rng.lognormal(params['mean'], params['sigma'], size=size)
    if family is Family.PARETO:
        # numpy draws the Lomax form; shifting by one gives the classical Pareto.
        return (rng.pareto(params['a'], size=size) + 1.0) * params['xm']
    if family is Family.STUDENT_T:
        return rng.standard_t(params['df'], size=size)
    if family is Family.UNIFORM:
        return rng.uniform(params['low'], params['high'], size=size)
    if family is Family.WEIBULL:
        return params['scale'] * rng.weibull(params['a'], size=size)
    if family is Family.GAUSSIAN_MIXTURE:
        weights = np.asarray(params['weights'], dtype=float)
        means = np.asarray(params['means'], dtype=float)
        stds = np.asarray(params['stds'], dtype=float)
        components = rng.choice(weights.size, size=size, p=weights / weights.sum())
        return rng.normal(means[components], stds[components])

    raise ParameterError(f"Unsupported family: {family}")


def sample_design(dist: DistributionSpec, n: int, p: int, seed: int) -> np.ndarray:
    """n x p matrix of i.i.d. draws from ``dist``; bit-identical for equal arguments."""
    if n < 1 or p < 1:
        raise ParameterError(f"Design shape must be positive, got n={n}, p={p}")
    validate_params(dist)
    rng = np.random.default_rng(seed)
    return np.asarray(_draw(dist, rng, (n, p)), dtype=float)


def random_spec(family: Family, rng: np.random.Generator) -> DistributionSpec:
    """Draw a family's hyperparameters uniformly from PARAM_RANGES."""
    family = Family(family)
    ranges = PARAM_RANGES[family]

    if family is Family.GAUSSIAN_MIXTURE:
        weights = rng.dirichlet(np.ones(GMM_COMPONENTS))
        # Renormalize so the sum is 1 to within rounding of a single division.
        weights = weights / weights.sum()
        params = {
            'weights': [float(w) for w in weights],
            'means': [float(m) for m in rng.uniform(*ranges['means'], size=GMM_COMPONENTS)],
            'stds': [float(s) for s in rng.uniform(*ranges['stds'], size=GMM_COMPONENTS)],
        }
    elif family is Family.BINOMIAL:
        lo, hi = ranges['trials']
        params = {
            'trials': int(rng.integers(lo, hi + 1)),
            'prob': float(rng.uniform(*ranges['prob'])),
        }
    elif family is Family.UNIFORM:
        low = float(rng.uniform(*ranges['low']))
        params = {'low': low, 'high': low + float(rng.uniform(*ranges['width']))}
    else:
        params = {name: float(rng.uniform(lo, hi)) for name, (lo, hi) in ranges.items()}

    spec = DistributionSpec(family=family, params=params, label=family.value)
    validate_params(spec)
    return spec
