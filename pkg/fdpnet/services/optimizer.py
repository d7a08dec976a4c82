from dataclasses import dataclass, field, replace
from typing import List

import numpy as np

from .mlp import MlpParams


@dataclass
class OptimizerState:
    """Adaptive-moment state; moment lists follow ``MlpParams.arrays()`` order."""
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: MlpParams, lr: float = 1e-3, **kwargs) -> 'OptimizerState':
        arrays = params.arrays()
        return cls(m=[np.zeros_like(a) for a in arrays], v=[np.zeros_like(a) for a in arrays],
                   step=0, lr=lr, **kwargs)


def adam_step(params: MlpParams, grads, state: OptimizerState):
    """One bias-corrected Adam update. Inputs are left untouched."""
    step = state.step + 1
    correction1 = 1.0 - state.beta1 ** step
    correction2 = 1.0 - state.beta2 ** step

    new_arrays, new_m, new_v = [], [], []
    for a, g, m, v in zip(params.arrays(), grads, state.m, state.v):
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        new_arrays.append(a - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)

    return params.with_arrays(new_arrays), replace(state, m=new_m, v=new_v, step=step)
