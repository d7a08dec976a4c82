from dataclasses import dataclass

import numpy as np

from trex_toolkit.exceptions import ParameterError


@dataclass(frozen=True)
class LossSpec:
    """Squared loss with underestimation weighted by ``w``."""
    w: float = 1.1

    def __post_init__(self):
        if not self.w > 1.0:
            raise ParameterError(f"Loss weight w must be > 1, got {self.w}")


def asym_loss(pred, label, spec: LossSpec):
    """max(0, pred - label)^2 + w * max(0, label - pred)^2, elementwise."""
    over = np.maximum(0.0, np.subtract(pred, label))
    under = np.maximum(0.0, np.subtract(label, pred))
    return over ** 2 + spec.w * under ** 2


def asym_loss_grad(pred, label, spec: LossSpec):
    """d loss / d pred; zero at pred == label."""
    over = np.maximum(0.0, np.subtract(pred, label))
    under = np.maximum(0.0, np.subtract(label, pred))
    return 2.0 * over - 2.0 * spec.w * under
