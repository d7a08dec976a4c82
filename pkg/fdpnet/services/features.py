from dataclasses import dataclass

import numpy as np

from trex_toolkit.exceptions import DimensionError, ParameterError


@dataclass(frozen=True)
class FeatureSpec:
    """Padded width of the Phi row and the scale applied to T."""
    p_max: int
    T_max_norm: float

    def __post_init__(self):
        if self.p_max < 1:
            raise ParameterError(f"p_max must be >= 1, got {self.p_max}")
        if not self.T_max_norm > 0:
            raise ParameterError(f"T_max_norm must be > 0, got {self.T_max_norm}")

    @property
    def input_dim(self) -> int:
        return self.p_max + 3


def featurize(phi_row, v: float, T: int, L: int, meta: FeatureSpec) -> np.ndarray:
    """[phi_row zero-padded to p_max, v, T / T_max_norm, L / p]."""
    phi_row = np.asarray(phi_row, dtype=float).ravel()
    p = phi_row.size
    if p > meta.p_max:
        raise DimensionError(f"p={p} exceeds the model's p_max={meta.p_max}")
    if p < 1:
        raise DimensionError("Phi row is empty")

    features = np.zeros(meta.input_dim)
    features[:p] = phi_row
    features[meta.p_max] = v
    features[meta.p_max + 1] = T / meta.T_max_norm
    features[meta.p_max + 2] = L / p
    return features


def featurize_rows(phi_rows, vs, Ts, Ls, ps, meta: FeatureSpec) -> np.ndarray:
    """Vectorized featurize for a batch; ``phi_rows`` is already padded to p_max."""
    phi_rows = np.asarray(phi_rows, dtype=float)
    if phi_rows.ndim != 2 or phi_rows.shape[1] != meta.p_max:
        raise DimensionError(f"Expected padded Phi rows of width {meta.p_max}, got shape {phi_rows.shape}")
    ps = np.asarray(ps, dtype=float)
    return np.column_stack([
        phi_rows,
        np.asarray(vs, dtype=float),
        np.asarray(Ts, dtype=float) / meta.T_max_norm,
        np.asarray(Ls, dtype=float) / ps,
    ])
