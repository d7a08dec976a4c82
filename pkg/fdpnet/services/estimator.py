import numpy as np

from trex.services.calibration import CalibrationGrid
from trex.services.occurrences import OccurrenceTable
from trex_toolkit.exceptions import DimensionError

from .features import featurize, featurize_rows
from .mlp import MlpParams, mlp_forward, mlp_forward_batch


def predict_fdp(params: MlpParams, table: OccurrenceTable, v: float, T: int) -> float:
    features = featurize(table.row(T), v, T, table.L, params.feature_spec)
    return mlp_forward(params, features)


class LearnedEstimator:
    """Network FDP estimate, usable wherever calibrate() takes an estimator."""
    label = 'learned'

    def __init__(self, params: MlpParams):
        params.validate()
        self.params = params

    def __call__(self, table: OccurrenceTable, v: float, T: int) -> float:
        return predict_fdp(self.params, table, v, T)

    def surface(self, table: OccurrenceTable, grid: CalibrationGrid) -> np.ndarray:
        """All grid cells in one forward pass, shaped (T_max, |v_grid|)."""
        meta = self.params.feature_spec
        if table.p > meta.p_max:
            raise DimensionError(f"p={table.p} exceeds the model's p_max={meta.p_max}")
        Ts = np.repeat(np.arange(1, grid.T_max + 1), len(grid.v_grid))
        vs = np.tile(np.asarray(grid.v_grid), grid.T_max)
        padded = np.zeros((Ts.size, meta.p_max))
        padded[:, :table.p] = table.phi[Ts - 1]
        rows = featurize_rows(padded, vs, Ts, np.full(Ts.size, table.L), np.full(Ts.size, table.p), meta)
        return mlp_forward_batch(self.params, rows).reshape(grid.T_max, len(grid.v_grid))
