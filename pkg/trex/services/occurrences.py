"""
Relative occurrences Phi and deflated occurrences Phi' over the (T, j) grid.

Row ``t - 1`` of each matrix holds the values for termination count ``t``.
"""
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from trex_toolkit.exceptions import ParameterError

from .lars import ExperimentResult

logger = logging.getLogger(__name__)

DEFLATION_RULES = ('linear', 'dummy_ratio')


@dataclass
class OccurrenceTable:
    phi: np.ndarray
    phi_deflated: np.ndarray
    K: int
    L: int
    T_max: int
    deflation: str = 'linear'
    exhausted_runs: int = 0

    @property
    def p(self) -> int:
        return self.phi.shape[1]

    def row(self, T: int) -> np.ndarray:
        if T < 1 or T > self.T_max:
            raise ParameterError(f"T={T} outside [1, {self.T_max}]")
        return self.phi[T - 1]


def _occurrence_counts(results: Sequence[ExperimentResult], T_max: int, p: int) -> np.ndarray:
    counts = np.zeros((T_max, p))
    for result in results:
        if result.stop_T < T_max:
            raise ParameterError(f"Experiment {result.k} ran to T={result.stop_T}, below T_max={T_max}")
        for j, before in result.dummies_before.items():
            if before < T_max:
                counts[before:, j] += 1
    return counts


def relative_occurrences(results: Sequence[ExperimentResult], T_max: int, p: int) -> np.ndarray:
    """phi[T-1, j] = fraction of experiments whose candidate set at T holds j."""
    if not results:
        raise ParameterError("Need at least one experiment")
    return _occurrence_counts(results, T_max, p) / len(results)


def deflation_factors(phi: np.ndarray, L: int, rule: str = 'linear') -> np.ndarray:
    """
    Per-step weights applied to the occurrence increments.

    ``linear``: (L - t + 1) / L.
    ``dummy_ratio``: one minus the share of step t's increment that null
    originals are expected to explain, taking null originals and dummies
    as exchangeable; zero on steps without any increment.
    """
    T_max, p = phi.shape
    t = np.arange(1, T_max + 1, dtype=float)
    if T_max > L:
        raise ParameterError(f"T_max={T_max} exceeds the number of dummies L={L}")

    if rule == 'linear':
        return np.maximum(0.0, (L - t + 1) / L)

    if rule == 'dummy_ratio':
        increments = np.diff(phi, axis=0, prepend=np.zeros((1, p))).sum(axis=1)
        expected_null = (p - phi.sum(axis=1)) / (L - t + 1)
        factors = np.zeros(T_max)
        moved = increments > 0
        factors[moved] = 1.0 - expected_null[moved] / increments[moved]
        return np.clip(factors, 0.0, 1.0)

    raise ParameterError(f"Unknown deflation rule {rule!r}. Valid: {', '.join(DEFLATION_RULES)}")


def deflate_phi(phi: np.ndarray, L: int, rule: str = 'linear') -> np.ndarray:
    increments = np.diff(phi, axis=0, prepend=np.zeros((1, phi.shape[1])))
    factors = deflation_factors(phi, L, rule)
    deflated = np.cumsum(factors[:, None] * increments, axis=0)
    return np.clip(deflated, 0.0, phi)


def deflate_occurrences(results: Sequence[ExperimentResult], T_max: int, p: int, L: int,
                        rule: str = 'linear') -> np.ndarray:
    """phi'[T-1, j] = sum over t <= T of factor_t * (phi[t-1, j] - phi[t-2, j])."""
    return deflate_phi(relative_occurrences(results, T_max, p), L, rule)


def build_occurrence_table(results: Sequence[ExperimentResult], T_max: int, p: int, L: int,
                           rule: str = 'linear') -> OccurrenceTable:
    phi = relative_occurrences(results, T_max, p)
    exhausted = sum(1 for r in results if r.exhausted and r.n_dummies < T_max)
    if exhausted:
        logger.warning(f"{exhausted}/{len(results)} runs exhausted the path before T_max={T_max}")
    return OccurrenceTable(
        phi=phi,
        phi_deflated=deflate_phi(phi, L, rule),
        K=len(results),
        L=L,
        T_max=T_max,
        deflation=rule,
        exhausted_runs=exhausted,
    )
