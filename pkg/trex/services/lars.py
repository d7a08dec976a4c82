"""
Least angle regression on the dummy-augmented matrix [X D].

The path stops as soon as the ``stop_T``-th dummy enters. One run to depth
T_max serves every T <= T_max: candidate sets for smaller T are prefixes of
the entry order.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from trex_toolkit.exceptions import DimensionError, LarsPathError, ParameterError

from .standardize import StandardizedData

logger = logging.getLogger(__name__)

STEP_EPS = np.finfo(float).eps * 10
# residual norm below which an entering unit-norm column counts as collinear with the active set
SPAN_TOL = 1e-8


class Entry(NamedTuple):
    column: int  # index within the original block or within the dummy block
    is_dummy: bool


@dataclass
class ExperimentResult:
    k: int
    entry_order: Tuple[Entry, ...]
    dummies_before: Dict[int, int]
    stop_T: int
    n_dummies: int
    exhausted: bool = False
    active_correlations: Optional[List[np.ndarray]] = field(default=None, repr=False)

    @property
    def originals(self) -> Tuple[int, ...]:
        return tuple(e.column for e in self.entry_order if not e.is_dummy)


def in_column_span(ZA: np.ndarray, z: np.ndarray, tol: float = SPAN_TOL) -> bool:
    """True when z is, to ``tol``, a linear combination of the columns of ZA."""
    if ZA.shape[1] == 0:
        return False
    coef, *_ = np.linalg.lstsq(ZA, z, rcond=None)
    return float(np.linalg.norm(z - ZA @ coef)) < tol


def lars_run(data: StandardizedData, dummies: np.ndarray, stop_T: int, k: int = 0,
             trace: bool = False) -> ExperimentResult:
    """
    Run plain LARS on ([Xs D], ys) until ``stop_T`` dummies are active.

    ``dummies`` must already be centered with unit-norm columns. A column
    that would enter inside the span of the active set (duplicated or
    collinear designs) is dropped for the rest of the run. With
    ``trace`` set, the absolute residual correlations of the active set
    (including the entering column) are kept after every path step.
    """
    X = data.Xs
    y = data.ys
    n, p = X.shape
    if dummies.ndim != 2 or dummies.shape[0] != n:
        raise DimensionError(f"Dummy matrix shape {dummies.shape} does not match n={n}")
    L = dummies.shape[1]
    if stop_T < 1:
        raise ParameterError(f"stop_T must be >= 1, got {stop_T}")
    if stop_T > L:
        raise ParameterError(f"stop_T={stop_T} exceeds the number of dummies L={L}")

    Z = np.hstack([X, dummies])
    n_columns = p + L
    max_steps = min(n - 1, n_columns)

    residual = y.copy()
    corr = Z.T @ residual
    inactive = np.ones(n_columns, dtype=bool)
    active: List[int] = []

    entries: List[Entry] = []
    dummies_before: Dict[int, int] = {}
    n_dummies = 0
    exhausted = False
    traces = [] if trace else None

    j = int(np.argmax(np.abs(corr)))
    step = 0
    while True:
        inactive[j] = False
        if in_column_span(Z[:, active], Z[:, j]):
            logger.debug(f"Experiment {k}: column {j} is collinear with the active set at step {step}, dropped")
        else:
            active.append(j)
            if j >= p:
                entries.append(Entry(j - p, True))
                n_dummies += 1
            else:
                entries.append(Entry(j, False))
                dummies_before[j] = n_dummies

            if n_dummies >= stop_T:
                break
            if len(active) >= max_steps:
                exhausted = True
                break

        signs = np.sign(corr[active])
        C = np.max(np.abs(corr[active]))
        ZA = Z[:, active] * signs
        gram = ZA.T @ ZA
        ones = np.ones(len(active))
        try:
            gram_inv_ones = np.linalg.solve(gram, ones)
        except np.linalg.LinAlgError as e:
            raise LarsPathError(f"Singular equiangular system at step {step} ({e})", step=step) from e

        denom = float(ones @ gram_inv_ones)
        if not np.isfinite(denom) or denom <= 0:
            raise LarsPathError(f"Degenerate equiangular direction at step {step}", step=step)
        A = 1.0 / np.sqrt(denom)
        u = ZA @ (A * gram_inv_ones)
        a = Z.T @ u

        candidates = np.flatnonzero(inactive)
        if candidates.size == 0:
            exhausted = True
            break
        c_in = corr[candidates]
        a_in = a[candidates]
        with np.errstate(divide='ignore', invalid='ignore'):
            gamma_minus = (C - c_in) / (A - a_in)
            gamma_plus = (C + c_in) / (A + a_in)
        gamma_minus[~(gamma_minus > STEP_EPS)] = np.inf
        gamma_plus[~(gamma_plus > STEP_EPS)] = np.inf
        gammas = np.minimum(gamma_minus, gamma_plus)

        best = int(np.argmin(gammas))
        gamma = gammas[best]
        if not np.isfinite(gamma):
            exhausted = True
            break

        residual = residual - gamma * u
        corr = Z.T @ residual
        j = int(candidates[best])
        step += 1

        if traces is not None:
            traces.append(np.abs(corr[active + [j]]))

    return ExperimentResult(
        k=k,
        entry_order=tuple(entries),
        dummies_before=dummies_before,
        stop_T=stop_T,
        n_dummies=n_dummies,
        exhausted=exhausted,
        active_correlations=traces,
    )


def candidate_set(result: ExperimentResult, T: int) -> Tuple[int, ...]:
    """Original variables that entered strictly before the T-th dummy."""
    if T < 1 or T > result.stop_T:
        raise ParameterError(f"T={T} outside the run depth [1, {result.stop_T}]")
    return tuple(sorted(j for j, before in result.dummies_before.items() if before < T))
