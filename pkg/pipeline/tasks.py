"""
Celery entry points for per-system work. Arguments and results are plain
JSON values; each task rebuilds its system from the corpus entry payload.
"""
import logging
from functools import lru_cache

from celery import shared_task
from celery.exceptions import SoftTimeLimitExceeded

from fdpnet.services.estimator import LearnedEstimator
from fdpnet.services.persistence import load_model, model_checksum
from trex.services.calibration import AnalyticalEstimator, CalibrationGrid

from .services.evaluation import evaluate_system
from .services.training_set import system_training_records
from .services.workers import entry_from_payload

logger = logging.getLogger(__name__)


@lru_cache(maxsize=4)
def _cached_estimator(model_path, checksum):
    return LearnedEstimator(load_model(model_path))


def learned_estimator(model_path):
    """Loaded once per worker and model file contents; a retrained file at the same path is reloaded."""
    return _cached_estimator(model_path, model_checksum(model_path))


def build_estimators(methods, model_path=None) -> dict:
    estimators = {}
    for method in methods:
        if method == 'analytical':
            estimators[method] = AnalyticalEstimator()
        elif method == 'learned':
            estimators[method] = learned_estimator(model_path)
        else:
            raise ValueError(f"Unknown estimator {method!r}")
    return estimators


@shared_task(soft_time_limit=1200, time_limit=1500)
def extract_training_records(entry, K, L, T_max, v_grid, master_seed):
    corpus_entry = entry_from_payload(entry)
    try:
        records = system_training_records(corpus_entry, K, L, T_max, v_grid, master_seed)
    except SoftTimeLimitExceeded:
        logger.error(f"Training extraction for system {corpus_entry.index} exceeded its time limit")
        raise
    return [r.to_payload() for r in records]


@shared_task(soft_time_limit=1200, time_limit=1500)
def evaluate_system_task(entry, methods, model_path, v_grid, T_max, alpha, K, L, master_seed, deflation):
    corpus_entry = entry_from_payload(entry)
    grid = CalibrationGrid(v_grid=tuple(v_grid), T_max=T_max, alpha=alpha)
    try:
        evaluation = evaluate_system(corpus_entry, build_estimators(methods, model_path), grid, K, L,
                                     master_seed, deflation=deflation)
    except SoftTimeLimitExceeded:
        logger.error(f"Evaluation of system {corpus_entry.index} exceeded its time limit")
        raise
    return evaluation.to_payload()
