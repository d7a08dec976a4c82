"""
Per-system work distribution.

``local`` runs work items in a thread pool inside this process; ``celery``
sends one task per item to the workers. Either way results come back in
item order, so aggregation never depends on completion order.
"""
import logging
from concurrent.futures import ThreadPoolExecutor

from django.conf import settings

from synthdata.services.generator import CorpusEntry, SystemConfig
from trex_toolkit.exceptions import ParameterError

logger = logging.getLogger(__name__)

BACKENDS = ('local', 'celery')


def execution_backend() -> str:
    backend = getattr(settings, 'TREX_EXECUTION_BACKEND', 'local')
    if backend not in BACKENDS:
        raise ParameterError(f"TREX_EXECUTION_BACKEND must be one of {BACKENDS}, got {backend!r}")
    return backend


def entry_payload(entry: CorpusEntry) -> dict:
    """JSON-safe form of a corpus entry, as sent to Celery workers."""
    return {'index': entry.index, 'seed': entry.seed, 'config': entry.config.to_dict()}


def entry_from_payload(data) -> CorpusEntry:
    return CorpusEntry(index=int(data['index']), seed=int(data['seed']),
                       config=SystemConfig.from_dict(data['config']))


def map_ordered(fn, items, threads: int = 1, label: str = 'system'):
    items = list(items)
    total = len(items)
    step = max(1, total // 10)

    def run(position_item):
        position, item = position_item
        result = fn(item)
        if (position + 1) % step == 0 or position + 1 == total:
            logger.info(f"Finished {label} {position + 1}/{total}")
        return result

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, enumerate(items)))
    return [run(pi) for pi in enumerate(items)]


def celery_map(task, arg_list, timeout=None):
    """Dispatch ``task`` once per argument tuple and collect results in order."""
    from celery import group

    logger.info(f"Dispatching {len(arg_list)} {task.name} tasks to Celery workers")
    job = group(task.s(*args) for args in arg_list)
    return job.apply_async().get(timeout=timeout)
