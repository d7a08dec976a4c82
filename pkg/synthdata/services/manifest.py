import json
import logging
from pathlib import Path

import pandas as pd

from trex_toolkit.exceptions import DataValidationError

from .generator import CorpusEntry, SystemConfig

logger = logging.getLogger(__name__)


def manifest_record(entry: CorpusEntry) -> dict:
    cfg = entry.config
    return {
        'index': entry.index,
        'family': cfg.distribution.family.value,
        'params': cfg.distribution.to_dict()['params'],
        'n': cfg.n,
        'p': cfg.p,
        's': cfg.sparsity,
        'snr': cfg.snr,
        'beta_magnitude_range': list(cfg.beta_magnitude_range),
        'seed': entry.seed,
    }


def write_manifest(entries, path) -> None:
    """One JSON object per line, in index order."""
    with open(path, 'w', encoding='utf-8') as f:
        for entry in sorted(entries, key=lambda e: e.index):
            f.write(json.dumps(manifest_record(entry), sort_keys=True))
            f.write('\n')


def read_manifest(path) -> list:
    path = Path(path)
    if not path.exists():
        raise DataValidationError(f"Corpus manifest not found: {path}")
    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except UnicodeDecodeError as e:
        raise DataValidationError(f"{path}: not UTF-8 text (byte {e.start}: {e.reason})") from e

    entries = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            cfg = SystemConfig.from_dict({
                'n': record['n'],
                'p': record['p'],
                's': record['s'],
                'snr': record['snr'],
                'beta_magnitude_range': record['beta_magnitude_range'],
                'distribution': {'family': record['family'], 'params': record['params'],
                                 'label': record['family']},
            })
            entries.append(CorpusEntry(index=int(record['index']), seed=int(record['seed']), config=cfg))
        except (KeyError, ValueError, TypeError) as e:
            raise DataValidationError(f"{path}:{lineno}: malformed manifest record ({e})") from e

    entries.sort(key=lambda e: e.index)
    logger.info(f"Read {len(entries)} corpus entries from {path}")
    return entries


def dump_system_csv(system, directory, y=None) -> None:
    """Raw X, y and truth files for one system: system_<index>_{X,y,truth}.csv."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = f"system_{system.index:06d}"
    response = system.y if y is None else y
    pd.DataFrame(system.X).to_csv(directory / f"{stem}_X.csv", header=False, index=False, float_format='%.17g')
    pd.DataFrame({'y': response}).to_csv(directory / f"{stem}_y.csv", header=False, index=False, float_format='%.17g')
    with open(directory / f"{stem}_truth.csv", 'w', encoding='utf-8') as f:
        for j in system.active_set:
            f.write(f"{j}\n")
