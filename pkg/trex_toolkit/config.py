"""
Key-value experiment config files.

Format: one ``key = value`` pair per line, ``#`` starts a comment, list
values are comma-separated. Values stay strings here; typing happens in
``pipeline.forms.RunConfigForm``.
"""
import logging
from pathlib import Path

from django.conf import settings

from .exceptions import ParameterError

logger = logging.getLogger(__name__)


def read_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ParameterError(f"Config file not found: {path}")

    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except UnicodeDecodeError as e:
        raise ParameterError(f"{path}: not UTF-8 text (byte {e.start}: {e.reason})") from e

    values = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ParameterError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split('=', 1)
        key = key.strip().replace('-', '_')
        if not key:
            raise ParameterError(f"{path}:{lineno}: empty key")
        values[key] = value.strip()

    logger.info(f"Loaded {len(values)} settings from {path}")
    return values


def merge_run_config(file_values=None, overrides=None) -> dict:
    """
    Layer TREX_DEFAULTS < config file < command-line overrides.

    ``None`` overrides mean "flag not given" and do not mask lower layers.
    """
    merged = dict(settings.TREX_DEFAULTS)
    for layer in (file_values or {}, overrides or {}):
        for key, value in layer.items():
            if value is not None:
                merged[key] = value
    return merged
