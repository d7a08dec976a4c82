#!/usr/bin/env python
"""Command-line entry point for the T-Rex toolkit."""
import os
import sys


def main():
    """Run a toolkit subcommand (datagen, build-train-set, train, evaluate, select)."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'trex_toolkit.settings')
    try:
        from trex_toolkit.cli import run
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
