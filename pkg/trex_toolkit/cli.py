"""
``run(argv) -> exit code``: the toolkit's subcommands without exiting the process.

Subcommands are Django management commands; hyphenated spellings such as
``build-train-set`` map onto their command modules.
"""
import os
import sys

from django.core.management import execute_from_command_line

COMMAND_ALIASES = {
    'build-train-set': 'build_train_set',
}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv:
        argv[0] = COMMAND_ALIASES.get(argv[0], argv[0])
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'trex_toolkit.settings')

    try:
        execute_from_command_line(['trex', *argv])
    except SystemExit as e:
        if e.code is None:
            return 0
        if isinstance(e.code, int):
            return e.code
        sys.stderr.write(f"{e.code}\n")
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
