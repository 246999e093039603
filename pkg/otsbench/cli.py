"""Entry point of the ``ots`` command line.

Subcommands are the management commands of the ``core`` app: ``gen``, ``topo``,
``oracle``, ``tighten``, ``solve``, ``bench`` and ``report``.
"""
import os
import sys

from core.exceptions import EXIT_OK, EXIT_USAGE
from otsbench import __version__


def version_text() -> str:
    from core.utils.generics import hardware_summary
    from ots.milp.backend import get_backend

    return f'ots {__version__}\nbackend {get_backend().identity()}\nhardware {hardware_summary()}'


def main(argv=None) -> int:
    """Run a subcommand and return its exit code."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'otsbench.settings')
    argv = list(sys.argv if argv is None else argv)

    import django
    from django.core.management import execute_from_command_line

    if argv[1:] in (['--version'], ['version']):
        django.setup()
        sys.stdout.write(version_text() + '\n')
        return EXIT_OK

    try:
        execute_from_command_line(['ots'] + argv[1:])
    except SystemExit as e:
        if e.code is None:
            return EXIT_OK
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
